//! Repository of model implementations, selectable by string identifier.
//!
//! Each of the five model families maps identifiers to factories. A factory
//! takes a parameter set and the run seed (for models that own random
//! streams) and yields a model instance. Construction with an unknown
//! identifier fails; there is no silent fallback.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::models::communication::{CommunicationModel, DiscGraph};
use crate::models::distance::{DistanceEstimateModel, NoDistance, NoisyDistance, PerfectDistance};
use crate::models::edge::{CachedEdge, EdgeModel, ListEdge, SimpleEdge};
use crate::models::params::{ParamReader, Params};
use crate::models::random::{stream_rng, RandomVariable};
use crate::models::transmission::{
    DelayTransmission, RandomDropTransmission, ReliableTransmission, TransmissionModel,
};
use crate::models::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Communication,
    Edge,
    Transmission,
    RandomVariable,
    DistanceEstimate,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::Communication,
        ModelFamily::Edge,
        ModelFamily::Transmission,
        ModelFamily::RandomVariable,
        ModelFamily::DistanceEstimate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Communication => "communication",
            ModelFamily::Edge => "edge",
            ModelFamily::Transmission => "transmission",
            ModelFamily::RandomVariable => "random_variable",
            ModelFamily::DistanceEstimate => "distance_estimate",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        ModelFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ModelError::UnknownFamily(s.to_string()))
    }
}

type CommFactory = Box<dyn Fn(&Params, u64) -> Result<Box<dyn CommunicationModel>, ModelError>>;
type EdgeFactory = Box<dyn Fn(&Params, u64) -> Result<Box<dyn EdgeModel>, ModelError>>;
type TransmissionFactory =
    Box<dyn Fn(&Params, u64) -> Result<Box<dyn TransmissionModel>, ModelError>>;
type RandomVariableFactory = Box<dyn Fn(&Params, u64) -> Result<RandomVariable, ModelError>>;
type DistanceFactory =
    Box<dyn Fn(&Params, u64) -> Result<Box<dyn DistanceEstimateModel>, ModelError>>;

/// Per-family maps from identifier to factory.
pub struct ModelRegistry {
    communication: BTreeMap<String, CommFactory>,
    edge: BTreeMap<String, EdgeFactory>,
    transmission: BTreeMap<String, TransmissionFactory>,
    random_variable: BTreeMap<String, RandomVariableFactory>,
    distance_estimate: BTreeMap<String, DistanceFactory>,
}

fn insert_unique<T>(
    map: &mut BTreeMap<String, T>,
    family: ModelFamily,
    identifier: &str,
    factory: T,
) -> Result<(), ModelError> {
    if map.contains_key(identifier) {
        return Err(ModelError::DuplicateIdentifier {
            family: family.as_str(),
            identifier: identifier.to_string(),
        });
    }
    map.insert(identifier.to_string(), factory);
    Ok(())
}

fn unknown(family: ModelFamily, identifier: &str) -> ModelError {
    ModelError::UnknownIdentifier {
        family: family.as_str(),
        identifier: identifier.to_string(),
    }
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry {
            communication: BTreeMap::new(),
            edge: BTreeMap::new(),
            transmission: BTreeMap::new(),
            random_variable: BTreeMap::new(),
            distance_estimate: BTreeMap::new(),
        }
    }

    /// A registry with every shipped model registered.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register_communication("disc_graph", |params, _seed| {
            let mut p = ParamReader::new(params);
            let range = p.real_or("range", 1.0)?;
            p.finish()?;
            Ok(Box::new(DiscGraph::new(range)?))
        })
        .expect("fresh registry");

        r.register_edge("list", |params, _seed| {
            ParamReader::new(params).finish()?;
            Ok(Box::new(ListEdge::new()))
        })
        .expect("fresh registry");
        r.register_edge("simple", |params, _seed| {
            ParamReader::new(params).finish()?;
            Ok(Box::new(SimpleEdge::new()))
        })
        .expect("fresh registry");
        r.register_edge("cached", |params, _seed| {
            let mut p = ParamReader::new(params);
            let k = p.int_or("k", CachedEdge::DEFAULT_CAPACITY as i64)?;
            p.finish()?;
            if k <= 0 {
                return Err(ModelError::InvalidParameter {
                    key: "k".to_string(),
                    reason: format!("must be positive, got {k}"),
                });
            }
            Ok(Box::new(CachedEdge::new(k as usize)?))
        })
        .expect("fresh registry");

        r.register_transmission("reliable", |params, _seed| {
            ParamReader::new(params).finish()?;
            Ok(Box::new(ReliableTransmission))
        })
        .expect("fresh registry");
        r.register_transmission("random_drop", |params, seed| {
            let mut p = ParamReader::new(params);
            let drop_p = p.require_real("p")?;
            p.finish()?;
            Ok(Box::new(RandomDropTransmission::new(
                drop_p,
                stream_rng(seed, "transmission.random_drop"),
            )?))
        })
        .expect("fresh registry");
        r.register_transmission("delay", |params, seed| {
            let mut p = ParamReader::new(params);
            let rv = build_random_variable(&mut p, seed, "transmission.delay")?;
            p.finish()?;
            Ok(Box::new(DelayTransmission::new(rv)))
        })
        .expect("fresh registry");

        r.register_random_variable("uniform", |params, seed| {
            let mut p = ParamReader::new(params);
            let lo = p.real_or("lo", 0.0)?;
            let hi = p.real_or("hi", 1.0)?;
            let stream = p.str_or("stream", "rv.uniform")?;
            p.finish()?;
            RandomVariable::uniform(lo, hi, stream_rng(seed, &stream))
        })
        .expect("fresh registry");
        r.register_random_variable("normal", |params, seed| {
            let mut p = ParamReader::new(params);
            let mean = p.real_or("mean", 0.0)?;
            let sigma = p.real_or("sigma", 1.0)?;
            let stream = p.str_or("stream", "rv.normal")?;
            p.finish()?;
            RandomVariable::normal(mean, sigma, stream_rng(seed, &stream))
        })
        .expect("fresh registry");
        r.register_random_variable("bernoulli", |params, seed| {
            let mut p = ParamReader::new(params);
            let prob = p.require_real("p")?;
            let stream = p.str_or("stream", "rv.bernoulli")?;
            p.finish()?;
            RandomVariable::bernoulli(prob, stream_rng(seed, &stream))
        })
        .expect("fresh registry");
        r.register_random_variable("constant", |params, _seed| {
            let mut p = ParamReader::new(params);
            let c = p.require_real("c")?;
            p.finish()?;
            Ok(RandomVariable::constant(c))
        })
        .expect("fresh registry");

        r.register_distance_estimate("perfect", |params, _seed| {
            ParamReader::new(params).finish()?;
            Ok(Box::new(PerfectDistance))
        })
        .expect("fresh registry");
        r.register_distance_estimate("noisy", |params, seed| {
            let mut p = ParamReader::new(params);
            let sigma = p.require_real("sigma")?;
            p.finish()?;
            Ok(Box::new(NoisyDistance::new(
                sigma,
                stream_rng(seed, "distance.noisy"),
            )?))
        })
        .expect("fresh registry");
        r.register_distance_estimate("none", |params, _seed| {
            ParamReader::new(params).finish()?;
            Ok(Box::new(NoDistance))
        })
        .expect("fresh registry");

        r
    }

    pub fn register_communication(
        &mut self,
        identifier: &str,
        factory: impl Fn(&Params, u64) -> Result<Box<dyn CommunicationModel>, ModelError> + 'static,
    ) -> Result<(), ModelError> {
        insert_unique(
            &mut self.communication,
            ModelFamily::Communication,
            identifier,
            Box::new(factory),
        )
    }

    pub fn register_edge(
        &mut self,
        identifier: &str,
        factory: impl Fn(&Params, u64) -> Result<Box<dyn EdgeModel>, ModelError> + 'static,
    ) -> Result<(), ModelError> {
        insert_unique(
            &mut self.edge,
            ModelFamily::Edge,
            identifier,
            Box::new(factory),
        )
    }

    pub fn register_transmission(
        &mut self,
        identifier: &str,
        factory: impl Fn(&Params, u64) -> Result<Box<dyn TransmissionModel>, ModelError> + 'static,
    ) -> Result<(), ModelError> {
        insert_unique(
            &mut self.transmission,
            ModelFamily::Transmission,
            identifier,
            Box::new(factory),
        )
    }

    pub fn register_random_variable(
        &mut self,
        identifier: &str,
        factory: impl Fn(&Params, u64) -> Result<RandomVariable, ModelError> + 'static,
    ) -> Result<(), ModelError> {
        insert_unique(
            &mut self.random_variable,
            ModelFamily::RandomVariable,
            identifier,
            Box::new(factory),
        )
    }

    pub fn register_distance_estimate(
        &mut self,
        identifier: &str,
        factory: impl Fn(&Params, u64) -> Result<Box<dyn DistanceEstimateModel>, ModelError> + 'static,
    ) -> Result<(), ModelError> {
        insert_unique(
            &mut self.distance_estimate,
            ModelFamily::DistanceEstimate,
            identifier,
            Box::new(factory),
        )
    }

    pub fn create_communication(
        &self,
        identifier: &str,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn CommunicationModel>, ModelError> {
        let factory = self
            .communication
            .get(identifier)
            .ok_or_else(|| unknown(ModelFamily::Communication, identifier))?;
        factory(params, seed)
    }

    pub fn create_edge(
        &self,
        identifier: &str,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn EdgeModel>, ModelError> {
        let factory = self
            .edge
            .get(identifier)
            .ok_or_else(|| unknown(ModelFamily::Edge, identifier))?;
        factory(params, seed)
    }

    pub fn create_transmission(
        &self,
        identifier: &str,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn TransmissionModel>, ModelError> {
        let factory = self
            .transmission
            .get(identifier)
            .ok_or_else(|| unknown(ModelFamily::Transmission, identifier))?;
        factory(params, seed)
    }

    pub fn create_random_variable(
        &self,
        identifier: &str,
        params: &Params,
        seed: u64,
    ) -> Result<RandomVariable, ModelError> {
        let factory = self
            .random_variable
            .get(identifier)
            .ok_or_else(|| unknown(ModelFamily::RandomVariable, identifier))?;
        factory(params, seed)
    }

    pub fn create_distance_estimate(
        &self,
        identifier: &str,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn DistanceEstimateModel>, ModelError> {
        let factory = self
            .distance_estimate
            .get(identifier)
            .ok_or_else(|| unknown(ModelFamily::DistanceEstimate, identifier))?;
        factory(params, seed)
    }

    pub fn contains(&self, family: ModelFamily, identifier: &str) -> bool {
        match family {
            ModelFamily::Communication => self.communication.contains_key(identifier),
            ModelFamily::Edge => self.edge.contains_key(identifier),
            ModelFamily::Transmission => self.transmission.contains_key(identifier),
            ModelFamily::RandomVariable => self.random_variable.contains_key(identifier),
            ModelFamily::DistanceEstimate => self.distance_estimate.contains_key(identifier),
        }
    }

    /// Registered identifiers of a family, sorted.
    pub fn identifiers(&self, family: ModelFamily) -> Vec<&str> {
        match family {
            ModelFamily::Communication => self.communication.keys().map(String::as_str).collect(),
            ModelFamily::Edge => self.edge.keys().map(String::as_str).collect(),
            ModelFamily::Transmission => self.transmission.keys().map(String::as_str).collect(),
            ModelFamily::RandomVariable => {
                self.random_variable.keys().map(String::as_str).collect()
            }
            ModelFamily::DistanceEstimate => {
                self.distance_estimate.keys().map(String::as_str).collect()
            }
        }
    }
}

/// Builds a random variable from `rv=<identifier>` plus that variable's
/// parameters, all read from the same parameter set. Used by models that
/// embed a configurable distribution.
pub fn build_random_variable(
    p: &mut ParamReader<'_>,
    seed: u64,
    stream: &str,
) -> Result<RandomVariable, ModelError> {
    let identifier = p.str_or("rv", "constant")?;
    match identifier.as_str() {
        "uniform" => {
            let lo = p.real_or("lo", 0.0)?;
            let hi = p.real_or("hi", 1.0)?;
            RandomVariable::uniform(lo, hi, stream_rng(seed, stream))
        }
        "normal" => {
            let mean = p.real_or("mean", 0.0)?;
            let sigma = p.real_or("sigma", 1.0)?;
            RandomVariable::normal(mean, sigma, stream_rng(seed, stream))
        }
        "bernoulli" => {
            let prob = p.require_real("p")?;
            RandomVariable::bernoulli(prob, stream_rng(seed, stream))
        }
        "constant" => Ok(RandomVariable::constant(p.real_or("c", 0.0)?)),
        other => Err(unknown(ModelFamily::RandomVariable, other)),
    }
}
