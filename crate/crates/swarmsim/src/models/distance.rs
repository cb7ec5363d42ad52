//! Distance estimate models mimic distance measurements between nodes, as a
//! localization algorithm would observe them. Estimates exist only for pairs
//! that can communicate; everything else is absent.

use crate::models::communication::CommunicationModel;
use crate::models::random::RandomVariable;
use crate::models::ModelError;
use crate::world::{NodeId, Topology};

pub trait DistanceEstimateModel {
    fn name(&self) -> &'static str;

    /// `None` when the pair cannot communicate or the model provides no
    /// estimates at all.
    fn estimate(
        &mut self,
        topology: &Topology,
        comm: &dyn CommunicationModel,
        u: NodeId,
        v: NodeId,
    ) -> Result<Option<f64>, ModelError>;
}

/// True Euclidean distance, exactly.
pub struct PerfectDistance;

impl DistanceEstimateModel for PerfectDistance {
    fn name(&self) -> &'static str {
        "perfect"
    }

    fn estimate(
        &mut self,
        topology: &Topology,
        comm: &dyn CommunicationModel,
        u: NodeId,
        v: NodeId,
    ) -> Result<Option<f64>, ModelError> {
        if !comm.can_communicate(topology, u, v)? {
            return Ok(None);
        }
        let pu = topology.position(u).ok_or(ModelError::UnknownNode(u))?;
        let pv = topology.position(v).ok_or(ModelError::UnknownNode(v))?;
        Ok(Some(pu.distance(&pv)))
    }
}

/// Truth plus zero-mean normal error, truncated at 0.
pub struct NoisyDistance {
    noise: RandomVariable,
}

impl NoisyDistance {
    pub fn new(sigma: f64, rng: rand_chacha::ChaCha8Rng) -> Result<Self, ModelError> {
        Ok(NoisyDistance {
            noise: RandomVariable::normal(0.0, sigma, rng)?,
        })
    }
}

impl DistanceEstimateModel for NoisyDistance {
    fn name(&self) -> &'static str {
        "noisy"
    }

    fn estimate(
        &mut self,
        topology: &Topology,
        comm: &dyn CommunicationModel,
        u: NodeId,
        v: NodeId,
    ) -> Result<Option<f64>, ModelError> {
        if !comm.can_communicate(topology, u, v)? {
            return Ok(None);
        }
        let pu = topology.position(u).ok_or(ModelError::UnknownNode(u))?;
        let pv = topology.position(v).ok_or(ModelError::UnknownNode(v))?;
        Ok(Some((pu.distance(&pv) + self.noise.sample()).max(0.0)))
    }
}

/// Always absent, for protocols that must not rely on ranging.
pub struct NoDistance;

impl DistanceEstimateModel for NoDistance {
    fn name(&self) -> &'static str {
        "none"
    }

    fn estimate(
        &mut self,
        topology: &Topology,
        _comm: &dyn CommunicationModel,
        u: NodeId,
        v: NodeId,
    ) -> Result<Option<f64>, ModelError> {
        for id in [u, v] {
            if !topology.contains(id) {
                return Err(ModelError::UnknownNode(id));
            }
        }
        Ok(None)
    }
}
