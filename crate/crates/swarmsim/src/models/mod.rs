//! Exchangeable behavior models.
//!
//! Low-level phenomena are not simulated; their effects are. Each family of
//! effects hides behind a small trait with several selectable
//! implementations: whether two nodes can communicate (communication), the
//! graph view of the network (edge), per-message loss and delay
//! (transmission), randomness (random variables), and ranging (distance
//! estimates). Implementations register by string identifier in the
//! [`ModelRegistry`] and are picked at runtime from configuration.

pub mod communication;
pub mod distance;
pub mod edge;
pub mod grid;
pub mod params;
pub mod random;
pub mod registry;
pub mod transmission;

use thiserror::Error;

use crate::world::NodeId;

pub use communication::{CommunicationModel, DiscGraph};
pub use distance::{DistanceEstimateModel, NoDistance, NoisyDistance, PerfectDistance};
pub use edge::{CachedEdge, EdgeModel, ListEdge, SimpleEdge};
pub use grid::SpatialGrid;
pub use params::{ParamReader, Params};
pub use random::{stream_rng, stream_seed, RandomVariable};
pub use registry::{build_random_variable, ModelFamily, ModelRegistry};
pub use transmission::{
    DelayTransmission, RandomDropTransmission, ReliableTransmission, TransmissionModel,
    TransmitContext,
};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unknown {family} model {identifier:?}")]
    UnknownIdentifier {
        family: &'static str,
        identifier: String,
    },
    #[error("{family} model {identifier:?} is already registered")]
    DuplicateIdentifier {
        family: &'static str,
        identifier: String,
    },
    #[error("unknown model family {0:?}")]
    UnknownFamily(String),
    #[error("parameter {key:?}: {reason}")]
    InvalidParameter { key: String, reason: String },
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// The active model set of a world: one implementation per behavioral
/// family, plus the default random variable available to protocols.
pub struct ModelSet {
    pub communication: Box<dyn CommunicationModel>,
    pub edge: Box<dyn EdgeModel>,
    pub transmission: Box<dyn TransmissionModel>,
    pub distance_estimate: Box<dyn DistanceEstimateModel>,
    pub random_variable: RandomVariable,
}

impl ModelSet {
    pub fn new(
        communication: Box<dyn CommunicationModel>,
        edge: Box<dyn EdgeModel>,
        transmission: Box<dyn TransmissionModel>,
        distance_estimate: Box<dyn DistanceEstimateModel>,
        random_variable: RandomVariable,
    ) -> Self {
        ModelSet {
            communication,
            edge,
            transmission,
            distance_estimate,
            random_variable,
        }
    }

    /// Unit disk (range 1), full adjacency cache, loss-free next-round
    /// delivery, exact distances, uniform(0, 1) randomness for `seed`.
    pub fn defaults(seed: u64) -> Self {
        ModelSet {
            communication: Box::new(DiscGraph::new(1.0).expect("valid default range")),
            edge: Box::new(ListEdge::new()),
            transmission: Box::new(ReliableTransmission),
            distance_estimate: Box::new(PerfectDistance),
            random_variable: RandomVariable::uniform(0.0, 1.0, stream_rng(seed, "world.random"))
                .expect("valid default bounds"),
        }
    }
}
