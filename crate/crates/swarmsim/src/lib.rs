//! swarmsim: a discrete-event simulator for very large wireless sensor
//! networks.
//!
//! Instead of simulating radios and protocol stacks, swarmsim models the
//! *effects* of the lower layers (connectivity, loss, delay) through small
//! exchangeable models, which is what makes worlds with 100,000+ nodes
//! tractable on ordinary hardware. Centralized algorithms and distributed
//! message-passing protocols run against the same world: tasks get global
//! access between rounds, processors live on nodes and exchange messages.
//!
//! The crate splits into:
//!
//! * [`world`] - the simulation environment: nodes, processors, tags,
//!   message exchange, persistence
//! * [`models`] - communication, edge, transmission, random-variable and
//!   distance-estimate model families with a runtime registry
//! * [`sequencer`] - event scheduler, simulation controller, task framework
//! * [`config`] - setup-file parsing, scenario generation, CLI
//! * [`casestudy`] - the time-synchronization traffic workload and
//!   benchmark sweep harness

pub mod casestudy;
pub mod config;
pub mod models;
pub mod sequencer;
pub mod world;

pub use config::{
    cli_main, density, generate_rect_world, parse_config, ConfigProgram, ScenarioSpec,
};
pub use models::{ModelError, ModelRegistry, ModelSet, RandomVariable};
pub use sequencer::{Metrics, SimulationController, SimulationTask, TaskError, TaskParams};
pub use world::{
    MessageEnvelope, Node, NodeContext, NodeId, NodeState, Payload, Position, Processor,
    ProcessorState, RoundReport, TagMap, TagValue, Topology, Transition, World, WorldError,
};
