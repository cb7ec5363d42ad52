//! The central coordinating unit: event scheduler, simulation controller,
//! task framework, and run metrics.

pub mod controller;
pub mod metrics;
pub mod scheduler;
pub mod tasks;

pub use controller::{
    ReportRow, RunError, SimulationController, SimulationTask, TaskError, TaskParams,
};
pub use metrics::{peak_rss_bytes, Metrics};
pub use scheduler::{
    Event, EventAction, EventHandle, EventScheduler, SchedulerError, DEFAULT_EVENT_CAP,
};
pub use tasks::{build_model_set, builtin_tasks};
