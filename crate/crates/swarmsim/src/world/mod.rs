//! The simulation environment: one world instance holds all nodes of a run,
//! their processors and tags, the pending events, and the active model set.

mod context;
mod message;
mod node;
mod processor;
mod snapshot;
mod tags;

use std::rc::Rc;

use thiserror::Error;

use crate::models::{ModelError, ModelSet, TransmitContext};
use crate::sequencer::metrics::Metrics;
use crate::sequencer::scheduler::{
    EventAction, EventHandle, EventScheduler, SchedulerError, DEFAULT_EVENT_CAP,
};

pub use context::NodeContext;
pub use message::{MessageEnvelope, Payload};
pub use node::{Node, NodeId, NodeState, Position, Topology};
pub use processor::{Processor, ProcessorState, Transition};
pub use snapshot::SnapshotError;
pub use tags::{TagEntry, TagMap, TagValue};

pub(crate) use processor::ProcessorSlot;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not active")]
    SenderInactive(NodeId),
    #[error("nodes cannot be added or altered after the simulation has started")]
    AddAfterStart,
    #[error("position coordinates must be finite")]
    NonFinitePosition,
    #[error("node {node} has no processor {index}")]
    UnknownProcessor { node: NodeId, index: usize },
    #[error("illegal processor transition {from:?} -> {to:?}")]
    IllegalTransition {
        from: ProcessorState,
        to: ProcessorState,
    },
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Counts reported by one `step_round` call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundReport {
    /// Per-receiver deliveries executed during the round.
    pub deliveries: u64,
    /// Nodes on which at least one processor did work.
    pub worked: u64,
}

/// The world. Everything it owns is confined to a single execution context;
/// none of its operations may be invoked concurrently. Run several
/// independent worlds for parallelism.
pub struct World {
    pub(crate) topology: Topology,
    global_tags: TagMap,
    round: u64,
    models: ModelSet,
    scheduler: EventScheduler,
    metrics: Metrics,
    started: bool,
    max_rounds: Option<u64>,
    event_cap: u64,
    /// Node whose processor callback is currently running; that node counts
    /// as an eligible sender even though its processors are checked out.
    active_callback_node: Option<NodeId>,
}

impl std::fmt::Debug for World {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("World")
            .field("nodes", &self.topology.len())
            .field("round", &self.round)
            .field("started", &self.started)
            .field("size_hint", &self.topology.size_hint())
            .finish_non_exhaustive()
    }
}

impl World {
    pub fn new(models: ModelSet, size_hint: (f64, f64)) -> Self {
        World {
            topology: Topology::new(size_hint),
            global_tags: TagMap::new(),
            round: 0,
            models,
            scheduler: EventScheduler::new(),
            metrics: Metrics::default(),
            started: false,
            max_rounds: None,
            event_cap: DEFAULT_EVENT_CAP,
            active_callback_node: None,
        }
    }

    pub(crate) fn from_parts(models: ModelSet, topology: Topology, round: u64) -> Self {
        let mut scheduler = EventScheduler::new();
        // Keep the clock in step with the restored round counter.
        scheduler.finish_horizon(round as f64);
        World {
            started: round > 0,
            topology,
            global_tags: TagMap::new(),
            round,
            models,
            scheduler,
            metrics: Metrics::default(),
            max_rounds: None,
            event_cap: DEFAULT_EVENT_CAP,
            active_callback_node: None,
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn started(&self) -> bool {
        self.started
    }

    pub fn node_count(&self) -> usize {
        self.topology.len()
    }

    pub fn size_hint(&self) -> (f64, f64) {
        self.topology.size_hint()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.topology.node(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.topology.iter()
    }

    pub fn models(&self) -> &ModelSet {
        &self.models
    }

    pub fn models_mut(&mut self) -> &mut ModelSet {
        &mut self.models
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut Metrics {
        &mut self.metrics
    }

    pub fn global_tags(&self) -> &TagMap {
        &self.global_tags
    }

    pub fn global_tags_mut(&mut self) -> &mut TagMap {
        &mut self.global_tags
    }

    pub fn max_rounds(&self) -> Option<u64> {
        self.max_rounds
    }

    pub fn set_max_rounds(&mut self, max_rounds: Option<u64>) {
        self.max_rounds = max_rounds;
    }

    /// Cap on events executed per `advance_until` call; guards event loops.
    pub fn set_event_cap(&mut self, cap: u64) {
        self.event_cap = cap;
    }

    pub fn scheduler(&self) -> &EventScheduler {
        &self.scheduler
    }

    /// Registers a node. The node set is fixed once the simulation starts so
    /// the edge-model caches stay coherent.
    pub fn add_node(
        &mut self,
        position: Position,
        processors: Vec<Box<dyn Processor>>,
    ) -> Result<NodeId, WorldError> {
        if self.started {
            return Err(WorldError::AddAfterStart);
        }
        if !position.is_finite() {
            return Err(WorldError::NonFinitePosition);
        }
        let id = NodeId::new(self.topology.len() as u32);
        let mut node = Node::new(id, position);
        node.slots = processors.into_iter().map(ProcessorSlot::new).collect();
        self.topology.push(node);
        self.models.edge.topology_changed();
        Ok(id)
    }

    /// Attaches another processor to an existing node, before the run starts.
    pub fn attach_processor(
        &mut self,
        node: NodeId,
        processor: Box<dyn Processor>,
    ) -> Result<(), WorldError> {
        if self.started {
            return Err(WorldError::AddAfterStart);
        }
        let node = self
            .topology
            .node_mut(node)
            .ok_or(WorldError::UnknownNode(node))?;
        node.slots.push(ProcessorSlot::new(processor));
        Ok(())
    }

    /// Externally transitions one processor, e.g. a task waking a sleeper.
    pub fn set_processor_state(
        &mut self,
        node: NodeId,
        index: usize,
        state: ProcessorState,
    ) -> Result<(), WorldError> {
        let node_ref = self
            .topology
            .node_mut(node)
            .ok_or(WorldError::UnknownNode(node))?;
        let slot = node_ref
            .slots
            .get_mut(index)
            .ok_or(WorldError::UnknownProcessor { node, index })?;
        if !slot.state.can_transition_to(state) {
            return Err(WorldError::IllegalTransition {
                from: slot.state,
                to: state,
            });
        }
        slot.state = state;
        Ok(())
    }

    /// Broadcasts a message from `sender`. The active transmission model
    /// decides the receivers and schedules their delivery events; one call
    /// counts as one sent message regardless of receiver count.
    pub fn send_message(
        &mut self,
        sender: NodeId,
        payload: Payload,
        size_bytes: u64,
    ) -> Result<(), WorldError> {
        let node = self
            .topology
            .node(sender)
            .ok_or(WorldError::UnknownNode(sender))?;
        // A node whose callback is running has its processors checked out,
        // which would make it look Inactive; it is Active by construction.
        if self.active_callback_node != Some(sender) && node.state() != NodeState::Active {
            return Err(WorldError::SenderInactive(sender));
        }
        let envelope = MessageEnvelope {
            sender,
            send_round: self.round,
            payload,
            size_bytes,
        };
        self.metrics.messages_sent += 1;
        self.metrics.payload_bytes_sent += size_bytes;
        let ModelSet {
            communication,
            edge,
            transmission,
            ..
        } = &mut self.models;
        let mut ctx = TransmitContext {
            topology: &self.topology,
            comm: communication.as_ref(),
            edge: edge.as_mut(),
            scheduler: &mut self.scheduler,
            metrics: &mut self.metrics,
        };
        transmission.transmit(envelope, &mut ctx)?;
        Ok(())
    }

    /// Neighbor set of `v` per the active edge model.
    pub fn neighbors(&mut self, v: NodeId) -> Result<Vec<NodeId>, WorldError> {
        let ModelSet {
            communication,
            edge,
            ..
        } = &mut self.models;
        Ok(edge
            .neighbors(v, &self.topology, communication.as_ref())?
            .to_vec())
    }

    pub fn can_communicate(&self, u: NodeId, v: NodeId) -> Result<bool, WorldError> {
        Ok(self
            .models
            .communication
            .can_communicate(&self.topology, u, v)?)
    }

    pub fn estimate_distance(&mut self, u: NodeId, v: NodeId) -> Result<Option<f64>, WorldError> {
        let ModelSet {
            communication,
            distance_estimate,
            ..
        } = &mut self.models;
        Ok(distance_estimate.estimate(&self.topology, communication.as_ref(), u, v)?)
    }

    /// Schedules arbitrary code at an absolute simulation time.
    pub fn schedule_at(
        &mut self,
        time: f64,
        callback: impl FnOnce(&mut World) + 'static,
    ) -> Result<EventHandle, WorldError> {
        Ok(self
            .scheduler
            .schedule(time, EventAction::Call(Box::new(callback)))?)
    }

    /// True if the event was pending and is now removed.
    pub fn cancel_event(&mut self, handle: EventHandle) -> bool {
        self.scheduler.cancel(handle)
    }

    /// Executes every pending event with time below `horizon` in
    /// (time, sequence) order, then advances the clock to `horizon`.
    /// Handlers may schedule further events; those below the horizon run in
    /// this same call.
    pub fn advance_until(&mut self, horizon: f64) -> Result<u64, WorldError> {
        let current = self.scheduler.current_time();
        if horizon.is_nan() || horizon < current {
            return Err(SchedulerError::TimeInPast {
                requested: horizon,
                current,
            }
            .into());
        }
        let mut executed: u64 = 0;
        while let Some(event) = self.scheduler.pop_due(horizon) {
            executed += 1;
            if executed > self.event_cap {
                return Err(SchedulerError::RunawayEvents {
                    executed,
                    cap: self.event_cap,
                }
                .into());
            }
            match event.action {
                EventAction::Deliver {
                    envelope,
                    receivers,
                } => self.deliver(envelope, receivers),
                EventAction::Call(callback) => callback(self),
            }
        }
        self.scheduler.finish_horizon(horizon);
        Ok(executed)
    }

    /// Runs one simulation round: first all events of the round's time
    /// interval in (time, sequence) order, then `work` on every Active
    /// processor in ascending node order, then the round counter advances.
    pub fn step_round(&mut self) -> Result<RoundReport, WorldError> {
        self.ensure_started();
        let delivered_before = self.metrics.messages_delivered;
        self.advance_until((self.round + 1) as f64)?;
        let worked = self.run_work_phase();
        self.round += 1;
        self.metrics.rounds_executed += 1;
        self.sample_adjacency();
        Ok(RoundReport {
            deliveries: self.metrics.messages_delivered - delivered_before,
            worked,
        })
    }

    /// True once every processor of every node is Inactive, or the
    /// configured round limit has been reached.
    pub fn is_done(&self) -> bool {
        if let Some(max) = self.max_rounds {
            if self.round >= max {
                return true;
            }
        }
        self.topology
            .iter()
            .all(|node| node.state() == NodeState::Inactive)
    }

    /// Marks the simulation as started and boots every processor exactly
    /// once. Runs implicitly on the first `step_round`.
    fn ensure_started(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        for index in 0..self.topology.len() {
            let id = NodeId::new(index as u32);
            self.with_checked_out_slots(id, |world, slots| {
                for slot in slots.iter_mut() {
                    if !slot.booted && slot.state != ProcessorState::Inactive {
                        slot.booted = true;
                        let transition = slot.behavior.boot(&mut NodeContext { world, node: id });
                        slot.apply(transition);
                    }
                }
            });
        }
        self.sample_adjacency();
    }

    fn sample_adjacency(&mut self) {
        self.metrics
            .record_adjacency_entries(self.models.edge.adjacency_entries());
    }

    /// Temporarily moves a node's processors out so their callbacks can take
    /// `&mut World` without aliasing the slot storage.
    fn with_checked_out_slots(
        &mut self,
        id: NodeId,
        run: impl FnOnce(&mut World, &mut Vec<ProcessorSlot>),
    ) {
        let mut slots = match self.topology.node_mut(id) {
            Some(node) => std::mem::take(&mut node.slots),
            None => return,
        };
        let previous = self.active_callback_node.replace(id);
        run(self, &mut slots);
        self.active_callback_node = previous;
        self.topology
            .node_mut(id)
            .expect("node set is append-only")
            .slots = slots;
    }

    fn deliver(&mut self, envelope: Rc<MessageEnvelope>, receivers: Vec<NodeId>) {
        for receiver in receivers {
            self.metrics.messages_delivered += 1;
            self.with_checked_out_slots(receiver, |world, slots| {
                for slot in slots.iter_mut() {
                    if slot.state == ProcessorState::Active {
                        let transition = slot.behavior.process_message(
                            &mut NodeContext {
                                world,
                                node: receiver,
                            },
                            &envelope,
                        );
                        slot.apply(transition);
                    }
                }
            });
        }
    }

    fn run_work_phase(&mut self) -> u64 {
        let mut worked = 0;
        for index in 0..self.topology.len() {
            let id = NodeId::new(index as u32);
            let mut node_worked = false;
            self.with_checked_out_slots(id, |world, slots| {
                for slot in slots.iter_mut() {
                    if slot.state == ProcessorState::Active {
                        let transition = slot.behavior.work(&mut NodeContext { world, node: id });
                        slot.apply(transition);
                        node_worked = true;
                    }
                }
            });
            if node_worked {
                worked += 1;
            }
        }
        worked
    }

    /// Sets a tag on a node.
    pub fn set_node_tag(
        &mut self,
        id: NodeId,
        key: impl Into<String>,
        value: TagValue,
        persistent: bool,
    ) -> Result<(), WorldError> {
        self.topology
            .node_mut(id)
            .ok_or(WorldError::UnknownNode(id))?
            .tags_mut()
            .set(key, value, persistent);
        Ok(())
    }

    pub fn node_tag(&self, id: NodeId, key: &str) -> Result<Option<&TagValue>, WorldError> {
        Ok(self
            .topology
            .node(id)
            .ok_or(WorldError::UnknownNode(id))?
            .tags()
            .get(key))
    }
}
