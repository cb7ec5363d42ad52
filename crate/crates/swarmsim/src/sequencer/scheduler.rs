//! Discrete-event queue ordered by (time, sequence).
//!
//! Events can be scheduled for arbitrary points in simulation time. Two
//! events never compare equal: ties in time are broken by the monotonically
//! increasing sequence number assigned at scheduling, so execution order is
//! a total order and replays are deterministic.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use crate::world::{MessageEnvelope, NodeId, World};

/// Default cap on events executed within one `advance_until` call. Guards
/// against handlers that keep rescheduling at the same instant.
pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

pub type EventCallback = Box<dyn FnOnce(&mut World)>;

/// What happens when an event fires.
pub enum EventAction {
    /// Deliver one message to a set of receivers. The receiver list was
    /// fixed by the transmission model at send time; each entry counts as
    /// one delivery.
    Deliver {
        envelope: Rc<MessageEnvelope>,
        receivers: Vec<NodeId>,
    },
    /// Arbitrary code with full world access.
    Call(EventCallback),
}

/// Opaque id for cancelling a scheduled event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

pub struct Event {
    pub time: f64,
    pub sequence: u64,
    pub action: EventAction,
}

impl Event {
    pub fn handle(&self) -> EventHandle {
        EventHandle(self.sequence)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SchedulerError {
    #[error("event time {requested} is before current time {current}")]
    TimeInPast { requested: f64, current: f64 },
    #[error("runaway event guard tripped after {executed} events (cap {cap})")]
    RunawayEvents { executed: u64, cap: u64 },
}

struct HeapEntry(Event);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.sequence == other.0.sequence
    }
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the earliest event on top.
        other
            .0
            .time
            .total_cmp(&self.0.time)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority queue of pending events plus the current simulation time.
pub struct EventScheduler {
    heap: BinaryHeap<HeapEntry>,
    current_time: f64,
    next_sequence: u64,
    pending: HashSet<u64>,
    cancelled: HashSet<u64>,
}

impl Default for EventScheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl EventScheduler {
    pub fn new() -> Self {
        EventScheduler {
            heap: BinaryHeap::new(),
            current_time: 0.0,
            next_sequence: 0,
            pending: HashSet::new(),
            cancelled: HashSet::new(),
        }
    }

    /// Current simulation time. Non-decreasing.
    pub fn current_time(&self) -> f64 {
        self.current_time
    }

    /// Number of events still pending.
    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Enqueues an event. `time` must not lie in the past of the scheduler.
    pub fn schedule(
        &mut self,
        time: f64,
        action: EventAction,
    ) -> Result<EventHandle, SchedulerError> {
        if time.is_nan() || time < self.current_time {
            return Err(SchedulerError::TimeInPast {
                requested: time,
                current: self.current_time,
            });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.pending.insert(sequence);
        self.heap.push(HeapEntry(Event {
            time,
            sequence,
            action,
        }));
        Ok(EventHandle(sequence))
    }

    /// Removes a pending event. Returns false if the event already executed,
    /// was already cancelled, or the handle is unknown.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if self.pending.remove(&handle.0) {
            self.cancelled.insert(handle.0);
            true
        } else {
            false
        }
    }

    /// Pops the next event with time strictly below `horizon`, advancing
    /// current time to the event's time. Cancelled entries are skipped.
    pub fn pop_due(&mut self, horizon: f64) -> Option<Event> {
        loop {
            let top_time = self.heap.peek()?.0.time;
            if horizon.is_nan() || top_time >= horizon {
                return None;
            }
            let event = self.heap.pop().expect("peeked entry exists").0;
            if self.cancelled.remove(&event.sequence) {
                continue;
            }
            self.pending.remove(&event.sequence);
            self.current_time = event.time;
            return Some(event);
        }
    }

    /// Advances current time to `horizon` once all due events have been
    /// drained via [`pop_due`](Self::pop_due).
    pub fn finish_horizon(&mut self, horizon: f64) {
        if horizon > self.current_time {
            self.current_time = horizon;
        }
    }
}
