//! The per-node behavior unit: lifecycle states and the callback interface.

use crate::world::context::NodeContext;
use crate::world::message::MessageEnvelope;

/// Lifecycle state of a processor.
///
/// Legal transitions are Active <-> Sleeping, Active -> Inactive and
/// Sleeping -> Inactive. Inactive is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessorState {
    Active,
    Sleeping,
    Inactive,
}

impl ProcessorState {
    pub fn can_transition_to(self, to: ProcessorState) -> bool {
        use ProcessorState::*;
        match (self, to) {
            (a, b) if a == b => true,
            (Active, Sleeping) | (Active, Inactive) => true,
            (Sleeping, Active) | (Sleeping, Inactive) => true,
            (Inactive, _) => false,
            _ => false,
        }
    }
}

/// State change a processor requests when returning from a callback.
/// Callbacks only run on Active processors, so every variant is legal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// Remain Active.
    Stay,
    /// Go to Sleeping: no callbacks until something wakes the processor.
    Sleep,
    /// Go to Inactive, permanently.
    Terminate,
}

/// Behavior attached to a node. Processors process incoming messages, run
/// per-round work and emit messages through the [`NodeContext`].
///
/// The simulation guarantees that `boot` runs exactly once, before any other
/// callback, and that `process_message` and `work` are only invoked while
/// the processor is Active.
pub trait Processor {
    fn boot(&mut self, _ctx: &mut NodeContext<'_>) -> Transition {
        Transition::Stay
    }

    fn process_message(
        &mut self,
        _ctx: &mut NodeContext<'_>,
        _envelope: &MessageEnvelope,
    ) -> Transition {
        Transition::Stay
    }

    fn work(&mut self, _ctx: &mut NodeContext<'_>) -> Transition {
        Transition::Stay
    }
}

/// A processor plus the lifecycle bookkeeping the world keeps for it.
pub(crate) struct ProcessorSlot {
    pub(crate) state: ProcessorState,
    pub(crate) booted: bool,
    pub(crate) behavior: Box<dyn Processor>,
}

impl ProcessorSlot {
    pub(crate) fn new(behavior: Box<dyn Processor>) -> Self {
        ProcessorSlot {
            state: ProcessorState::Active,
            booted: false,
            behavior,
        }
    }

    pub(crate) fn apply(&mut self, transition: Transition) {
        self.state = match transition {
            Transition::Stay => self.state,
            Transition::Sleep => ProcessorState::Sleeping,
            Transition::Terminate => ProcessorState::Inactive,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::ProcessorState::*;

    #[test]
    fn inactive_is_absorbing() {
        assert!(!Inactive.can_transition_to(Active));
        assert!(!Inactive.can_transition_to(Sleeping));
        assert!(Inactive.can_transition_to(Inactive));
    }

    #[test]
    fn active_sleeping_transitions() {
        assert!(Active.can_transition_to(Sleeping));
        assert!(Sleeping.can_transition_to(Active));
        assert!(Active.can_transition_to(Inactive));
        assert!(Sleeping.can_transition_to(Inactive));
    }
}
