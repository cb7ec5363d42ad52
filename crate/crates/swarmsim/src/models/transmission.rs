//! Transmission models decide the fate of each individual message: who of
//! the sender's neighbors receives it, when, and with what content. They may
//! drop, delay, or deliver altered per-receiver copies; the receiver set is
//! always a subset of the sender's neighbors at send time.

use std::rc::Rc;

use crate::models::communication::CommunicationModel;
use crate::models::edge::EdgeModel;
use crate::models::random::RandomVariable;
use crate::sequencer::metrics::Metrics;
use crate::sequencer::scheduler::{EventAction, EventScheduler};
use crate::world::{MessageEnvelope, NodeId, Topology, WorldError};

/// Everything a transmission model needs to route one message.
pub struct TransmitContext<'a> {
    pub topology: &'a Topology,
    pub comm: &'a dyn CommunicationModel,
    pub edge: &'a mut dyn EdgeModel,
    pub scheduler: &'a mut EventScheduler,
    pub metrics: &'a mut Metrics,
}

pub trait TransmissionModel {
    fn name(&self) -> &'static str;

    /// Schedules the delivery events for `envelope` and returns how many
    /// receivers were scheduled. Dropped receivers are counted into
    /// `metrics.messages_dropped`.
    fn transmit(
        &mut self,
        envelope: MessageEnvelope,
        ctx: &mut TransmitContext<'_>,
    ) -> Result<u64, WorldError>;
}

/// All deliveries happen exactly one round after sending.
fn next_round_time(envelope: &MessageEnvelope) -> f64 {
    (envelope.send_round + 1) as f64
}

/// Delivers to every neighbor at the next round, without loss.
pub struct ReliableTransmission;

impl TransmissionModel for ReliableTransmission {
    fn name(&self) -> &'static str {
        "reliable"
    }

    fn transmit(
        &mut self,
        envelope: MessageEnvelope,
        ctx: &mut TransmitContext<'_>,
    ) -> Result<u64, WorldError> {
        let receivers: Vec<NodeId> = ctx
            .edge
            .neighbors(envelope.sender, ctx.topology, ctx.comm)?
            .to_vec();
        let count = receivers.len() as u64;
        if count > 0 {
            let time = next_round_time(&envelope);
            ctx.scheduler.schedule(
                time,
                EventAction::Deliver {
                    envelope: Rc::new(envelope),
                    receivers,
                },
            )?;
        }
        Ok(count)
    }
}

/// Drops each receiver independently with probability `p`; survivors get the
/// message at the next round.
pub struct RandomDropTransmission {
    drop: RandomVariable,
}

impl RandomDropTransmission {
    pub fn new(p: f64, rng: rand_chacha::ChaCha8Rng) -> Result<Self, crate::models::ModelError> {
        Ok(RandomDropTransmission {
            drop: RandomVariable::bernoulli(p, rng)?,
        })
    }
}

impl TransmissionModel for RandomDropTransmission {
    fn name(&self) -> &'static str {
        "random_drop"
    }

    fn transmit(
        &mut self,
        envelope: MessageEnvelope,
        ctx: &mut TransmitContext<'_>,
    ) -> Result<u64, WorldError> {
        let neighbors = ctx
            .edge
            .neighbors(envelope.sender, ctx.topology, ctx.comm)?;
        let mut receivers = Vec::new();
        let mut dropped = 0;
        for &u in neighbors {
            if self.drop.sample() == 1.0 {
                dropped += 1;
            } else {
                receivers.push(u);
            }
        }
        ctx.metrics.messages_dropped += dropped;
        let count = receivers.len() as u64;
        if count > 0 {
            let time = next_round_time(&envelope);
            ctx.scheduler.schedule(
                time,
                EventAction::Deliver {
                    envelope: Rc::new(envelope),
                    receivers,
                },
            )?;
        }
        Ok(count)
    }
}

/// Adds a per-receiver delay, sampled from a random variable, to the base
/// next-round delivery time. Negative samples clamp to zero so delivery
/// never precedes the reliable baseline.
pub struct DelayTransmission {
    delay: RandomVariable,
}

impl DelayTransmission {
    pub fn new(delay: RandomVariable) -> Self {
        DelayTransmission { delay }
    }
}

impl TransmissionModel for DelayTransmission {
    fn name(&self) -> &'static str {
        "delay"
    }

    fn transmit(
        &mut self,
        envelope: MessageEnvelope,
        ctx: &mut TransmitContext<'_>,
    ) -> Result<u64, WorldError> {
        let receivers: Vec<NodeId> = ctx
            .edge
            .neighbors(envelope.sender, ctx.topology, ctx.comm)?
            .to_vec();
        let base = next_round_time(&envelope);
        let count = receivers.len() as u64;
        let shared = Rc::new(envelope);
        for receiver in receivers {
            let time = base + self.delay.sample().max(0.0);
            ctx.scheduler.schedule(
                time,
                EventAction::Deliver {
                    envelope: shared.clone(),
                    receivers: vec![receiver],
                },
            )?;
        }
        Ok(count)
    }
}
