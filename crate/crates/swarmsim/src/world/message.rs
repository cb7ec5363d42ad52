//! Messages exchanged between nodes.

use crate::world::node::NodeId;

/// Application payload: opaque bytes plus a type tag chosen by the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub kind: String,
    pub bytes: Vec<u8>,
}

impl Payload {
    pub fn new(kind: impl Into<String>, bytes: Vec<u8>) -> Self {
        Payload {
            kind: kind.into(),
            bytes,
        }
    }

    pub fn empty(kind: impl Into<String>) -> Self {
        Payload::new(kind, Vec::new())
    }
}

/// A sent message as the transmission model sees it. The payload is immutable
/// once sent; per-receiver alteration happens on copies.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageEnvelope {
    pub sender: NodeId,
    /// World round during which the sender invoked `send_message`.
    pub send_round: u64,
    pub payload: Payload,
    /// Accounted size of the message, for the byte metrics. Independent of
    /// the actual encoded payload length.
    pub size_bytes: u64,
}
