//! The view of the world a processor gets during its callbacks.

use crate::world::message::Payload;
use crate::world::node::{NodeId, Position};
use crate::world::tags::TagValue;
use crate::world::{World, WorldError};

/// Handle passed into processor callbacks. Restricts world access to what a
/// node may legitimately do: talk to its neighborhood and keep state in
/// tags.
pub struct NodeContext<'w> {
    pub(crate) world: &'w mut World,
    pub(crate) node: NodeId,
}

impl NodeContext<'_> {
    /// The node this processor lives on.
    pub fn node_id(&self) -> NodeId {
        self.node
    }

    pub fn round(&self) -> u64 {
        self.world.round()
    }

    pub fn position(&self) -> Position {
        self.world
            .topology()
            .position(self.node)
            .expect("context node exists")
    }

    /// Broadcasts a message; the active transmission model decides who of
    /// the neighbors receives it and when.
    pub fn send(&mut self, payload: Payload, size_bytes: u64) -> Result<(), WorldError> {
        self.world.send_message(self.node, payload, size_bytes)
    }

    /// The node's current neighbor set.
    pub fn neighbors(&mut self) -> Result<Vec<NodeId>, WorldError> {
        self.world.neighbors(self.node)
    }

    /// Estimated distance to another node, per the active distance model.
    pub fn estimate_distance(&mut self, other: NodeId) -> Result<Option<f64>, WorldError> {
        self.world.estimate_distance(self.node, other)
    }

    /// One draw from the world's default random variable.
    pub fn sample(&mut self) -> f64 {
        self.world.models_mut().random_variable.sample()
    }

    pub fn tag(&self, key: &str) -> Option<&TagValue> {
        self.world
            .topology()
            .node(self.node)
            .expect("context node exists")
            .tags()
            .get(key)
    }

    pub fn set_tag(&mut self, key: impl Into<String>, value: TagValue, persistent: bool) {
        self.world
            .topology
            .node_mut(self.node)
            .expect("context node exists")
            .tags_mut()
            .set(key, value, persistent);
    }

    pub fn world_tag(&self, key: &str) -> Option<&TagValue> {
        self.world.global_tags().get(key)
    }

    pub fn set_world_tag(&mut self, key: impl Into<String>, value: TagValue, persistent: bool) {
        self.world.global_tags_mut().set(key, value, persistent);
    }
}
