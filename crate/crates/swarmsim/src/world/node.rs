//! Nodes, their positions, and the topology container the models query.

use std::fmt;

use crate::world::processor::{ProcessorSlot, ProcessorState};
use crate::world::tags::TagMap;

/// A point in space, in units of the nodes' communication range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    /// Planar position with z = 0, the common case.
    pub fn planar(x: f64, y: f64) -> Self {
        Position { x, y, z: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance_squared(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(&self, other: &Position) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

/// Dense node identifier: ids are assigned 0, 1, 2, ... in insertion order
/// and never reused within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(value: u32) -> Self {
        NodeId(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node state derived from its processors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    Active,
    Sleeping,
    Inactive,
}

/// A positioned entity hosting processors and tags. Positions are fixed
/// after world construction; there is no mobility.
pub struct Node {
    id: NodeId,
    position: Position,
    pub(crate) slots: Vec<ProcessorSlot>,
    tags: TagMap,
}

impl Node {
    pub(crate) fn new(id: NodeId, position: Position) -> Self {
        Node {
            id,
            position,
            slots: Vec::new(),
            tags: TagMap::new(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn position(&self) -> Position {
        self.position
    }

    pub fn tags(&self) -> &TagMap {
        &self.tags
    }

    pub fn tags_mut(&mut self) -> &mut TagMap {
        &mut self.tags
    }

    pub fn processor_count(&self) -> usize {
        self.slots.len()
    }

    pub fn processor_state(&self, index: usize) -> Option<ProcessorState> {
        self.slots.get(index).map(|s| s.state)
    }

    /// Active if any processor is Active, else Sleeping if any is Sleeping,
    /// else Inactive. A node without processors is Inactive.
    pub fn state(&self) -> NodeState {
        let mut sleeping = false;
        for slot in &self.slots {
            match slot.state {
                ProcessorState::Active => return NodeState::Active,
                ProcessorState::Sleeping => sleeping = true,
                ProcessorState::Inactive => {}
            }
        }
        if sleeping {
            NodeState::Sleeping
        } else {
            NodeState::Inactive
        }
    }
}

/// The node set plus the world's nominal extent. This is the read-only view
/// the models operate on.
pub struct Topology {
    nodes: Vec<Node>,
    size_hint: (f64, f64),
}

impl Topology {
    pub(crate) fn new(size_hint: (f64, f64)) -> Self {
        Topology {
            nodes: Vec::new(),
            size_hint,
        }
    }

    pub(crate) fn push(&mut self, node: Node) {
        self.nodes.push(node);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn size_hint(&self) -> (f64, f64) {
        self.size_hint
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Option<&mut Node> {
        self.nodes.get_mut(id.index())
    }

    pub fn position(&self, id: NodeId) -> Option<Position> {
        self.nodes.get(id.index()).map(|n| n.position)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }
}
