//! Edge models expose the network as a graph by answering neighbor queries.
//!
//! All implementations return exactly `{ u != v : can_communicate(u, v) }`;
//! they differ only in how much of that answer they keep in memory:
//!
//! * `list`   - caches every neighborhood, answers from the cache
//! * `simple` - caches nothing, recomputes per query via the spatial grid
//! * `cached` - keeps an LRU cache of at most `k` neighborhoods

use std::collections::{BTreeMap, HashMap};

use crate::models::communication::CommunicationModel;
use crate::models::grid::SpatialGrid;
use crate::models::ModelError;
use crate::world::{NodeId, Topology};

pub trait EdgeModel {
    fn name(&self) -> &'static str;

    /// Invalidates internal structures after the node set changed.
    fn topology_changed(&mut self);

    /// The exact neighbor set of `v`, in a deterministic order.
    fn neighbors(
        &mut self,
        v: NodeId,
        topology: &Topology,
        comm: &dyn CommunicationModel,
    ) -> Result<&[NodeId], ModelError>;

    /// Adjacency entries currently held in persistent caches. This is the
    /// memory-side metric of the cache-versus-recompute trade.
    fn adjacency_entries(&self) -> u64;
}

/// Candidate index shared by the implementations: a spatial grid when the
/// communication model is range-bounded, otherwise a full scan.
struct CandidateIndex {
    grid: Option<SpatialGrid>,
    ready: bool,
}

impl CandidateIndex {
    fn new() -> Self {
        CandidateIndex {
            grid: None,
            ready: false,
        }
    }

    fn invalidate(&mut self) {
        self.ready = false;
        self.grid = None;
    }

    fn ensure(&mut self, topology: &Topology, comm: &dyn CommunicationModel) {
        if !self.ready {
            self.grid = comm.max_range().map(|r| SpatialGrid::build(topology, r));
            self.ready = true;
        }
    }

    /// Computes the neighbor set of `v` into `out`.
    fn neighbors_into(
        &mut self,
        v: NodeId,
        topology: &Topology,
        comm: &dyn CommunicationModel,
        out: &mut Vec<NodeId>,
    ) -> Result<(), ModelError> {
        out.clear();
        let position = topology.position(v).ok_or(ModelError::UnknownNode(v))?;
        self.ensure(topology, comm);
        match &self.grid {
            Some(grid) => {
                let mut connected = Ok(());
                grid.for_candidates(position, |u| {
                    if connected.is_err() {
                        return;
                    }
                    match comm.can_communicate(topology, u, v) {
                        Ok(true) => out.push(u),
                        Ok(false) => {}
                        Err(e) => connected = Err(e),
                    }
                });
                connected?;
            }
            None => {
                for u in topology.ids() {
                    if comm.can_communicate(topology, u, v)? {
                        out.push(u);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Full adjacency cache in CSR layout. Built lazily on first query.
pub struct ListEdge {
    index: CandidateIndex,
    offsets: Vec<usize>,
    data: Vec<NodeId>,
    built: bool,
}

impl Default for ListEdge {
    fn default() -> Self {
        Self::new()
    }
}

impl ListEdge {
    pub fn new() -> Self {
        ListEdge {
            index: CandidateIndex::new(),
            offsets: Vec::new(),
            data: Vec::new(),
            built: false,
        }
    }

    fn ensure_built(
        &mut self,
        topology: &Topology,
        comm: &dyn CommunicationModel,
    ) -> Result<(), ModelError> {
        if self.built {
            return Ok(());
        }
        self.offsets.clear();
        self.data.clear();
        self.offsets.reserve(topology.len() + 1);
        self.offsets.push(0);
        let mut scratch = Vec::new();
        for v in topology.ids() {
            self.index.neighbors_into(v, topology, comm, &mut scratch)?;
            self.data.extend_from_slice(&scratch);
            self.offsets.push(self.data.len());
        }
        self.built = true;
        Ok(())
    }
}

impl EdgeModel for ListEdge {
    fn name(&self) -> &'static str {
        "list"
    }

    fn topology_changed(&mut self) {
        self.built = false;
        self.offsets.clear();
        self.data.clear();
        self.index.invalidate();
    }

    fn neighbors(
        &mut self,
        v: NodeId,
        topology: &Topology,
        comm: &dyn CommunicationModel,
    ) -> Result<&[NodeId], ModelError> {
        if !topology.contains(v) {
            return Err(ModelError::UnknownNode(v));
        }
        self.ensure_built(topology, comm)?;
        let i = v.index();
        Ok(&self.data[self.offsets[i]..self.offsets[i + 1]])
    }

    fn adjacency_entries(&self) -> u64 {
        self.data.len() as u64
    }
}

/// No caching at all: every query recomputes the neighborhood by scanning
/// the grid cells around the node.
pub struct SimpleEdge {
    index: CandidateIndex,
    scratch: Vec<NodeId>,
}

impl Default for SimpleEdge {
    fn default() -> Self {
        Self::new()
    }
}

impl SimpleEdge {
    pub fn new() -> Self {
        SimpleEdge {
            index: CandidateIndex::new(),
            scratch: Vec::new(),
        }
    }
}

impl EdgeModel for SimpleEdge {
    fn name(&self) -> &'static str {
        "simple"
    }

    fn topology_changed(&mut self) {
        self.index.invalidate();
    }

    fn neighbors(
        &mut self,
        v: NodeId,
        topology: &Topology,
        comm: &dyn CommunicationModel,
    ) -> Result<&[NodeId], ModelError> {
        let mut scratch = std::mem::take(&mut self.scratch);
        let result = self.index.neighbors_into(v, topology, comm, &mut scratch);
        self.scratch = scratch;
        result?;
        Ok(&self.scratch)
    }

    fn adjacency_entries(&self) -> u64 {
        0
    }
}

struct CachedEntry {
    neighbors: Vec<NodeId>,
    stamp: u64,
}

/// Bounded cache: keeps the `k` most recently used neighborhoods.
pub struct CachedEdge {
    capacity: usize,
    index: CandidateIndex,
    cache: HashMap<NodeId, CachedEntry>,
    by_stamp: BTreeMap<u64, NodeId>,
    clock: u64,
    entries: u64,
}

impl CachedEdge {
    pub const DEFAULT_CAPACITY: usize = 1024;

    pub fn new(capacity: usize) -> Result<Self, ModelError> {
        if capacity == 0 {
            return Err(ModelError::InvalidParameter {
                key: "k".to_string(),
                reason: "cache capacity must be positive".to_string(),
            });
        }
        Ok(CachedEdge {
            capacity,
            index: CandidateIndex::new(),
            cache: HashMap::new(),
            by_stamp: BTreeMap::new(),
            clock: 0,
            entries: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

impl EdgeModel for CachedEdge {
    fn name(&self) -> &'static str {
        "cached"
    }

    fn topology_changed(&mut self) {
        self.cache.clear();
        self.by_stamp.clear();
        self.entries = 0;
        self.index.invalidate();
    }

    fn neighbors(
        &mut self,
        v: NodeId,
        topology: &Topology,
        comm: &dyn CommunicationModel,
    ) -> Result<&[NodeId], ModelError> {
        if !topology.contains(v) {
            return Err(ModelError::UnknownNode(v));
        }
        self.clock += 1;
        if let Some(entry) = self.cache.get_mut(&v) {
            self.by_stamp.remove(&entry.stamp);
            entry.stamp = self.clock;
            self.by_stamp.insert(self.clock, v);
            return Ok(&self.cache[&v].neighbors);
        }
        let mut neighbors = Vec::new();
        self.index
            .neighbors_into(v, topology, comm, &mut neighbors)?;
        if self.cache.len() == self.capacity {
            let (_, oldest) = self.by_stamp.pop_first().expect("cache is non-empty");
            let evicted = self.cache.remove(&oldest).expect("stamp index in sync");
            self.entries -= evicted.neighbors.len() as u64;
        }
        self.entries += neighbors.len() as u64;
        self.by_stamp.insert(self.clock, v);
        self.cache.insert(
            v,
            CachedEntry {
                neighbors,
                stamp: self.clock,
            },
        );
        Ok(&self.cache[&v].neighbors)
    }

    fn adjacency_entries(&self) -> u64 {
        self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::communication::DiscGraph;
    use crate::world::{Node, Position};

    fn topo(positions: &[(f64, f64)]) -> Topology {
        let mut t = Topology::new((10.0, 10.0));
        for (i, &(x, y)) in positions.iter().enumerate() {
            t.push(Node::new(NodeId::new(i as u32), Position::planar(x, y)));
        }
        t
    }

    fn ids(neighbors: &[NodeId]) -> Vec<u32> {
        let mut v: Vec<u32> = neighbors.iter().map(|n| n.value()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn collinear_nodes() {
        let t = topo(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let comm = DiscGraph::new(1.0).unwrap();
        for model in [
            &mut ListEdge::new() as &mut dyn EdgeModel,
            &mut SimpleEdge::new(),
            &mut CachedEdge::new(2).unwrap(),
        ] {
            assert_eq!(
                ids(model.neighbors(NodeId::new(1), &t, &comm).unwrap()),
                [0, 2]
            );
            assert_eq!(
                ids(model.neighbors(NodeId::new(0), &t, &comm).unwrap()),
                [1]
            );
        }
    }

    #[test]
    fn unknown_node() {
        let t = topo(&[(0.0, 0.0)]);
        let comm = DiscGraph::new(1.0).unwrap();
        let mut model = ListEdge::new();
        assert!(matches!(
            model.neighbors(NodeId::new(3), &t, &comm),
            Err(ModelError::UnknownNode(_))
        ));
    }

    #[test]
    fn adjacency_entry_accounting() {
        let t = topo(&[(0.0, 0.0), (0.5, 0.0), (0.9, 0.0), (5.0, 5.0)]);
        let comm = DiscGraph::new(1.0).unwrap();

        let mut list = ListEdge::new();
        list.neighbors(NodeId::new(0), &t, &comm).unwrap();
        // 0-1, 0-2, 1-2 both directions: 6 entries; node 3 isolated.
        assert_eq!(list.adjacency_entries(), 6);

        let mut simple = SimpleEdge::new();
        simple.neighbors(NodeId::new(0), &t, &comm).unwrap();
        assert_eq!(simple.adjacency_entries(), 0);
    }

    #[test]
    fn cached_evicts_least_recently_used() {
        let t = topo(&[(0.0, 0.0), (0.5, 0.0), (0.9, 0.0), (5.0, 5.0)]);
        let comm = DiscGraph::new(1.0).unwrap();
        let mut cached = CachedEdge::new(2).unwrap();
        cached.neighbors(NodeId::new(0), &t, &comm).unwrap();
        cached.neighbors(NodeId::new(1), &t, &comm).unwrap();
        // Touch 0 so that 1 is the LRU entry, then force an eviction.
        cached.neighbors(NodeId::new(0), &t, &comm).unwrap();
        cached.neighbors(NodeId::new(2), &t, &comm).unwrap();
        assert!(cached.cache.contains_key(&NodeId::new(0)));
        assert!(!cached.cache.contains_key(&NodeId::new(1)));
        assert!(cached.cache.contains_key(&NodeId::new(2)));
        assert_eq!(cached.cache.len(), 2);
        let expected: u64 = cached
            .cache
            .values()
            .map(|e| e.neighbors.len() as u64)
            .sum();
        assert_eq!(cached.adjacency_entries(), expected);
    }

    #[test]
    fn zero_capacity_is_rejected() {
        assert!(CachedEdge::new(0).is_err());
    }

    #[test]
    fn topology_change_invalidates_list_cache() {
        let mut t = topo(&[(0.0, 0.0), (0.5, 0.0)]);
        let comm = DiscGraph::new(1.0).unwrap();
        let mut list = ListEdge::new();
        assert_eq!(ids(list.neighbors(NodeId::new(0), &t, &comm).unwrap()), [1]);
        t.push(Node::new(NodeId::new(2), Position::planar(0.2, 0.0)));
        list.topology_changed();
        assert_eq!(
            ids(list.neighbors(NodeId::new(0), &t, &comm).unwrap()),
            [1, 2]
        );
    }
}
