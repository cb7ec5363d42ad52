//! Communication models decide whether a pair of nodes can communicate at
//! all, as a matter of principle. Per-message behavior is the transmission
//! model's job.

use crate::models::ModelError;
use crate::world::{NodeId, Topology};

/// Predicate over node pairs. Implementations must be symmetric and
/// irreflexive: `can_communicate(u, v) == can_communicate(v, u)` and
/// `can_communicate(v, v) == false`.
pub trait CommunicationModel {
    fn name(&self) -> &'static str;

    fn can_communicate(
        &self,
        topology: &Topology,
        u: NodeId,
        v: NodeId,
    ) -> Result<bool, ModelError>;

    /// Upper bound on the distance at which two nodes can communicate, when
    /// one exists. Edge models use it to size their spatial index; `None`
    /// forces them onto the full-scan path.
    fn max_range(&self) -> Option<f64>;
}

/// Unit disk graph: two distinct nodes communicate iff their distance is at
/// most `range`. The boundary is inclusive: dist == range counts as
/// connected.
pub struct DiscGraph {
    range: f64,
    range_squared: f64,
}

impl DiscGraph {
    pub fn new(range: f64) -> Result<Self, ModelError> {
        if !range.is_finite() || range <= 0.0 {
            return Err(ModelError::InvalidParameter {
                key: "range".to_string(),
                reason: format!("must be a positive finite number, got {range}"),
            });
        }
        Ok(DiscGraph {
            range,
            range_squared: range * range,
        })
    }

    pub fn range(&self) -> f64 {
        self.range
    }
}

impl CommunicationModel for DiscGraph {
    fn name(&self) -> &'static str {
        "disc_graph"
    }

    fn can_communicate(
        &self,
        topology: &Topology,
        u: NodeId,
        v: NodeId,
    ) -> Result<bool, ModelError> {
        if u == v {
            // Check existence even for the trivial case.
            return if topology.contains(u) {
                Ok(false)
            } else {
                Err(ModelError::UnknownNode(u))
            };
        }
        let pu = topology.position(u).ok_or(ModelError::UnknownNode(u))?;
        let pv = topology.position(v).ok_or(ModelError::UnknownNode(v))?;
        Ok(pu.distance_squared(&pv) <= self.range_squared)
    }

    fn max_range(&self) -> Option<f64> {
        Some(self.range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Position;

    fn topo(positions: &[(f64, f64)]) -> Topology {
        let mut t = Topology::new((10.0, 10.0));
        for (i, &(x, y)) in positions.iter().enumerate() {
            t.push(crate::world::Node::new(
                NodeId::new(i as u32),
                Position::planar(x, y),
            ));
        }
        t
    }

    #[test]
    fn within_range() {
        let t = topo(&[(0.0, 0.0), (0.5, 0.0)]);
        let m = DiscGraph::new(1.0).unwrap();
        assert!(m
            .can_communicate(&t, NodeId::new(0), NodeId::new(1))
            .unwrap());
    }

    #[test]
    fn boundary_is_inclusive() {
        let t = topo(&[(0.0, 0.0), (1.0, 0.0)]);
        let m = DiscGraph::new(1.0).unwrap();
        assert!(m
            .can_communicate(&t, NodeId::new(0), NodeId::new(1))
            .unwrap());
    }

    #[test]
    fn irreflexive() {
        let t = topo(&[(0.0, 0.0)]);
        let m = DiscGraph::new(1.0).unwrap();
        assert!(!m
            .can_communicate(&t, NodeId::new(0), NodeId::new(0))
            .unwrap());
    }

    #[test]
    fn unknown_node_is_an_error() {
        let t = topo(&[(0.0, 0.0)]);
        let m = DiscGraph::new(1.0).unwrap();
        assert_eq!(
            m.can_communicate(&t, NodeId::new(0), NodeId::new(7)),
            Err(ModelError::UnknownNode(NodeId::new(7)))
        );
    }

    #[test]
    fn nonpositive_range_is_invalid() {
        assert!(DiscGraph::new(0.0).is_err());
        assert!(DiscGraph::new(-1.0).is_err());
        assert!(DiscGraph::new(f64::INFINITY).is_err());
    }
}
