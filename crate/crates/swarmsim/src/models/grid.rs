//! Uniform spatial grid used by the edge models to prune candidate pairs.
//!
//! Cell sides are at least the communication range, so every pair within
//! range lies in the same or in adjacent cells and a 3x3 cell block around a
//! query point covers all potential neighbors. The grid stores node ids
//! only; it is a candidate filter, exact membership is always re-checked
//! against the communication model.

use crate::world::{NodeId, Position, Topology};

pub struct SpatialGrid {
    min_x: f64,
    min_y: f64,
    cell_w: f64,
    cell_h: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
    node_count: usize,
}

impl SpatialGrid {
    /// Builds a grid over all node positions. `range` must be positive.
    pub fn build(topology: &Topology, range: f64) -> Self {
        debug_assert!(range > 0.0 && range.is_finite());
        let n = topology.len();
        if n == 0 {
            return SpatialGrid {
                min_x: 0.0,
                min_y: 0.0,
                cell_w: range,
                cell_h: range,
                cols: 1,
                rows: 1,
                cells: vec![Vec::new()],
                node_count: 0,
            };
        }

        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for node in topology.iter() {
            let p = node.position();
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
            min_y = min_y.min(p.y);
            max_y = max_y.max(p.y);
        }

        // Cap the cell count so sparse outliers cannot blow up memory; the
        // cap only ever makes cells larger, which keeps the 3x3 scan valid.
        let dim_cap = (((4 * n) as f64).sqrt().ceil() as usize).max(1);
        let dims = |extent: f64| -> (usize, f64) {
            let cells = ((extent / range).floor() as usize).clamp(1, dim_cap);
            let side = if extent > 0.0 {
                extent / cells as f64
            } else {
                range
            };
            (cells, side.max(range))
        };
        let (cols, cell_w) = dims(max_x - min_x);
        let (rows, cell_h) = dims(max_y - min_y);

        let mut cells = vec![Vec::new(); cols * rows];
        let mut grid = SpatialGrid {
            min_x,
            min_y,
            cell_w,
            cell_h,
            cols,
            rows,
            cells: Vec::new(),
            node_count: n,
        };
        for node in topology.iter() {
            let (cx, cy) = grid.cell_of(node.position());
            cells[cy * cols + cx].push(node.id().value());
        }
        grid.cells = cells;
        grid
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    fn cell_of(&self, p: Position) -> (usize, usize) {
        let cx = ((p.x - self.min_x) / self.cell_w).floor();
        let cy = ((p.y - self.min_y) / self.cell_h).floor();
        // Positions outside the covered area clamp into the border cells.
        let cx = (cx.max(0.0) as usize).min(self.cols - 1);
        let cy = (cy.max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    /// Visits every node id in the 3x3 cell block around `p`, in
    /// deterministic cell-major order.
    pub fn for_candidates(&self, p: Position, mut visit: impl FnMut(NodeId)) {
        let (cx, cy) = self.cell_of(p);
        let x0 = cx.saturating_sub(1);
        let x1 = (cx + 1).min(self.cols - 1);
        let y0 = cy.saturating_sub(1);
        let y1 = (cy + 1).min(self.rows - 1);
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                for &id in &self.cells[gy * self.cols + gx] {
                    visit(NodeId::new(id));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Node;

    fn topo(positions: &[(f64, f64)]) -> Topology {
        let mut t = Topology::new((10.0, 10.0));
        for (i, &(x, y)) in positions.iter().enumerate() {
            t.push(Node::new(NodeId::new(i as u32), Position::planar(x, y)));
        }
        t
    }

    fn candidates(grid: &SpatialGrid, p: Position) -> Vec<u32> {
        let mut out = Vec::new();
        grid.for_candidates(p, |id| out.push(id.value()));
        out
    }

    #[test]
    fn finds_all_nodes_within_range() {
        // Every true neighbor must appear among the candidates.
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| ((i % 10) as f64 * 0.7, (i / 10) as f64 * 0.9))
            .collect();
        let t = topo(&pts);
        let grid = SpatialGrid::build(&t, 1.0);
        for (a, &(ax, ay)) in pts.iter().enumerate() {
            let pa = Position::planar(ax, ay);
            let cand = candidates(&grid, pa);
            for (b, &(bx, by)) in pts.iter().enumerate() {
                let pb = Position::planar(bx, by);
                if a != b && pa.distance(&pb) <= 1.0 {
                    assert!(cand.contains(&(b as u32)), "missed neighbor {b} of {a}");
                }
            }
        }
    }

    #[test]
    fn candidates_have_no_duplicates_in_tiny_grids() {
        let t = topo(&[(0.0, 0.0), (0.1, 0.1)]);
        let grid = SpatialGrid::build(&t, 5.0);
        let cand = candidates(&grid, Position::planar(0.0, 0.0));
        assert_eq!(cand, vec![0, 1]);
    }

    #[test]
    fn empty_topology() {
        let t = topo(&[]);
        let grid = SpatialGrid::build(&t, 1.0);
        assert!(candidates(&grid, Position::planar(0.0, 0.0)).is_empty());
    }

    #[test]
    fn outlier_positions_clamp_into_border_cells() {
        let t = topo(&[(-100.0, 0.0), (0.0, 0.0), (0.5, 0.0)]);
        let grid = SpatialGrid::build(&t, 1.0);
        let cand = candidates(&grid, Position::planar(0.4, 0.0));
        assert!(cand.contains(&1));
        assert!(cand.contains(&2));
    }
}
