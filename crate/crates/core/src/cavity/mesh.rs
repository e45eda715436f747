use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Wall,
    /// Top boundary, corners included.
    Lid,
}

/// Uniform Taylor–Hood mesh of `[-1, 1]²`.
///
/// A level-`ℓ` mesh has `(2^{ℓ-1})²` squares, each split along its SW–NE
/// diagonal into `[SW, SE, NE]` and `[SW, NE, NW]`. Quadratic nodes form the
/// uniform `(2^ℓ + 1)²` grid numbered lexicographically by `(y, x)`; pressure
/// lives on the even-even subgrid.
#[derive(Debug, Clone)]
pub struct CavityMesh {
    level: u32,
    cells: usize,
    coords: Vec<[f64; 2]>,
    /// Vertices then edge midpoints `(v0v1, v1v2, v2v0)`.
    triangles: Vec<[usize; 6]>,
    pressure_nodes: Vec<usize>,
    kinds: Vec<NodeKind>,
}

impl CavityMesh {
    pub const MIN_LEVEL: u32 = 3;
    pub const MAX_LEVEL: u32 = 12;

    pub fn new(level: u32) -> Result<Self> {
        if !(Self::MIN_LEVEL..=Self::MAX_LEVEL).contains(&level) {
            return Err(Error::InvalidParameter(format!(
                "mesh level must lie in {}..={}, got {level}",
                Self::MIN_LEVEL,
                Self::MAX_LEVEL
            )));
        }
        let cells = 1usize << (level - 1);
        let side = 2 * cells + 1;
        let h = 2.0 / (side - 1) as f64;
        let id = |i: usize, j: usize| j * side + i;

        let mut coords = Vec::with_capacity(side * side);
        let mut kinds = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                coords.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
                let kind = if j == side - 1 {
                    NodeKind::Lid
                } else if i == 0 || i == side - 1 || j == 0 {
                    NodeKind::Wall
                } else {
                    NodeKind::Interior
                };
                kinds.push(kind);
            }
        }

        let mut triangles = Vec::with_capacity(2 * cells * cells);
        for cj in 0..cells {
            for ci in 0..cells {
                let (i, j) = (2 * ci, 2 * cj);
                let sw = id(i, j);
                let se = id(i + 2, j);
                let ne = id(i + 2, j + 2);
                let nw = id(i, j + 2);
                let centre = id(i + 1, j + 1);
                triangles.push([sw, se, ne, id(i + 1, j), id(i + 2, j + 1), centre]);
                triangles.push([sw, ne, nw, centre, id(i + 1, j + 2), id(i, j + 1)]);
            }
        }

        let pressure_nodes = (0..=cells)
            .flat_map(|pj| (0..=cells).map(move |pi| id(2 * pi, 2 * pj)))
            .collect();

        Ok(Self {
            level,
            cells,
            coords,
            triangles,
            pressure_nodes,
            kinds,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Squares per side.
    pub fn cells_per_side(&self) -> usize {
        self.cells
    }

    /// Quadratic nodes per side.
    pub fn nodes_per_side(&self) -> usize {
        2 * self.cells + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn triangles(&self) -> &[[usize; 6]] {
        &self.triangles
    }

    /// Node id of each pressure vertex, in pressure-DOF order.
    pub fn pressure_nodes(&self) -> &[usize] {
        &self.pressure_nodes
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Pressure index of an even-even vertex node.
    pub fn pressure_index(&self, node: usize) -> usize {
        let side = self.nodes_per_side();
        let (i, j) = (node % side, node / side);
        debug_assert!(i % 2 == 0 && j % 2 == 0);
        (j / 2) * (self.cells + 1) + i / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_three_counts() {
        let m = CavityMesh::new(3).unwrap();
        assert_eq!(m.cells_per_side().pow(2), 16);
        assert_eq!(m.triangles().len(), 32);
        assert_eq!(m.pressure_nodes().len(), 25);
        let interior = m.kinds().iter().filter(|&&k| k == NodeKind::Interior).count();
        assert_eq!(interior, 7 * 7);
    }

    #[test]
    fn triangles_are_counter_clockwise_and_cover_the_square() {
        let m = CavityMesh::new(4).unwrap();
        let mut area = 0.0;
        for t in m.triangles() {
            let [a, b, c] = [m.coords()[t[0]], m.coords()[t[1]], m.coords()[t[2]]];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!(det > 0.0);
            area += 0.5 * det;
            // midpoints sit halfway along their edges
            for (mid, (p, q)) in [(3, (0, 1)), (4, (1, 2)), (5, (2, 0))] {
                let (x, y) = (m.coords()[t[p]], m.coords()[t[q]]);
                let z = m.coords()[t[mid]];
                assert!((z[0] - 0.5 * (x[0] + y[0])).abs() < 1e-15);
                assert!((z[1] - 0.5 * (x[1] + y[1])).abs() < 1e-15);
            }
        }
        assert!((area - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pressure_index_matches_order() {
        let m = CavityMesh::new(3).unwrap();
        for (k, &node) in m.pressure_nodes().iter().enumerate() {
            assert_eq!(m.pressure_index(node), k);
        }
    }

    #[test]
    fn lid_includes_corners() {
        let m = CavityMesh::new(3).unwrap();
        let side = m.nodes_per_side();
        assert_eq!(m.kinds()[side * side - 1], NodeKind::Lid);
        assert_eq!(m.kinds()[side * (side - 1)], NodeKind::Lid);
        assert_eq!(m.kinds()[side - 1], NodeKind::Wall);
    }

    #[test]
    fn rejects_out_of_range_levels() {
        assert!(CavityMesh::new(2).is_err());
        assert!(CavityMesh::new(13).is_err());
    }
}
