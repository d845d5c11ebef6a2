//! Uniform meshes of an interval or a rectangle.

use crate::error::{Error, Result};
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Intervals(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Intervals(c) => c.len(),
            Cells::Triangles(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
}

/// Conforming simplicial mesh with homogeneous Dirichlet boundary.
///
/// Nodes of a structured mesh are numbered lexicographically,
/// `node(i, j) = j * (nx + 1) + i`; one-dimensional meshes have `ny = 0`.
/// Boundary nodes carry no degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nx: usize,
    ny: usize,
    nodes: Vec<Point>,
    cells: Cells,
    dof_of_node: Vec<Option<usize>>,
    interior: Vec<usize>,
    h: f64,
}

impl Mesh {
    /// `m` equal subintervals of the unit interval.
    pub fn interval(m: usize) -> Result<Self> {
        Self::interval_on(m, 0.0, 1.0)
    }

    pub fn interval_on(m: usize, a: f64, b: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 subintervals, got {m}")));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("degenerate interval [{a}, {b}]")));
        }
        let h = (b - a) / m as f64;
        let nodes = (0..=m).map(|i| [a + (b - a) * i as f64 / m as f64, 0.0]).collect();
        let cells = Cells::Intervals((0..m).map(|i| [i, i + 1]).collect());
        let dof_of_node = (0..=m).map(|i| (i > 0 && i < m).then(|| i - 1)).collect();
        Ok(Self {
            dim: 1,
            nx: m,
            ny: 0,
            nodes,
            cells,
            dof_of_node,
            interior: (1..m).collect(),
            h,
        })
    }

    /// `nx × ny` cells on `extent`, each cell split into two triangles along
    /// the diagonal from its lower-left to its upper-right corner.
    pub fn rectangle(nx: usize, ny: usize, extent: Rect) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells per direction, got {nx} x {ny}"
            )));
        }
        let Rect { x0, x1, y0, y1 } = extent;
        if !(x1 > x0) || !(y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!("degenerate rectangle {extent:?}")));
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]);
            }
        }
        let mut tris = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
        let mut dof_of_node = vec![None; nodes.len()];
        let mut interior = Vec::with_capacity((nx - 1) * (ny - 1));
        for j in 1..ny {
            for i in 1..nx {
                dof_of_node[idx(i, j)] = Some(interior.len());
                interior.push(idx(i, j));
            }
        }
        let hx = (x1 - x0) / nx as f64;
        let hy = (y1 - y0) / ny as f64;
        Ok(Self {
            dim: 2,
            nx,
            ny,
            nodes,
            cells: Cells::Triangles(tris),
            dof_of_node,
            interior,
            h: hx.hypot(hy),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    /// Node indices of the interior degrees of freedom, in dof order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn num_dofs(&self) -> usize {
        self.interior.len()
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Cell counts `(nx, ny)`; `ny == 0` in one dimension.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Length (1D) or area (2D) of every cell.
    pub fn cell_measures(&self) -> Vec<f64> {
        match &self.cells {
            Cells::Intervals(c) => {
                c.iter().map(|[a, b]| self.nodes[*b][0] - self.nodes[*a][0]).collect()
            }
            Cells::Triangles(c) => c
                .iter()
                .map(|&[a, b, d]| {
                    let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[d]);
                    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
                })
                .collect(),
        }
    }

    /// For a mesh built with every cell count multiplied by `refine`, the dof
    /// of `fine` sitting on each dof node of `self`.
    pub fn coarse_to_fine_dofs(&self, fine: &Mesh, refine: usize) -> Result<Vec<usize>> {
        let expected = (self.nx * refine, self.ny * refine);
        if fine.dim != self.dim || fine.shape() != expected {
            return Err(Error::InvalidArgument(format!(
                "mesh {:?} is not a {refine}-fold refinement of {:?}",
                fine.shape(),
                self.shape()
            )));
        }
        self.interior
            .iter()
            .map(|&node| {
                let (i, j) = (node % (self.nx + 1), node / (self.nx + 1));
                let fine_node = j * refine * (fine.nx + 1) + i * refine;
                let (p, q) = (self.nodes[node], fine.nodes[fine_node]);
                let scale = self.h.max(1.0);
                if (p[0] - q[0]).abs() > 1e-12 * scale || (p[1] - q[1]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument("meshes do not share extents".into()));
                }
                fine.dof_of_node[fine_node]
                    .ok_or_else(|| Error::InvalidArgument("interior node maps to boundary".into()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_interval() {
        let m = Mesh::interval(2).unwrap();
        let xs: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]);
        assert_eq!(m.num_dofs(), 1);
    }

    #[test]
    fn interval_counts() {
        let m = Mesh::interval(4).unwrap();
        assert_eq!(m.h(), 0.25);
        assert_eq!(m.num_dofs(), 3);
        let m = Mesh::interval(1000).unwrap();
        assert!((m.h() - 1e-3).abs() < 1e-18);
        assert_eq!(m.num_dofs(), 999);
    }

    #[test]
    fn interval_rejects_single_cell() {
        assert!(Mesh::interval(1).is_err());
        assert!(Mesh::interval_on(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn rectangle_counts() {
        let m = Mesh::rectangle(2, 2, Rect::UNIT).unwrap();
        assert_eq!(m.nodes().len(), 9);
        assert_eq!(m.cells().len(), 8);
        assert_eq!(m.num_dofs(), 1);

        let m = Mesh::rectangle(2, 3, Rect::UNIT).unwrap();
        assert_eq!(m.cells().len(), 12);
        assert_eq!(m.num_dofs(), 2);

        let m = Mesh::rectangle(100, 100, Rect::UNIT).unwrap();
        assert_eq!(m.cells().len(), 2 * 10_000);
        assert_eq!(m.num_dofs(), 99 * 99);
    }

    #[test]
    fn rectangle_rejects_degenerate_extent() {
        let flat = Rect { x0: 0.0, x1: 1.0, y0: 0.5, y1: 0.5 };
        assert!(Mesh::rectangle(3, 3, flat).is_err());
        assert!(Mesh::rectangle(1, 3, Rect::UNIT).is_err());
    }

    #[test]
    fn cells_have_positive_measure() {
        let m = Mesh::rectangle(3, 4, Rect { x0: -1.0, x1: 2.0, y0: 0.0, y1: 0.5 }).unwrap();
        let total: f64 = m.cell_measures().iter().sum();
        assert!(m.cell_measures().iter().all(|&a| a > 0.0));
        assert!((total - 1.5).abs() < 1e-14);
    }

    #[test]
    fn refinement_maps_shared_nodes() {
        let coarse = Mesh::rectangle(2, 3, Rect::UNIT).unwrap();
        let fine = Mesh::rectangle(4, 6, Rect::UNIT).unwrap();
        let map = coarse.coarse_to_fine_dofs(&fine, 2).unwrap();
        for (cd, fd) in map.iter().enumerate() {
            let p = coarse.nodes()[coarse.interior_nodes()[cd]];
            let q = fine.nodes()[fine.interior_nodes()[*fd]];
            assert!((p[0] - q[0]).abs() < 1e-15 && (p[1] - q[1]).abs() < 1e-15);
        }
        assert!(coarse.coarse_to_fine_dofs(&fine, 3).is_err());
    }
}
