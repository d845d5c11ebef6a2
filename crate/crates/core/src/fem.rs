//! Continuous piecewise-linear finite elements with homogeneous Dirichlet
//! boundary conditions.

use std::sync::OnceLock;

use crate::error::{check_len, Result};
use crate::linalg::{SparseSym, SpdSolver};
use crate::mesh::{Cells, Mesh};
use crate::Point;

/// Which inner product a vector space of dof coefficients is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerKind {
    /// `(u, v)`
    L2,
    /// `(∇u, ∇v)`
    H1,
}

// 3-point Gauss rule on [0, 1]
const GAUSS3_1D: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

// 5-point Gauss rule on [0, 1]
const GAUSS5_1D: [(f64, f64); 5] = [
    (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_2),
    (0.5, 0.284_444_444_444_444_4),
    (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
    (0.953_089_922_969_332, 0.118_463_442_528_094_5),
];

// edge-midpoint rule, exact for quadratics
const EDGE_MIDPOINT_2D: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

// 7-point degree-5 rule on triangles (weights sum to 1)
const DUNAVANT7_2D: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059_715_871_789_770, 0.470_142_064_105_115, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.059_715_871_789_770, 0.470_142_064_105_115], 0.132_394_152_788_506),
    ([0.470_142_064_105_115, 0.470_142_064_105_115, 0.059_715_871_789_770], 0.132_394_152_788_506),
    ([0.797_426_985_353_087, 0.101_286_507_323_456, 0.101_286_507_323_456], 0.125_939_180_544_827),
    ([0.101_286_507_323_456, 0.797_426_985_353_087, 0.101_286_507_323_456], 0.125_939_180_544_827),
    ([0.101_286_507_323_456, 0.101_286_507_323_456, 0.797_426_985_353_087], 0.125_939_180_544_827),
];

/// Quadrature points of one rule over the whole mesh, with the P1 basis
/// values needed to assemble `∫ g φᵢ`.
#[derive(Debug, Clone)]
struct MeshQuadrature {
    points: Vec<Point>,
    weights: Vec<f64>,
    // for every point: (node, barycentric value) of the cell's vertices
    vertices: Vec<[(usize, f64); 3]>,
}

impl MeshQuadrature {
    fn new(mesh: &Mesh, high_order: bool) -> Self {
        let nodes = mesh.nodes();
        let measures = mesh.cell_measures();
        let mut q = MeshQuadrature { points: Vec::new(), weights: Vec::new(), vertices: Vec::new() };
        match mesh.cells() {
            Cells::Intervals(cells) => {
                let rule: &[(f64, f64)] = if high_order { &GAUSS5_1D } else { &GAUSS3_1D };
                for (cell, len) in cells.iter().zip(&measures) {
                    let (a, b) = (nodes[cell[0]][0], nodes[cell[1]][0]);
                    for &(s, w) in rule {
                        q.points.push([a + s * (b - a), 0.0]);
                        q.weights.push(w * len);
                        q.vertices.push([(cell[0], 1.0 - s), (cell[1], s), (usize::MAX, 0.0)]);
                    }
                }
            }
            Cells::Triangles(cells) => {
                let rule: &[([f64; 3], f64)] =
                    if high_order { &DUNAVANT7_2D } else { &EDGE_MIDPOINT_2D };
                for (cell, area) in cells.iter().zip(&measures) {
                    for (bary, w) in rule {
                        let mut p = [0.0; 2];
                        for (k, &node) in cell.iter().enumerate() {
                            p[0] += bary[k] * nodes[node][0];
                            p[1] += bary[k] * nodes[node][1];
                        }
                        q.points.push(p);
                        q.weights.push(w * area);
                        q.vertices.push([
                            (cell[0], bary[0]),
                            (cell[1], bary[1]),
                            (cell[2], bary[2]),
                        ]);
                    }
                }
            }
        }
        q
    }
}

/// The discrete space `X_h` together with its mass and stiffness matrices
/// restricted to the interior degrees of freedom.
#[derive(Debug)]
pub struct FemSpace {
    mesh: Mesh,
    mass: SparseSym,
    stiffness: SparseSym,
    load_rule: MeshQuadrature,
    mass_solver: OnceLock<SpdSolver>,
}

/// Mass and stiffness matrices over all nodes, boundary included.
pub fn assemble_all_nodes(mesh: &Mesh) -> Result<(SparseSym, SparseSym)> {
    let nodes = mesh.nodes();
    let measures = mesh.cell_measures();
    let mut mass = Vec::new();
    let mut stiff = Vec::new();
    match mesh.cells() {
        Cells::Intervals(cells) => {
            for (&[a, b], &h) in cells.iter().zip(&measures) {
                for (i, j, m, s) in [
                    (a, a, h / 3.0, 1.0 / h),
                    (b, b, h / 3.0, 1.0 / h),
                    (a, b, h / 6.0, -1.0 / h),
                    (b, a, h / 6.0, -1.0 / h),
                ] {
                    mass.push((i, j, m));
                    stiff.push((i, j, s));
                }
            }
        }
        Cells::Triangles(cells) => {
            for (cell, &area) in cells.iter().zip(&measures) {
                let p = cell.map(|k| nodes[k]);
                // ∇λ_k = rot(opposite edge) / (2 area)
                let grads: [[f64; 2]; 3] = std::array::from_fn(|k| {
                    let (q, r) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                    [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)]
                });
                for a in 0..3 {
                    for b in 0..3 {
                        let m = if a == b { area / 6.0 } else { area / 12.0 };
                        let s = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                        mass.push((cell[a], cell[b], m));
                        stiff.push((cell[a], cell[b], s));
                    }
                }
            }
        }
    }
    let n = nodes.len();
    Ok((SparseSym::from_triplets(n, &mass)?, SparseSym::from_triplets(n, &stiff)?))
}

impl FemSpace {
    pub fn assemble(mesh: Mesh) -> Result<Self> {
        let (mass_all, stiff_all) = assemble_all_nodes(&mesh)?;
        let interior = mesh.interior_nodes();
        let mass = mass_all.submatrix(interior);
        let stiffness = stiff_all.submatrix(interior);
        let load_rule = MeshQuadrature::new(&mesh, false);
        Ok(Self { mesh, mass, stiffness, load_rule, mass_solver: OnceLock::new() })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mass(&self) -> &SparseSym {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseSym {
        &self.stiffness
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_dofs()
    }

    pub fn gram(&self, kind: InnerKind) -> &SparseSym {
        match kind {
            InnerKind::L2 => &self.mass,
            InnerKind::H1 => &self.stiffness,
        }
    }

    fn mass_solver(&self) -> Result<&SpdSolver> {
        if let Some(s) = self.mass_solver.get() {
            return Ok(s);
        }
        let solver = SpdSolver::new(&self.mass)?;
        Ok(self.mass_solver.get_or_init(|| solver))
    }

    /// Load vector `∫ g φᵢ` over interior dofs with the design quadrature
    /// (3-point Gauss per interval, edge midpoints per triangle).
    pub fn load(&self, g: impl Fn(&Point) -> f64) -> Vec<f64> {
        integrate_against_basis(&self.mesh, &self.load_rule, g)
    }

    /// `P_h g` in dof coordinates.
    pub fn l2_project(&self, g: impl Fn(&Point) -> f64) -> Result<Vec<f64>> {
        let load = self.load(g);
        self.mass_solver()?.solve(&load)
    }

    /// Solves `M c = l`, i.e. the coefficients of the L² Riesz representer of
    /// a load vector.
    pub fn mass_solve(&self, load: &[f64]) -> Result<Vec<f64>> {
        self.mass_solver()?.solve(load)
    }

    /// `‖P_h g‖_{L²}` computed from the load vector of `g`.
    pub fn projected_norm(&self, load: &[f64]) -> Result<f64> {
        let c = self.mass_solve(load)?;
        Ok(crate::linalg::dot(&c, load).max(0.0).sqrt())
    }

    /// `uᵀ M v` or `uᵀ S v`.
    pub fn inner(&self, u: &[f64], v: &[f64], kind: InnerKind) -> Result<f64> {
        check_len(self.num_dofs(), u.len())?;
        check_len(self.num_dofs(), v.len())?;
        Ok(self.gram(kind).bilinear(u, v))
    }

    pub fn norm(&self, u: &[f64], kind: InnerKind) -> Result<f64> {
        Ok(self.inner(u, u, kind)?.max(0.0).sqrt())
    }

    /// Weighted mass matrix `∫ q φⱼ φᵢ` over interior dofs, integrated with a
    /// degree-5 rule in 2D and 5-point Gauss in 1D.
    pub fn weighted_mass(&self, q: impl Fn(&Point) -> f64) -> Result<SparseSym> {
        let rule = MeshQuadrature::new(&self.mesh, true);
        let mut triplets = Vec::new();
        for ((p, w), verts) in rule.points.iter().zip(&rule.weights).zip(&rule.vertices) {
            let qw = q(p) * w;
            for &(a, pa) in verts.iter().filter(|v| v.0 != usize::MAX) {
                let Some(da) = self.mesh.dof_of_node(a) else { continue };
                for &(b, pb) in verts.iter().filter(|v| v.0 != usize::MAX) {
                    if let Some(db) = self.mesh.dof_of_node(b) {
                        triplets.push((da, db, qw * (pa * pb)));
                    }
                }
            }
        }
        SparseSym::from_triplets(self.num_dofs(), &triplets)
    }

    /// Nodal interpolant `I_h g` in dof coordinates.
    pub fn interpolate(&self, g: impl Fn(&Point) -> f64) -> Vec<f64> {
        let nodes = self.mesh.nodes();
        self.mesh.interior_nodes().iter().map(|&k| g(&nodes[k])).collect()
    }

    /// Values at every mesh node (zero on the boundary).
    pub fn to_nodal(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.nodes().len()];
        for (&node, &c) in self.mesh.interior_nodes().iter().zip(coeffs) {
            out[node] = c;
        }
        out
    }

    /// Coefficients on `fine` (every cell count multiplied by `refine`) of the
    /// same piecewise-linear function. Exact for nested meshes.
    pub fn prolong(&self, fine: &FemSpace, refine: usize, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.num_dofs(), coeffs.len())?;
        // validates the nesting
        self.mesh.coarse_to_fine_dofs(&fine.mesh, refine)?;
        let nodal = self.to_nodal(coeffs);
        let (nx, ny) = self.mesh.shape();
        let (fnx, _) = fine.mesh.shape();
        let r = refine as f64;
        let value = |fi: usize, fj: usize| -> f64 {
            let (i, a) = ((fi / refine).min(nx - 1), fi as f64 / r - (fi / refine).min(nx - 1) as f64);
            if self.mesh.dim() == 1 {
                return nodal[i] + a * (nodal[i + 1] - nodal[i]);
            }
            let (j, b) = ((fj / refine).min(ny - 1), fj as f64 / r - (fj / refine).min(ny - 1) as f64);
            let at = |di: usize, dj: usize| nodal[(j + dj) * (nx + 1) + i + di];
            if a >= b {
                // triangle (0,0), (1,0), (1,1)
                at(0, 0) + a * (at(1, 0) - at(0, 0)) + b * (at(1, 1) - at(1, 0))
            } else {
                // triangle (0,0), (1,1), (0,1)
                at(0, 0) + a * (at(1, 1) - at(0, 1)) + b * (at(0, 1) - at(0, 0))
            }
        };
        Ok(fine
            .mesh
            .interior_nodes()
            .iter()
            .map(|&node| value(node % (fnx + 1), node / (fnx + 1)))
            .collect())
    }

    /// `‖u_h − g‖_{L²}` with a degree-5 (2D) / 5-point Gauss (1D) rule.
    pub fn l2_error_against(&self, coeffs: &[f64], g: impl Fn(&Point) -> f64) -> Result<f64> {
        check_len(self.num_dofs(), coeffs.len())?;
        let nodal = self.to_nodal(coeffs);
        let rule = MeshQuadrature::new(&self.mesh, true);
        let mut sum = 0.0;
        for ((p, w), verts) in rule.points.iter().zip(&rule.weights).zip(&rule.vertices) {
            let uh: f64 =
                verts.iter().filter(|v| v.0 != usize::MAX).map(|&(k, phi)| phi * nodal[k]).sum();
            let d = uh - g(p);
            sum += w * d * d;
        }
        Ok(sum.sqrt())
    }
}

fn integrate_against_basis(
    mesh: &Mesh,
    rule: &MeshQuadrature,
    g: impl Fn(&Point) -> f64,
) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_dofs()];
    for ((p, w), verts) in rule.points.iter().zip(&rule.weights).zip(&rule.vertices) {
        let gw = g(p) * w;
        if gw == 0.0 {
            continue;
        }
        for &(node, phi) in verts {
            if node == usize::MAX {
                continue;
            }
            if let Some(d) = mesh.dof_of_node(node) {
                load[d] += gw * phi;
            }
        }
    }
    load
}
