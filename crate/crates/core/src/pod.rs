//! Proper orthogonal decomposition of full-order trajectories and the
//! Galerkin reduced-order L1 scheme on the resulting subspace.
//!
//! Snapshots `y₁ … y_K` are dof vectors. With `X` the Gram matrix of the
//! chosen inner product (mass for L², stiffness for H¹₀), the correlation
//! matrix is `K = Yᵀ X Y / K` and the basis is `ψⱼ = (K λⱼ)^{-1/2} Y vⱼ`.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::fem::{FemSpace, InnerKind};
use crate::l1::{fdq_all, HistoryMixer, FullOrderModel, L1Weights, SolutionHistory, SourceFn, Trajectory};
use crate::linalg::{dot, rank_cutoff, sym_eig, CholeskyFactor, DenseSym};

/// What a snapshot set is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `U⁰ … U^N`, `N + 1` vectors.
    SolutionsOnly,
    /// `U⁰ … U^N` followed by the difference quotients at `t₁ … t_N`,
    /// `2N + 1` vectors.
    WithFdq,
    /// Arbitrary user-supplied vectors.
    Explicit,
}

#[derive(Debug, Clone)]
pub struct SnapshotSet {
    space: Arc<FemSpace>,
    composition: Composition,
    inner: InnerKind,
    dim: usize,
    count: usize,
    // count × dim, row-major
    data: Vec<f64>,
}

impl SnapshotSet {
    pub fn new(space: Arc<FemSpace>, vectors: &[Vec<f64>], inner: InnerKind) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("empty snapshot set".into()));
        }
        let dim = space.num_dofs();
        let mut data = Vec::with_capacity(vectors.len() * dim);
        for v in vectors {
            check_len(dim, v.len())?;
            data.extend_from_slice(v);
        }
        Ok(Self { space, composition: Composition::Explicit, inner, dim, count: vectors.len(), data })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn inner(&self) -> InnerKind {
        self.inner
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    /// `count⁻¹ Σₙ ‖yₙ‖²_X`
    pub fn mean_square_norm(&self) -> f64 {
        let x = self.space.gram(self.inner);
        (0..self.count).map(|k| x.bilinear(self.vector(k), self.vector(k))).sum::<f64>()
            / self.count as f64
    }

    // rows X yₖ
    fn gram_applied(&self) -> Vec<f64> {
        let x = self.space.gram(self.inner);
        let mut out = vec![0.0; self.data.len()];
        for k in 0..self.count {
            x.matvec_into(self.vector(k), &mut out[k * self.dim..(k + 1) * self.dim]);
        }
        out
    }
}

/// Snapshot set of a full-order run, optionally including the fractional
/// difference quotients.
pub fn collect_snapshots(history: &SolutionHistory, include_fdq: bool, inner: InnerKind) -> Result<SnapshotSet> {
    let traj = history.trajectory();
    let dim = traj.dim();
    let mut data = traj.as_flat().to_vec();
    let mut count = traj.steps() + 1;
    if include_fdq {
        for q in fdq_all(traj)? {
            data.extend_from_slice(&q);
            count += 1;
        }
    }
    Ok(SnapshotSet {
        space: Arc::clone(history.space()),
        composition: if include_fdq { Composition::WithFdq } else { Composition::SolutionsOnly },
        inner,
        dim,
        count,
        data,
    })
}

// c (rows × cols) = a (rows × inner) · bᵀ, b stored cols × inner
fn gemm_nt(rows: usize, inner: usize, cols: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= rows * inner && b.len() >= cols * inner && c.len() >= rows * cols);
    unsafe {
        matrixmultiply::dgemm(
            rows,
            inner,
            cols,
            1.0,
            a.as_ptr(),
            inner as isize,
            1,
            b.as_ptr(),
            1,
            inner as isize,
            0.0,
            c.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
}

// c (rows × cols) = a (rows × inner) · b (inner × cols)
fn gemm_nn(rows: usize, inner: usize, cols: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= rows * inner && b.len() >= inner * cols && c.len() >= rows * cols);
    unsafe {
        matrixmultiply::dgemm(
            rows,
            inner,
            cols,
            1.0,
            a.as_ptr(),
            inner as isize,
            1,
            b.as_ptr(),
            cols as isize,
            1,
            0.0,
            c.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
}

fn symmetrize(n: usize, mut entries: Vec<f64>) -> DenseSym {
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (entries[i * n + j] + entries[j * n + i]);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    DenseSym::from_row_major(n, entries).expect("symmetrized")
}

/// `K_{ij} = count⁻¹ (y_j, y_i)_X`.
pub fn correlation_matrix(set: &SnapshotSet) -> DenseSym {
    let k = set.count;
    let xy = set.gram_applied();
    let mut g = vec![0.0; k * k];
    gemm_nt(k, set.dim, k, &set.data, &xy, &mut g);
    let scale = 1.0 / k as f64;
    g.iter_mut().for_each(|v| *v *= scale);
    symmetrize(k, g)
}

/// Orthonormal POD basis of a snapshot set.
#[derive(Debug, Clone)]
pub struct PodBasis {
    space: Arc<FemSpace>,
    inner: InnerKind,
    /// all eigenvalues of the correlation matrix, descending
    spectrum: Vec<f64>,
    rank: usize,
    m: usize,
    dim: usize,
    // rank × dim, row-major
    vectors: Vec<f64>,
}

impl PodBasis {
    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn inner(&self) -> InnerKind {
        self.inner
    }

    /// The `r` eigenvalues above the rank cutoff.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum[..self.rank]
    }

    /// Every eigenvalue of the correlation matrix, including the discarded
    /// tail below the cutoff.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of active basis functions.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        assert!(j < self.rank);
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// Active vectors `ψ₁ … ψ_m` as a row-major `m × dim` block.
    pub fn active(&self) -> &[f64] {
        &self.vectors[..self.m * self.dim]
    }

    /// The same basis with `m` active functions, `0 ≤ m ≤ r`.
    pub fn with_active(&self, m: usize) -> Result<PodBasis> {
        if m > self.rank {
            return Err(Error::RankExceeded { requested: m, rank: self.rank });
        }
        Ok(PodBasis { m, ..self.clone() })
    }

    /// `Σ_{j>m} λⱼ` over the eigenvalues above the cutoff.
    pub fn tail_sum(&self) -> f64 {
        self.eigenvalues()[self.m..].iter().sum()
    }

    /// Gram matrix `(ψⱼ, ψᵢ)` of the active functions in `kind`.
    pub fn gram(&self, kind: InnerKind) -> DenseSym {
        project_operator(self, self.space.gram(kind))
    }
}

/// Builds the rank-`m` POD basis of `set` in its inner product.
///
/// All `r` functions above the rank cutoff are formed; `m` of them are marked
/// active. The vectors `Y vⱼ / √(count λⱼ)` are re-orthonormalized by two
/// passes of Gram-Schmidt in the snapshot inner product, which leaves the
/// nested spans unchanged and removes the roundoff that the `λⱼ^{-1/2}` scaling
/// amplifies for small eigenvalues.
pub fn pod_basis(set: &SnapshotSet, m: usize) -> Result<PodBasis> {
    if m == 0 {
        return Err(Error::InvalidArgument("POD rank m must be at least 1".into()));
    }
    let count = set.count;
    let k = correlation_matrix(set);
    let eig = sym_eig(&k)?;
    let cut = rank_cutoff(&eig.eigenvalues);
    let rank = eig.eigenvalues.iter().take_while(|&&l| l > cut).count();
    if m > rank {
        return Err(Error::RankExceeded { requested: m, rank });
    }
    let dim = set.dim;
    let mut w = vec![0.0; rank * count];
    for j in 0..rank {
        let s = 1.0 / (count as f64 * eig.eigenvalues[j]).sqrt();
        for (wn, vn) in w[j * count..(j + 1) * count].iter_mut().zip(&eig.eigenvectors[j]) {
            *wn = s * vn;
        }
    }
    let mut vectors = vec![0.0; rank * dim];
    gemm_nn(rank, count, dim, &w, &set.data, &mut vectors);
    reorthonormalize(set.space.gram(set.inner), dim, rank, &mut vectors)?;
    Ok(PodBasis {
        space: Arc::clone(&set.space),
        inner: set.inner,
        spectrum: eig.eigenvalues,
        rank,
        m,
        dim,
        vectors,
    })
}

fn reorthonormalize(x: &crate::linalg::SparseSym, dim: usize, r: usize, v: &mut [f64]) -> Result<()> {
    let mut xv = vec![0.0; r * dim];
    for j in 0..r {
        for _pass in 0..2 {
            let (done, rest) = v.split_at_mut(j * dim);
            let cur = &mut rest[..dim];
            for i in 0..j {
                let c = dot(&xv[i * dim..(i + 1) * dim], cur);
                for (a, b) in cur.iter_mut().zip(&done[i * dim..(i + 1) * dim]) {
                    *a -= c * b;
                }
            }
        }
        let cur = &mut v[j * dim..(j + 1) * dim];
        let norm = x.bilinear(cur, cur).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Solver(format!("POD vector {j} vanished during orthonormalization")));
        }
        cur.iter_mut().for_each(|a| *a /= norm);
        x.matvec_into(cur, &mut xv[j * dim..(j + 1) * dim]);
    }
    Ok(())
}

/// `count⁻¹ Σₙ ‖yₙ − Σ_{j≤m} (yₙ, ψⱼ)_X ψⱼ‖²_X` for the active functions.
pub fn projection_error(set: &SnapshotSet, basis: &PodBasis) -> Result<f64> {
    check_len(set.dim, basis.dim)?;
    if set.inner != basis.inner {
        return Err(Error::InvalidArgument("snapshot and basis inner products differ".into()));
    }
    let (k, m, dim) = (set.count, basis.m, set.dim);
    let x = set.space.gram(set.inner);
    let xy = set.gram_applied();
    // coefficients (k × m) = Y X Ψᵀ
    let mut c = vec![0.0; k * m];
    if m > 0 {
        gemm_nt(k, dim, m, &xy, basis.active(), &mut c);
    }
    // residuals (k × dim) = Y − C Ψ
    let mut proj = vec![0.0; k * dim];
    if m > 0 {
        gemm_nn(k, m, dim, &c, basis.active(), &mut proj);
    }
    let mut total = 0.0;
    let mut r = vec![0.0; dim];
    for n in 0..k {
        for ((ri, yi), pi) in r.iter_mut().zip(set.vector(n)).zip(&proj[n * dim..(n + 1) * dim]) {
            *ri = yi - pi;
        }
        total += x.bilinear(&r, &r);
    }
    Ok(total / k as f64)
}

/// `Ψᵀ B Ψ` over the active functions.
pub fn project_operator(basis: &PodBasis, b: &crate::linalg::SparseSym) -> DenseSym {
    let (m, dim) = (basis.m, basis.dim);
    let mut bpsi = vec![0.0; m * dim];
    for j in 0..m {
        b.matvec_into(basis.vector(j), &mut bpsi[j * dim..(j + 1) * dim]);
    }
    let mut g = vec![0.0; m * m];
    if m > 0 {
        gemm_nt(m, dim, m, basis.active(), &bpsi, &mut g);
    }
    symmetrize(m, g)
}

/// Ritz projection onto the active span: solves `(∇ψⱼ, ∇ψᵢ) c = (∇u, ∇ψᵢ)`.
pub fn ritz_project(basis: &PodBasis, u: &[f64]) -> Result<Vec<f64>> {
    check_len(basis.dim, u.len())?;
    let s = basis.space.stiffness();
    let g = project_operator(basis, s);
    let su = s.matvec(u);
    let rhs = restrict(basis, &su)?;
    CholeskyFactor::new(&g).map_err(|e| Error::Solver(format!("reduced stiffness: {e}")))?.solve(&rhs)
}

/// `Ψ l`: coefficients of a dof-space functional against the active functions.
pub fn restrict(basis: &PodBasis, load: &[f64]) -> Result<Vec<f64>> {
    check_len(basis.dim, load.len())?;
    Ok((0..basis.m).map(|j| dot(basis.vector(j), load)).collect())
}

/// `Σⱼ cⱼ ψⱼ`
pub fn lift(basis: &PodBasis, coeffs: &[f64]) -> Result<Vec<f64>> {
    check_len(basis.m, coeffs.len())?;
    let mut out = vec![0.0; basis.dim];
    for (j, &c) in coeffs.iter().enumerate() {
        crate::linalg::axpy(c, basis.vector(j), &mut out);
    }
    Ok(out)
}

/// Galerkin projection of a full-order model onto a POD subspace.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    basis: PodBasis,
    pub red_mass: DenseSym,
    pub red_stiffness: DenseSym,
    /// `Ψᵀ A Ψ`; equals `red_stiffness` unless the model has a potential.
    pub red_operator: DenseSym,
    /// Ritz projection of the initial value.
    pub u0: Vec<f64>,
}

pub fn build_reduced(basis: &PodBasis, model: &FullOrderModel, v_h: &[f64]) -> Result<ReducedModel> {
    check_len(model.space().num_dofs(), basis.dim)?;
    if basis.m == 0 {
        return Err(Error::InvalidArgument("reduced model needs at least one basis function".into()));
    }
    let space = model.space();
    Ok(ReducedModel {
        basis: basis.clone(),
        red_mass: project_operator(basis, space.mass()),
        red_stiffness: project_operator(basis, space.stiffness()),
        red_operator: project_operator(basis, model.operator()),
        u0: ritz_project(basis, v_h)?,
    })
}

impl ReducedModel {
    pub fn basis(&self) -> &PodBasis {
        &self.basis
    }

    pub fn m(&self) -> usize {
        self.basis.m
    }

    pub fn reduce_load(&self, load: &[f64]) -> Result<Vec<f64>> {
        restrict(&self.basis, load)
    }

    /// Reduced loads `Ψᵀ (f(t_n), φ)` for `n = 0 … steps` using the full
    /// model's quadrature.
    pub fn loads(&self, model: &FullOrderModel, source: &SourceFn, tau: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
        (0..=steps).map(|n| self.reduce_load(&model.load_at(source, n as f64 * tau))).collect()
    }

    /// Lifts every reduced state back to dof space.
    pub fn lift_trajectory(&self, reduced: &Trajectory) -> Result<Trajectory> {
        check_len(self.m(), reduced.dim())?;
        let mut out = Trajectory::with_capacity(
            reduced.alpha(),
            reduced.tau(),
            lift(&self.basis, reduced.state(0))?,
            reduced.steps(),
        );
        for n in 1..=reduced.steps() {
            out.push(&lift(&self.basis, reduced.state(n))?)?;
        }
        Ok(out)
    }
}

/// Marches the reduced scheme
/// `(b₀ M_m + c_α τ^α A_m) Uₘⁿ = M_m Hⁿ + c_α τ^α Ψᵀ Fⁿ`.
///
/// `loads[n]` is the reduced load at `t_n` for `n = 0 … steps` (entry 0 is
/// not used).
pub fn solve_reduced(
    model: &ReducedModel,
    alpha: f64,
    tau: f64,
    steps: usize,
    loads: &[Vec<f64>],
) -> Result<Trajectory> {
    let m = model.m();
    check_len(steps + 1, loads.len())?;
    if !(tau > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument(format!("need tau > 0 and steps >= 1 (tau = {tau})")));
    }
    let weights = L1Weights::new(alpha, steps)?;
    let scale = weights.scale(tau);
    let system = model.red_mass.combine(weights.b(0), &model.red_operator, scale);
    let factor = CholeskyFactor::new(&system)?;
    let mut traj = Trajectory::with_capacity(alpha, tau, model.u0.clone(), steps);
    let mut mixer = HistoryMixer::new(&weights, m, steps)?;
    for (n, load) in loads.iter().enumerate().skip(1) {
        check_len(m, load.len())?;
        let h = mixer.history(traj.as_flat(), n);
        let mut rhs = model.red_mass.matvec(&h);
        for (r, l) in rhs.iter_mut().zip(load) {
            *r += scale * l;
        }
        traj.push(&factor.solve(&rhs)?)?;
    }
    Ok(traj)
}
