use std::sync::Arc;

use super::history::{fdq_all, history_term, HistoryMixer, Trajectory};
use super::problem::SourceFn;
use super::L1Weights;
use crate::error::{check_len, Error, Result};
use crate::fem::{FemSpace, InnerKind};
use crate::linalg::{norm2, SparseSym, SpdSolver};
use crate::Point;

/// Full-order spatial operator: `A = S` (stiffness), or `A = S + Q` when a
/// nonnegative potential `q` is present, `Q = ∫ q φⱼ φᵢ`.
#[derive(Debug)]
pub struct FullOrderModel {
    space: Arc<FemSpace>,
    operator: SparseSym,
}

impl FullOrderModel {
    pub fn new(space: Arc<FemSpace>) -> Self {
        let operator = space.stiffness().clone();
        Self { space, operator }
    }

    pub fn with_potential(space: Arc<FemSpace>, q: impl Fn(&Point) -> f64) -> Result<Self> {
        let reaction = space.weighted_mass(q)?;
        let operator = space.stiffness().combine(1.0, &reaction, 1.0);
        Ok(Self { space, operator })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn operator(&self) -> &SparseSym {
        &self.operator
    }

    /// `b₀ M + c_α τ^α A`
    pub fn system_matrix(&self, weights: &L1Weights, tau: f64) -> SparseSym {
        self.space.mass().combine(weights.b(0), &self.operator, weights.scale(tau))
    }

    pub fn load_at(&self, source: &SourceFn, t: f64) -> Vec<f64> {
        self.space.load(|p| source(p, t))
    }

    /// Load vectors `(f(t_n), φᵢ)` for `n = 0, …, steps`.
    pub fn loads(&self, source: &SourceFn, tau: f64, steps: usize) -> Vec<Vec<f64>> {
        (0..=steps).map(|n| self.load_at(source, n as f64 * tau)).collect()
    }

    /// Marches the scheme for `n = 1, …, steps` from coefficients `initial`.
    pub fn solve(
        self: &Arc<Self>,
        alpha: f64,
        tau: f64,
        steps: usize,
        initial: Vec<f64>,
        source: &SourceFn,
    ) -> Result<SolutionHistory> {
        check_len(self.space.num_dofs(), initial.len())?;
        if !(tau > 0.0) || steps == 0 {
            return Err(Error::InvalidArgument(format!("need tau > 0 and steps >= 1 (tau = {tau})")));
        }
        let weights = L1Weights::new(alpha, steps)?;
        let scale = weights.scale(tau);
        let solver = SpdSolver::new(&self.system_matrix(&weights, tau))?;
        let dim = initial.len();
        let mut traj = Trajectory::with_capacity(alpha, tau, initial, steps);
        let mut load_norms = Vec::with_capacity(steps + 1);
        load_norms.push(self.space.projected_norm(&self.load_at(source, 0.0))?);
        let mut mixer = HistoryMixer::new(&weights, dim, steps)?;
        let mut rhs = vec![0.0; dim];
        for n in 1..=steps {
            let load = self.load_at(source, n as f64 * tau);
            load_norms.push(self.space.projected_norm(&load)?);
            let h = mixer.history(traj.as_flat(), n);
            self.space.mass().matvec_into(&h, &mut rhs);
            for (r, l) in rhs.iter_mut().zip(&load) {
                *r += scale * l;
            }
            let u = solver.solve(&rhs)?;
            traj.push(&u)?;
        }
        Ok(SolutionHistory { model: Arc::clone(self), traj, load_norms })
    }
}

/// Output of a full-order run: `U⁰ … U^N` plus `‖F_h^n‖_{L²}` for every step.
#[derive(Debug, Clone)]
pub struct SolutionHistory {
    pub(crate) model: Arc<FullOrderModel>,
    pub(crate) traj: Trajectory,
    pub(crate) load_norms: Vec<f64>,
}

impl SolutionHistory {
    pub fn new(model: Arc<FullOrderModel>, traj: Trajectory, load_norms: Vec<f64>) -> Result<Self> {
        check_len(model.space.num_dofs(), traj.dim())?;
        check_len(traj.steps() + 1, load_norms.len())?;
        Ok(Self { model, traj, load_norms })
    }

    pub fn model(&self) -> &Arc<FullOrderModel> {
        &self.model
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.model.space
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn alpha(&self) -> f64 {
        self.traj.alpha()
    }

    pub fn tau(&self) -> f64 {
        self.traj.tau()
    }

    pub fn steps(&self) -> usize {
        self.traj.steps()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        self.traj.state(n)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau()
    }

    /// `‖P_h f(t_n)‖_{L²}`, `n = 0, …, N`.
    pub fn load_norms(&self) -> &[f64] {
        &self.load_norms
    }

    /// Largest relative residual of `M ∂̄_τ^α Uⁿ + A Uⁿ − Fⁿ` over all steps.
    pub fn consistency_residual(&self, source: &SourceFn) -> Result<f64> {
        let quotients = fdq_all(&self.traj)?;
        let mass = self.model.space.mass();
        let mut worst: f64 = 0.0;
        for n in 1..=self.steps() {
            let load = self.model.load_at(source, self.time(n));
            let mut r = mass.matvec(&quotients[n - 1]);
            let au = self.model.operator.matvec(self.state(n));
            for ((ri, ai), li) in r.iter_mut().zip(&au).zip(&load) {
                *ri += ai - li;
            }
            let denom = norm2(&load).max(norm2(&au));
            if denom > 0.0 {
                worst = worst.max(norm2(&r) / denom);
            }
        }
        Ok(worst)
    }

    pub fn l2_norms(&self) -> Result<Vec<f64>> {
        self.traj.states().map(|s| self.model.space.norm(s, InnerKind::L2)).collect()
    }
}

/// One step of the scheme from an explicit history `U⁰ … U^{n−1}`, with the
/// memory term summed directly:
///
/// `(b₀M + c_α τ^α A) Uⁿ = M (b_{n−1}U⁰ + Σ_{j=1}^{n−1}(b_{j−1}−b_j)U^{n−j}) + c_α τ^α Fⁿ`.
pub fn step_full(
    model: &FullOrderModel,
    weights: &L1Weights,
    history: &Trajectory,
    load: &[f64],
) -> Result<Vec<f64>> {
    let n = history.steps() + 1;
    let dim = history.dim();
    check_len(model.space.num_dofs(), dim)?;
    check_len(dim, load.len())?;
    if weights.len() < n {
        return Err(Error::InvalidArgument(format!("{} weights for step {n}", weights.len())));
    }
    let h = history_term(weights, history.as_flat(), dim, n);
    let mut rhs = model.space.mass().matvec(&h);
    let scale = weights.scale(history.tau());
    for (r, l) in rhs.iter_mut().zip(load) {
        *r += scale * l;
    }
    SpdSolver::new(&model.system_matrix(weights, history.tau()))?.solve(&rhs)
}

/// Full-order run with `U⁰ = P_h v` on the plain Laplacian.
pub fn solve_full(
    space: Arc<FemSpace>,
    alpha: f64,
    tau: f64,
    steps: usize,
    v: impl Fn(&Point) -> f64,
    f: SourceFn,
) -> Result<SolutionHistory> {
    let initial = space.l2_project(v)?;
    let model = Arc::new(FullOrderModel::new(space));
    model.solve(alpha, tau, steps, initial, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::mlf::gamma;

    fn zero_source() -> SourceFn {
        Arc::new(|_: &Point, _: f64| 0.0)
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let space = Arc::new(FemSpace::assemble(Mesh::interval(8).unwrap()).unwrap());
        let h = solve_full(space, 0.5, 0.1, 5, |_| 0.0, zero_source()).unwrap();
        assert!(h.traj.states().all(|s| s.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn single_dof_first_step() {
        let space = Arc::new(FemSpace::assemble(Mesh::interval(2).unwrap()).unwrap());
        let model = Arc::new(FullOrderModel::new(space));
        let h = model.solve(0.5, 0.1, 1, vec![1.0], &zero_source()).unwrap();
        let want = (1.0 / 3.0) / (1.0 / 3.0 + gamma(1.5) * 0.1f64.sqrt() * 4.0);
        assert!((h.state(1)[0] - want).abs() < 1e-15);
    }

    #[test]
    fn marching_matches_explicit_steps() {
        let space = Arc::new(FemSpace::assemble(Mesh::interval(10).unwrap()).unwrap());
        let model = Arc::new(FullOrderModel::new(Arc::clone(&space)));
        let f: SourceFn = Arc::new(|p: &Point, t: f64| (t * (2.0 * std::f64::consts::PI * p[0]).cos()).exp());
        let u0 = space.l2_project(|p| p[0] * (1.0 - p[0])).unwrap();
        let (alpha, tau, steps) = (0.4, 0.02, 80);
        let marched = model.solve(alpha, tau, steps, u0.clone(), &f).unwrap();

        let weights = L1Weights::new(alpha, steps).unwrap();
        let mut traj = Trajectory::new(alpha, tau, u0);
        for n in 1..=steps {
            let load = model.load_at(&f, n as f64 * tau);
            let u = step_full(&model, &weights, &traj, &load).unwrap();
            traj.push(&u).unwrap();
        }
        for n in 0..=steps {
            for (a, b) in marched.state(n).iter().zip(traj.state(n)) {
                assert!((a - b).abs() < 1e-13, "step {n}");
            }
        }
        assert!(marched.consistency_residual(&f).unwrap() < 1e-10);
    }
}
