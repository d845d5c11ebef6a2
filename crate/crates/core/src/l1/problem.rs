use std::sync::Arc;

use super::stepper::{FullOrderModel, SolutionHistory};
use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::mesh::{Mesh, Rect};
use crate::Point;

pub type FieldFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type SourceFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Unit interval split into `cells` subintervals.
    Interval { cells: usize },
    Rectangle { nx: usize, ny: usize, extent: Rect },
}

impl Domain {
    pub fn mesh(&self) -> Result<Mesh> {
        match *self {
            Domain::Interval { cells } => Mesh::interval(cells),
            Domain::Rectangle { nx, ny, extent } => Mesh::rectangle(nx, ny, extent),
        }
    }

    pub fn refined(&self, refine: usize) -> Domain {
        match *self {
            Domain::Interval { cells } => Domain::Interval { cells: cells * refine },
            Domain::Rectangle { nx, ny, extent } => {
                Domain::Rectangle { nx: nx * refine, ny: ny * refine, extent }
            }
        }
    }
}

/// Everything needed to run the full-order scheme from scratch.
#[derive(Clone)]
pub struct ProblemSetup {
    pub domain: Domain,
    pub alpha: f64,
    pub t_final: f64,
    pub steps: usize,
    pub initial: FieldFn,
    pub source: SourceFn,
    pub potential: Option<FieldFn>,
}

impl std::fmt::Debug for ProblemSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSetup")
            .field("domain", &self.domain)
            .field("alpha", &self.alpha)
            .field("t_final", &self.t_final)
            .field("steps", &self.steps)
            .field("potential", &self.potential.is_some())
            .finish()
    }
}

impl ProblemSetup {
    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Same problem with mesh and time step both refined by `refine`.
    pub fn refined(&self, refine: usize) -> ProblemSetup {
        ProblemSetup { domain: self.domain.refined(refine), steps: self.steps * refine, ..self.clone() }
    }

    pub fn with_steps(&self, steps: usize) -> ProblemSetup {
        ProblemSetup { steps, ..self.clone() }
    }

    pub fn with_source(&self, source: SourceFn) -> ProblemSetup {
        ProblemSetup { source, ..self.clone() }
    }

    pub fn model(&self) -> Result<Arc<FullOrderModel>> {
        let space = Arc::new(FemSpace::assemble(self.domain.mesh()?)?);
        Ok(Arc::new(match &self.potential {
            Some(q) => FullOrderModel::with_potential(space, |p| q(p))?,
            None => FullOrderModel::new(space),
        }))
    }

    /// Runs the scheme with `U⁰ = P_h v` on a freshly assembled model.
    pub fn solve(&self) -> Result<SolutionHistory> {
        self.solve_on(&self.model()?)
    }

    /// Runs the scheme on a prebuilt model (which must match `domain`).
    pub fn solve_on(&self, model: &Arc<FullOrderModel>) -> Result<SolutionHistory> {
        if self.steps == 0 || !(self.t_final > 0.0) {
            return Err(Error::InvalidArgument("need steps >= 1 and T > 0".into()));
        }
        let initial = model.space().l2_project(|p| (self.initial)(p))?;
        model.solve(self.alpha, self.tau(), self.steps, initial, &self.source)
    }
}

/// Refined full-order solve sampled back onto the coarse nodes and time
/// grid of `setup`.
pub fn reference_solution(setup: &ProblemSetup, refine: usize) -> Result<SolutionHistory> {
    if refine == 0 {
        return Err(Error::InvalidArgument("refinement factor must be positive".into()));
    }
    let coarse_model = setup.model()?;
    if refine == 1 {
        return setup.solve_on(&coarse_model);
    }
    let fine = setup.refined(refine).solve()?;
    let map = coarse_model
        .space()
        .mesh()
        .coarse_to_fine_dofs(fine.space().mesh(), refine)?;
    let traj = fine.trajectory().restrict(refine, &map);
    let load_norms = fine.load_norms().iter().step_by(refine).copied().collect();
    SolutionHistory::new(coarse_model, traj, load_norms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(initial: FieldFn, source: SourceFn) -> ProblemSetup {
        ProblemSetup {
            domain: Domain::Interval { cells: 6 },
            alpha: 0.5,
            t_final: 0.1,
            steps: 4,
            initial,
            source,
            potential: None,
        }
    }

    #[test]
    fn refine_one_is_the_base_solve() {
        let s = setup(Arc::new(|p: &Point| p[0] * (1.0 - p[0])), Arc::new(|_: &Point, t: f64| 1.0 + t));
        let a = s.solve().unwrap();
        let b = reference_solution(&s, 1).unwrap();
        assert_eq!(a.trajectory(), b.trajectory());
    }

    #[test]
    fn restriction_samples_shared_nodes_and_times() {
        let s = setup(Arc::new(|p: &Point| (3.0 * p[0]).sin()), Arc::new(|p: &Point, t: f64| p[0] + t));
        let r = reference_solution(&s, 2).unwrap();
        let fine = s.refined(2).solve().unwrap();
        assert_eq!(r.steps(), 4);
        assert_eq!(r.tau(), s.tau());
        // coarse dof k sits on fine dof 2k + 1
        for n in 0..=4 {
            for k in 0..5 {
                assert_eq!(r.state(n)[k], fine.state(2 * n)[2 * k + 1]);
            }
        }
    }
}
