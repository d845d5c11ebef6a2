//! L1 approximation of the Caputo derivative and the fully discrete
//! Galerkin-L1 scheme.

mod history;
mod problem;
mod stepper;
mod verify;
mod weights;

pub use history::{fdq, fdq_all, history_term, HistoryMixer, Trajectory};
pub use problem::{reference_solution, Domain, FieldFn, ProblemSetup, SourceFn};
pub use stepper::{solve_full, step_full, FullOrderModel, SolutionHistory};
pub use verify::{
    verify_stability, verify_weight_inequalities, StabilityReport, WeightCheck, WeightReport,
    WeightViolation, STABILITY_SLACK,
};
pub use weights::L1Weights;
