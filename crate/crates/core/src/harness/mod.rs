//! Experiment configurations, error metrics and CSV reports.

mod cases;
mod config;
mod experiments;
mod metrics;
mod report;

pub use cases::{
    approx_delta, case_a, case_b, case_d, case_d_perturbed_source, case_d_potential, setup_for, single_mode,
    single_mode_exact,
};
pub use config::{CaseId, CustomConfig, ExperimentConfig, MeshConfig, PodConfig, ReferenceConfig, ReferenceKind};
pub use experiments::{
    reduced_run, reduced_run_on, run_eigenvalues, run_perturbed_experiment, run_pod_experiment,
    run_pod_with_snapshot_source, run_single, run_spatial_convergence, run_temporal_convergence, ReducedRun,
};
pub use metrics::{error_metrics, error_metrics_exact, overall_rate, rates, trajectory_errors, ErrorPair};
pub use report::{
    eigenvalue_report, num, ConvergenceRow, EigenvalueTable, ErrorReport, PodRow, ReportKind, EIGENVALUE_HEADER,
};
