use std::sync::Arc;
use std::time::Instant;

use super::cases::{case_d_perturbed_source, setup_for, single_mode_exact};
use super::config::{CaseId, ExperimentConfig, ReferenceKind};
use super::metrics::{error_metrics, error_metrics_exact, rates, trajectory_errors, ErrorPair};
use super::report::{ConvergenceRow, EigenvalueTable, ErrorReport, PodRow, ReportKind};
use crate::error::{Error, Result};
use crate::fem::InnerKind;
use crate::l1::{
    reference_solution, verify_stability, FullOrderModel, ProblemSetup, SolutionHistory, SourceFn,
    Trajectory,
};
use crate::pod::{build_reduced, collect_snapshots, pod_basis, restrict, solve_reduced, PodBasis};

fn check_stability(report: &mut ErrorReport, label: String, history: &SolutionHistory) -> Result<()> {
    let s = verify_stability(history)?;
    report.stability.push((label, s));
    Ok(())
}

fn fill_rates(rows: &mut [ConvergenceRow]) {
    let sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.errors.e_max).collect();
    for (row, r) in rows.iter_mut().skip(1).zip(rates(&sizes, &errs)) {
        row.rate = Some(r);
    }
}

/// Temporal (or, with `mesh.sweep`, spatial) convergence study.
pub fn run_temporal_convergence(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    if config.mesh.sweep.is_some() {
        return run_spatial_convergence(config);
    }
    let start = Instant::now();
    let mut report = ErrorReport::new(ReportKind::Temporal, config);
    let n_max = *config.steps.last().expect("validated");
    let base = setup_for(config, None, n_max)?;
    let model = base.model()?;

    let fine = match config.reference.kind {
        ReferenceKind::Refined => {
            let r = config.reference.refine;
            let fine = base.refined(r).solve()?;
            check_stability(&mut report, format!("reference N={}", n_max * r), &fine)?;
            Some(fine)
        }
        ReferenceKind::Spectral => None,
    };
    let exact = match config.case {
        CaseId::Custom => Some(single_mode_exact(config.alpha, config.custom.mode)?),
        _ => None,
    };

    for &n in &config.steps {
        let history = base.with_steps(n).solve_on(&model)?;
        check_stability(&mut report, format!("N={n}"), &history)?;
        let errors = match &fine {
            Some(fine) => {
                let r = config.reference.refine;
                let fine_steps = fine.steps();
                if fine_steps % n != 0 {
                    return Err(Error::Config(format!("N = {n} does not divide the reference step count {fine_steps}")));
                }
                let map = model.space().mesh().coarse_to_fine_dofs(fine.space().mesh(), r)?;
                let sampled = fine.trajectory().restrict(fine_steps / n, &map);
                trajectory_errors(model.space(), history.trajectory(), &sampled)?
            }
            None => error_metrics_exact(&history, exact.as_ref().expect("validated"))?,
        };
        report.convergence.push(ConvergenceRow { size: n, step: history.tau(), errors, rate: None });
    }
    fill_rates(&mut report.convergence);
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Spatial convergence at fixed `N = steps[0]` over `mesh.sweep`.
pub fn run_spatial_convergence(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = ErrorReport::new(ReportKind::Spatial, config);
    let sweep = config.mesh.sweep.clone().ok_or_else(|| Error::Config("mesh.sweep missing".into()))?;
    if sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("mesh.sweep {sweep:?} not strictly increasing")));
    }
    let steps = config.steps[0];
    let exact = match config.case {
        CaseId::Custom => Some(single_mode_exact(config.alpha, config.custom.mode)?),
        _ => None,
    };
    let fine = match config.reference.kind {
        ReferenceKind::Refined => {
            let cells = config
                .reference
                .cells
                .unwrap_or(*sweep.last().expect("nonempty") * config.reference.refine);
            let fine = setup_for(config, Some(cells), steps)?.solve()?;
            check_stability(&mut report, format!("reference cells={cells}"), &fine)?;
            Some((cells, fine))
        }
        ReferenceKind::Spectral => None,
    };
    for &cells in &sweep {
        let history = setup_for(config, Some(cells), steps)?.solve()?;
        check_stability(&mut report, format!("cells={cells}"), &history)?;
        let errors = match &fine {
            Some((fine_cells, fine)) => {
                if fine_cells % cells != 0 {
                    return Err(Error::Config(format!("{cells} cells do not nest in {fine_cells}")));
                }
                let r = fine_cells / cells;
                let space = history.space();
                let prolonged = history.trajectory().map_states(fine.space().num_dofs(), |s| {
                    space.prolong(fine.space(), r, s).expect("nested meshes")
                });
                trajectory_errors(fine.space(), &prolonged, fine.trajectory())?
            }
            None => error_metrics_exact(&history, exact.as_ref().expect("validated"))?,
        };
        report.convergence.push(ConvergenceRow {
            size: cells,
            step: history.space().mesh().h(),
            errors,
            rate: None,
        });
    }
    fill_rates(&mut report.convergence);
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Outcome of one reduced run.
#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub basis: PodBasis,
    pub lifted: Trajectory,
}

/// Builds a rank-`m` basis from `snapshots` and solves the reduced problem
/// with the data of `truth` (initial value and loads).
pub fn reduced_run(
    snapshots: &SolutionHistory,
    truth: &SolutionHistory,
    full_loads: &[Vec<f64>],
    inner: InnerKind,
    include_fdq: bool,
    m: usize,
) -> Result<ReducedRun> {
    let set = collect_snapshots(snapshots, include_fdq, inner)?;
    let basis = pod_basis(&set, m)?;
    reduced_run_on(&basis, truth, full_loads)
}

pub fn reduced_run_on(basis: &PodBasis, truth: &SolutionHistory, full_loads: &[Vec<f64>]) -> Result<ReducedRun> {
    let reduced = build_reduced(basis, truth.model(), truth.state(0))?;
    let loads: Vec<Vec<f64>> = full_loads.iter().map(|l| restrict(basis, l)).collect::<Result<_>>()?;
    let traj = solve_reduced(&reduced, truth.alpha(), truth.tau(), truth.steps(), &loads)?;
    Ok(ReducedRun { basis: basis.clone(), lifted: reduced.lift_trajectory(&traj)? })
}

fn reference_for(config: &ExperimentConfig, setup: &ProblemSetup) -> Result<Option<SolutionHistory>> {
    match config.reference.kind {
        ReferenceKind::Refined => Ok(Some(reference_solution(setup, config.reference.refine)?)),
        ReferenceKind::Spectral => Ok(None),
    }
}

fn pod_study(
    config: &ExperimentConfig,
    kind: ReportKind,
    snapshot_source: Option<SourceFn>,
) -> Result<ErrorReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = ErrorReport::new(kind, config);
    let steps = *config.steps.last().expect("validated");
    let setup = setup_for(config, None, steps)?;
    let model: Arc<FullOrderModel> = setup.model()?;
    let truth = setup.solve_on(&model)?;
    check_stability(&mut report, format!("full N={steps}"), &truth)?;
    let snapshots = match snapshot_source {
        Some(src) => {
            let h = setup.with_source(src).solve_on(&model)?;
            check_stability(&mut report, format!("snapshots N={steps}"), &h)?;
            h
        }
        None => truth.clone(),
    };

    let reference = reference_for(config, &setup)?;
    if let Some(r) = &reference {
        check_stability(&mut report, "reference".into(), r)?;
        report.full_error = Some(error_metrics(&truth, r)?);
    } else if config.case == CaseId::Custom {
        report.full_error = Some(error_metrics_exact(&truth, &single_mode_exact(config.alpha, config.custom.mode)?)?);
    }

    let full_loads = model.loads(&setup.source, setup.tau(), steps);
    let mut eig = EigenvalueTable::default();
    for &inner in &config.pod.inner {
        for &fdq in &config.pod.include_fdq {
            let set = collect_snapshots(&snapshots, fdq, inner)?;
            let full_basis = pod_basis(&set, 1)?;
            *eig.column_mut(inner, fdq) = full_basis.eigenvalues().to_vec();
            for &m in &config.pod.m {
                let basis = full_basis.with_active(m)?;
                let run = reduced_run_on(&basis, &truth, &full_loads)?;
                let vs_full = trajectory_errors(truth.space(), &run.lifted, truth.trajectory())?;
                let vs_reference = match &reference {
                    Some(r) => Some(trajectory_errors(truth.space(), &run.lifted, r.trajectory())?),
                    None => None,
                };
                report.pod.push(PodRow { inner, include_fdq: fdq, m, rank: basis.rank(), vs_full, vs_reference });
            }
        }
    }
    report.eigenvalues = Some(eig);
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Snapshots and reduced model from the same problem.
pub fn run_pod_experiment(config: &ExperimentConfig) -> Result<ErrorReport> {
    pod_study(config, ReportKind::Pod, None)
}

/// Snapshots from the perturbed source, reduced model driven by the true one.
pub fn run_perturbed_experiment(config: &ExperimentConfig) -> Result<ErrorReport> {
    if config.case != CaseId::D {
        return Err(Error::Config("the perturbed experiment is defined for case d".into()));
    }
    pod_study(config, ReportKind::Perturbed, Some(case_d_perturbed_source()))
}

/// Same as [`run_pod_experiment`] with an explicit snapshot source, which
/// may equal the true one.
pub fn run_pod_with_snapshot_source(config: &ExperimentConfig, source: SourceFn) -> Result<ErrorReport> {
    pod_study(config, ReportKind::Perturbed, Some(source))
}

/// Eigenvalues of the four correlation matrices of one full-order run.
pub fn run_eigenvalues(config: &ExperimentConfig) -> Result<EigenvalueTable> {
    config.validate()?;
    let steps = *config.steps.last().expect("validated");
    let setup = setup_for(config, None, steps)?;
    let history = match config.case {
        CaseId::D => setup.with_source(case_d_perturbed_source()).solve()?,
        _ => setup.solve()?,
    };
    let mut eig = EigenvalueTable::default();
    for inner in [InnerKind::H1, InnerKind::L2] {
        for fdq in [true, false] {
            let set = collect_snapshots(&history, fdq, inner)?;
            *eig.column_mut(inner, fdq) = pod_basis(&set, 1)?.eigenvalues().to_vec();
        }
    }
    Ok(eig)
}

/// Single full-order run and its errors against the configured reference.
pub fn run_single(config: &ExperimentConfig) -> Result<(SolutionHistory, Option<ErrorPair>)> {
    config.validate()?;
    let steps = *config.steps.last().expect("validated");
    let setup = setup_for(config, None, steps)?;
    let history = setup.solve()?;
    let errors = match config.reference.kind {
        ReferenceKind::Spectral => Some(error_metrics_exact(&history, &single_mode_exact(config.alpha, config.custom.mode)?)?),
        ReferenceKind::Refined if config.reference.refine > 1 => {
            Some(error_metrics(&history, &reference_solution(&setup, config.reference.refine)?)?)
        }
        ReferenceKind::Refined => None,
    };
    Ok((history, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn single_mode_temporal_rate_near_alpha() {
        let c = config(
            r#"
case = "custom"
alpha = 0.5
t_final = 0.1
steps = [640, 1280, 2560]
[mesh]
cells = 64
[reference]
kind = "spectral"
"#,
        );
        let r = run_temporal_convergence(&c).unwrap();
        let rate = r.convergence.last().unwrap().rate.unwrap();
        assert!((rate - 0.5).abs() < 0.1, "rate {rate}");
        assert!(r.stability.iter().all(|(_, s)| s.holds()));
    }

    #[test]
    fn pod_errors_decrease_and_snapshot_source_equal_to_truth_matches() {
        let text = r#"
case = "a"
alpha = 0.5
t_final = 1.0
steps = [40]
[mesh]
cells = 32
[reference]
kind = "refined"
refine = 1
[pod]
m = [1, 2, 3]
"#;
        let c = config(text);
        let a = run_pod_experiment(&c).unwrap();
        for group in a.pod.chunks(3) {
            assert!(group.windows(2).all(|w| w[1].vs_full.e <= w[0].vs_full.e));
        }
        let setup = setup_for(&c, None, 40).unwrap();
        let b = run_pod_with_snapshot_source(&c, setup.source.clone()).unwrap();
        for (x, y) in a.pod.iter().zip(&b.pod) {
            assert_eq!(x.vs_full.e, y.vs_full.e);
        }
        let eig = a.eigenvalues.unwrap();
        assert!(eig.h1_fdq[0] > eig.h1_fdq[1]);
    }
}
