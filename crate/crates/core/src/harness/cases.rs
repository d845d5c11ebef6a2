use std::f64::consts::PI;
use std::sync::Arc;

use super::config::{CaseId, ExperimentConfig};
use crate::error::{Error, Result};
use crate::l1::{Domain, FieldFn, ProblemSetup, SourceFn};
use crate::mesh::Rect;
use crate::mlf::SpectralProblem;

/// Smoothed point mass `δ_n(x) = n / (2 cosh²(n x))`; integrates to one.
pub fn approx_delta(n: f64, x: f64) -> f64 {
    let c = (n * x).cosh();
    n / (2.0 * c * c)
}

fn one_d_source() -> SourceFn {
    Arc::new(|p, t| (t * (2.0 * PI * p[0]).cos()).exp())
}

pub fn case_a(alpha: f64, cells: usize, t_final: f64, steps: usize) -> ProblemSetup {
    ProblemSetup {
        domain: Domain::Interval { cells },
        alpha,
        t_final,
        steps,
        initial: Arc::new(|p| p[0] * (1.0 - p[0])),
        source: one_d_source(),
        potential: None,
    }
}

pub fn case_b(alpha: f64, cells: usize, t_final: f64, steps: usize) -> ProblemSetup {
    ProblemSetup {
        initial: Arc::new(|p| if p[0] < 0.5 { 1.0 } else { 0.0 }),
        ..case_a(alpha, cells, t_final, steps)
    }
}

pub fn case_d_potential() -> FieldFn {
    Arc::new(|p| 1.0 + (PI * p[0]).cos() * (2.0 * PI * p[1]).sin())
}

pub fn case_d(alpha: f64, nx: usize, ny: usize, t_final: f64, steps: usize) -> ProblemSetup {
    ProblemSetup {
        domain: Domain::Rectangle { nx, ny, extent: Rect::UNIT },
        alpha,
        t_final,
        steps,
        initial: Arc::new(|p| p[0] * (1.0 - p[0]) * (2.0 * PI * p[1]).sin()),
        source: Arc::new(|p, t| {
            approx_delta(2.0, p[0] - 0.5) * approx_delta(2.0, p[1] - 0.5) * t.cos().exp()
        }),
        potential: Some(case_d_potential()),
    }
}

/// Time-independent source used to generate snapshots for case d.
pub fn case_d_perturbed_source() -> SourceFn {
    Arc::new(|p, _| approx_delta(10.0, p[0] - 0.5) * approx_delta(10.0, p[1] - 0.5))
}

/// Homogeneous problem with `v = sin(kπx)` on the unit interval.
pub fn single_mode(alpha: f64, k: usize, cells: usize, t_final: f64, steps: usize) -> ProblemSetup {
    let kf = k as f64 * PI;
    ProblemSetup {
        domain: Domain::Interval { cells },
        alpha,
        t_final,
        steps,
        initial: Arc::new(move |p| (kf * p[0]).sin()),
        source: Arc::new(|_, _| 0.0),
        potential: None,
    }
}

pub fn single_mode_exact(alpha: f64, k: usize) -> Result<SpectralProblem> {
    SpectralProblem::single_sine(alpha, k, 1.0)
}

/// Problem described by a configuration, on `cells` (1D) or `nx × ny` (2D)
/// cells with `steps` time steps.
pub fn setup_for(config: &ExperimentConfig, cells: Option<usize>, steps: usize) -> Result<ProblemSetup> {
    let (a, t) = (config.alpha, config.t_final);
    let cells = cells.or(config.mesh.cells);
    let need = || Error::Config("mesh size missing".into());
    Ok(match config.case {
        CaseId::A => case_a(a, cells.ok_or_else(need)?, t, steps),
        CaseId::B => case_b(a, cells.ok_or_else(need)?, t, steps),
        CaseId::Custom => single_mode(a, config.custom.mode, cells.ok_or_else(need)?, t, steps),
        CaseId::D => {
            let nx = cells.or(config.mesh.nx).ok_or_else(need)?;
            let ny = cells.or(config.mesh.ny).ok_or_else(need)?;
            case_d(a, nx, ny, t, steps)
        }
    })
}
