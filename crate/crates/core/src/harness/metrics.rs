use crate::error::{check_len, Error, Result};
use crate::fem::{FemSpace, InnerKind};
use crate::l1::{SolutionHistory, Trajectory};
use crate::mlf::SpectralProblem;

/// Maximum and mean-square L² errors over `n = 1 … N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    /// `max_n ‖Uⁿ − u(t_n)‖`
    pub e_max: f64,
    /// `N⁻¹ Σₙ ‖Uⁿ − u(t_n)‖²`
    pub e: f64,
}

fn aligned(a: &Trajectory, b: &Trajectory) -> Result<()> {
    check_len(a.dim(), b.dim())?;
    check_len(a.steps(), b.steps())?;
    let (ta, tb) = (a.tau(), b.tau());
    if (ta - tb).abs() > 1e-12 * ta.max(tb) {
        return Err(Error::InvalidArgument(format!("time steps differ: {ta} vs {tb}")));
    }
    Ok(())
}

/// Errors of `states` against `reference`, both dof trajectories on `space`.
pub fn trajectory_errors(space: &FemSpace, states: &Trajectory, reference: &Trajectory) -> Result<ErrorPair> {
    aligned(states, reference)?;
    let steps = states.steps();
    if steps == 0 {
        return Err(Error::InvalidArgument("no time steps to compare".into()));
    }
    let mut d = vec![0.0; states.dim()];
    let (mut e_max, mut sum): (f64, f64) = (0.0, 0.0);
    for n in 1..=steps {
        for ((di, a), b) in d.iter_mut().zip(states.state(n)).zip(reference.state(n)) {
            *di = a - b;
        }
        let sq = space.inner(&d, &d, InnerKind::L2)?.max(0.0);
        e_max = e_max.max(sq.sqrt());
        sum += sq;
    }
    Ok(ErrorPair { e_max, e: sum / steps as f64 })
}

pub fn error_metrics(history: &SolutionHistory, reference: &SolutionHistory) -> Result<ErrorPair> {
    trajectory_errors(history.space(), history.trajectory(), reference.trajectory())
}

/// Errors against a spectral exact solution, integrated with the high-order
/// element quadrature.
pub fn error_metrics_exact(history: &SolutionHistory, exact: &SpectralProblem) -> Result<ErrorPair> {
    let space = history.space();
    let steps = history.steps();
    let (mut e_max, mut sum): (f64, f64) = (0.0, 0.0);
    for n in 1..=steps {
        let decay = exact.decay_factors(history.time(n))?;
        let err = space.l2_error_against(history.state(n), |p| {
            exact.modes.iter().zip(&decay).map(|(m, d)| d * m.coefficient * m.eigenfunction(p)).sum()
        })?;
        e_max = e_max.max(err);
        sum += err * err;
    }
    Ok(ErrorPair { e_max, e: sum / steps as f64 })
}

/// `log(err_i / err_{i+1}) / log(N_{i+1} / N_i)` between consecutive entries;
/// for doubled `N` this is `log₂(err(N) / err(2N))`.
pub fn rates(sizes: &[usize], errors: &[f64]) -> Vec<f64> {
    sizes
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect()
}

/// Overall slope between the first and last entries.
pub fn overall_rate(sizes: &[usize], errors: &[f64]) -> Option<f64> {
    let (n0, n1) = (*sizes.first()?, *sizes.last()?);
    if n0 == n1 {
        return None;
    }
    let (e0, e1) = (errors[0], errors[errors.len() - 1]);
    Some((e0 / e1).ln() / (n1 as f64 / n0 as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn identical_inputs_have_zero_error() {
        let space = FemSpace::assemble(Mesh::interval(5).unwrap()).unwrap();
        let mut t = Trajectory::new(0.5, 0.1, vec![1.0; 4]);
        t.push(&[2.0; 4]).unwrap();
        let e = trajectory_errors(&space, &t, &t).unwrap();
        assert_eq!((e.e_max, e.e), (0.0, 0.0));
    }

    #[test]
    fn one_dof_offset_by_hand() {
        // single interior node on two cells: M = [1/3]
        let space = FemSpace::assemble(Mesh::interval(2).unwrap()).unwrap();
        let mut a = Trajectory::new(0.5, 0.1, vec![0.0]);
        let mut b = a.clone();
        a.push(&[0.3]).unwrap();
        a.push(&[0.0]).unwrap();
        b.push(&[0.0]).unwrap();
        b.push(&[0.0]).unwrap();
        let e = trajectory_errors(&space, &a, &b).unwrap();
        assert!((e.e_max - (0.09f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((e.e - 0.09 / 3.0 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn misaligned_grids_are_rejected() {
        let space = FemSpace::assemble(Mesh::interval(2).unwrap()).unwrap();
        let mut a = Trajectory::new(0.5, 0.1, vec![0.0]);
        let mut b = Trajectory::new(0.5, 0.2, vec![0.0]);
        a.push(&[1.0]).unwrap();
        b.push(&[1.0]).unwrap();
        assert!(trajectory_errors(&space, &a, &b).is_err());
    }

    #[test]
    fn rates_of_power_law() {
        let sizes = [100, 200, 400];
        let errs: Vec<f64> = sizes.iter().map(|&n| 3.0 * (n as f64).powf(-0.4)).collect();
        for r in rates(&sizes, &errs) {
            assert!((r - 0.4).abs() < 1e-12);
        }
        assert!((overall_rate(&sizes, &errs).unwrap() - 0.4).abs() < 1e-12);
    }
}
