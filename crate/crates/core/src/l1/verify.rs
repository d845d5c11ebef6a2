use super::stepper::SolutionHistory;
use super::L1Weights;
use crate::error::{Error, Result};

/// Relative slack allowed on the discrete stability estimate.
pub const STABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub checked: usize,
    /// `(n, ‖Uⁿ‖, bound)` for every step where the bound is exceeded.
    pub violations: Vec<(usize, f64, f64)>,
    /// `max_n (‖Uⁿ‖ − bound) / bound`; nonpositive when the estimate holds.
    pub max_margin: f64,
}

impl StabilityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖Uⁿ‖ ≤ ‖U⁰‖ + c_α τ^α Σ_{k=0}^{n−1} (n−k)^{α−1} ‖F^{k+1}‖` for every
/// step of a run.
pub fn verify_stability(history: &SolutionHistory) -> Result<StabilityReport> {
    let steps = history.steps();
    let alpha = history.alpha();
    let norms = history.l2_norms()?;
    let loads = history.load_norms();
    let scale = L1Weights::new(alpha, 1)?.scale(history.tau());
    // kernel[m] = m^{α−1}
    let kernel: Vec<f64> = (0..=steps).map(|m| (m as f64).powf(alpha - 1.0)).collect();
    let mut report = StabilityReport { checked: 0, violations: Vec::new(), max_margin: f64::NEG_INFINITY };
    for n in 1..=steps {
        let sum: f64 = (0..n).map(|k| kernel[n - k] * loads[k + 1]).sum();
        let bound = norms[0] + scale * sum;
        let margin = if bound > 0.0 { (norms[n] - bound) / bound } else { norms[n] };
        report.max_margin = report.max_margin.max(margin);
        report.checked += 1;
        if margin > STABILITY_SLACK {
            report.violations.push((n, norms[n], bound));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightCheck {
    /// `Σ_{j=1}^{n}(b_{j−1}−b_j)(n+1−j)^{α−1} ≤ (n+1)^{α−1}`
    KernelSum,
    /// `(j−1)n^{α−2}b_{j−1} + (n−j)n^{α−2}b_j ≤ (n+1)^{α−1}b_j`, `2 ≤ j ≤ n−1`
    MiddleTerm,
    /// `n^{α−1}Σ_{j<n} b_j f(j/n) ≤ (n+1)^{α−1}Σ_{j≤n} b_j f(j/(n+1))` for
    /// `f(x) = (1−x)^{α−1} − 1`
    ConvexQuadrature,
    /// `b₀ = 1`, `b_j` positive and strictly decreasing, `Σ b_j = n^{1−α}`
    WeightIdentity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightViolation {
    pub check: WeightCheck,
    pub alpha: f64,
    pub n: usize,
    pub j: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightReport {
    pub checks: usize,
    pub violations: Vec<WeightViolation>,
}

/// Relative roundoff slack for comparisons of computed sums.
const WEIGHT_SLACK: f64 = 1e-13;

/// Brute-force verification of the L1 weight inequalities for every `α` in
/// the grid and every `n ≤ n_max`.
pub fn verify_weight_inequalities(alpha_grid: &[f64], n_max: usize) -> Result<WeightReport> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must be at least 2")));
    }
    let mut report = WeightReport::default();
    for &alpha in alpha_grid {
        let w = L1Weights::new(alpha, n_max + 1)?;
        let push = |check, n, j, lhs: f64, rhs: f64, report: &mut WeightReport| {
            report.checks += 1;
            if lhs > rhs + WEIGHT_SLACK * rhs.abs().max(lhs.abs()) {
                report.violations.push(WeightViolation { check, alpha, n, j, lhs, rhs });
            }
        };

        // identities
        push(WeightCheck::WeightIdentity, 0, Some(0), (w.b(0) - 1.0).abs(), 0.0, &mut report);
        let mut running = 0.0;
        for n in 1..=n_max {
            let j = n - 1;
            push(WeightCheck::WeightIdentity, n, Some(j), -w.b(j), 0.0, &mut report);
            if j > 0 {
                // strict decrease: b_j − b_{j−1} < 0
                let d = w.b(j) - w.b(j - 1);
                if d >= 0.0 {
                    push(WeightCheck::WeightIdentity, n, Some(j), d, -f64::MIN_POSITIVE, &mut report);
                }
            }
            running += w.b(j);
            let want = (n as f64).powf(1.0 - alpha);
            let rel = (running - want).abs() / want;
            push(WeightCheck::WeightIdentity, n, None, rel, 1e-12, &mut report);
        }

        let am1 = alpha - 1.0;
        let pow: Vec<f64> = (0..=n_max + 1).map(|m| (m as f64).powf(am1)).collect();
        for n in 1..=n_max {
            let lhs: f64 = (1..=n).map(|j| w.decrement(j) * pow[n + 1 - j]).sum();
            push(WeightCheck::KernelSum, n, None, lhs, pow[n + 1], &mut report);

            let nf = n as f64;
            let na2 = nf.powf(alpha - 2.0);
            for j in 2..n {
                let lhs = (j - 1) as f64 * na2 * w.b(j - 1) + (n - j) as f64 * na2 * w.b(j);
                push(WeightCheck::MiddleTerm, n, Some(j), lhs, pow[n + 1] * w.b(j), &mut report);
            }

            let f = |x: f64| (1.0 - x).powf(am1) - 1.0;
            let left: f64 = nf.powf(am1) * (0..n).map(|j| w.b(j) * f(j as f64 / nf)).sum::<f64>();
            let right: f64 =
                (nf + 1.0).powf(am1) * (0..=n).map(|j| w.b(j) * f(j as f64 / (nf + 1.0))).sum::<f64>();
            push(WeightCheck::ConvexQuadrature, n, None, left, right, &mut report);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_has_no_violations() {
        let r = verify_weight_inequalities(&[0.1, 0.5, 0.9], 60).unwrap();
        assert!(r.violations.is_empty(), "{:?}", &r.violations[..r.violations.len().min(3)]);
        assert!(r.checks > 3 * 60);
    }

    #[test]
    fn kernel_sum_at_n_equals_two_by_hand() {
        // (b0 − b1)·2^{α−1} + (b1 − b2)·1 ≤ 3^{α−1}
        let a: f64 = 0.5;
        let (b0, b1, b2) = (1.0, 2f64.sqrt() - 1.0, 3f64.sqrt() - 2f64.sqrt());
        let lhs = (b0 - b1) * 2f64.powf(a - 1.0) + (b1 - b2);
        assert!(lhs <= 3f64.powf(a - 1.0));
        let r = verify_weight_inequalities(&[a], 2).unwrap();
        assert!(r.violations.is_empty());
    }

    #[test]
    fn rejects_tiny_range() {
        assert!(verify_weight_inequalities(&[0.5], 1).is_err());
        assert!(verify_weight_inequalities(&[1.5], 4).is_err());
    }
}
