//! Mittag-Leffler functions and spectral reference solutions.
//!
//! `E_{α,β}(z) = Σ_k z^k / Γ(αk + β)`.
//!
//! On the negative real axis the power series suffers catastrophic
//! cancellation once `|z|` grows (for small α already at `|z| ≈ 2`), so the
//! evaluation switches to the real-line integral representation
//!
//! ```text
//! E_{α,β}(z) = ∫₀^∞ K(r) dr  [+ P(z) for 1 < α < 2],
//! K(r) = r^{(1-β)/α} e^{-r^{1/α}} (r sin(π(1-β)) - z sin(π(1-β+α)))
//!        / (πα (r² - 2rz cos(πα) + z²)),
//! ```
//!
//! valid for `β < 1 + α`; larger β are brought into range with
//! `E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::Point;

/// Series/integral switch on the negative axis.
pub const BRANCH_SWITCH: f64 = 5.0;

/// Largest series term magnitude tolerated before the series is considered
/// too ill-conditioned near the switch.
const SERIES_CONDITION_LIMIT: f64 = 10.0;

/// Ill-conditioning limit for α ∈ {1, 2} where no integral branch exists.
const SERIES_HARD_LIMIT: f64 = 1e10;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `1/Γ(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// Mittag-Leffler function `E_{α,β}(z)` for real `z`, `α ∈ (0, 2]`, `β > 0`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 2]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z = {z} is not finite")));
    }
    if z == 0.0 {
        return Ok(rgamma(beta));
    }
    if z > 0.0 {
        return Ok(series(alpha, beta, z));
    }
    let condition = max_series_term(alpha, beta, z);
    let series_ok = z.abs() <= BRANCH_SWITCH && condition <= SERIES_CONDITION_LIMIT;
    if series_ok {
        return Ok(series(alpha, beta, z));
    }
    if alpha == 1.0 || alpha == 2.0 {
        if condition <= SERIES_HARD_LIMIT {
            return Ok(series(alpha, beta, z));
        }
        return Err(Error::InvalidArgument(format!(
            "E_{{{alpha},{beta}}}({z}) outside the supported range"
        )));
    }
    Ok(negative_axis_integral(alpha, beta, z))
}

/// Power series branch, evaluated without the switch logic.
pub fn mittag_leffler_series(alpha: f64, beta: f64, z: f64) -> f64 {
    series(alpha, beta, z)
}

/// Integral-representation branch for `z < 0`, `α ∈ (0, 2)`, `α ≠ 1`.
pub fn mittag_leffler_integral(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(z < 0.0) || !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 || !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integral representation needs z < 0, alpha in (0,1)∪(1,2), beta > 0; got ({alpha}, {beta}, {z})"
        )));
    }
    Ok(negative_axis_integral(alpha, beta, z))
}

fn max_series_term(alpha: f64, beta: f64, z: f64) -> f64 {
    let lz = z.abs().ln();
    let mut best = f64::NEG_INFINITY;
    let mut k = 0usize;
    loop {
        let v = k as f64 * lz - ln_gamma(alpha * k as f64 + beta);
        best = best.max(v);
        if v < best - 40.0 || k > 100_000 {
            break;
        }
        k += 1;
    }
    best.exp()
}

fn series(alpha: f64, beta: f64, z: f64) -> f64 {
    // Neumaier-compensated summation
    let mut sum = 0.0;
    let mut comp = 0.0;
    let lz = z.abs().ln();
    let sign = z.signum();
    let integer_alpha = alpha == alpha.floor();
    let mut term = rgamma(beta);
    let mut small = 0;
    for k in 0..20_000usize {
        if k > 0 {
            term = if integer_alpha && term != 0.0 {
                // Γ(α(k-1)+β) / Γ(αk+β) as an exact rational product
                let mut t = term * z;
                let base = alpha * (k - 1) as f64 + beta;
                for i in 0..alpha as usize {
                    t /= base + i as f64;
                }
                t
            } else {
                let s = if k % 2 == 1 { sign } else { 1.0 };
                let x = alpha * k as f64 + beta;
                let direct = z.abs().powi(k as i32) * rgamma(x);
                let mag = if x > 170.0 || !direct.is_finite() {
                    (k as f64 * lz - ln_gamma(x)).exp()
                } else {
                    direct
                };
                s * mag
            };
        }
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term.abs() <= f64::EPSILON * 1e-3 * (sum + comp).abs() {
            small += 1;
            if small > 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum + comp
}

fn negative_axis_integral(alpha: f64, beta: f64, z: f64) -> f64 {
    if beta >= 1.0 + alpha {
        let lower = negative_axis_integral(alpha, beta - alpha, z);
        return (lower - rgamma(beta - alpha)) / z;
    }
    let x = -z;
    let s1 = (PI * (1.0 - beta)).sin();
    let s2 = (PI * (1.0 - beta + alpha)).sin();
    let cos_a = (PI * alpha).cos();
    let p = (1.0 - beta) / alpha;
    let kernel = |r: f64| {
        if r == 0.0 && p < 0.0 {
            return 0.0;
        }
        let w = if p == 0.0 { 1.0 } else { r.powf(p) };
        let num = r * s1 + x * s2;
        let den = r * r + 2.0 * r * x * cos_a + x * x;
        w * (-r.powf(1.0 / alpha)).exp() * num / den / (PI * alpha)
    };
    // e^{-r^{1/α}} below 1e-300 beyond r^{1/α} = 700
    let upper = 700f64.powf(alpha);
    let mut breaks = vec![0.0];
    for b in [x, 2.0 * x + 1.0] {
        if b < upper {
            breaks.push(b);
        }
    }
    breaks.push(upper);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive_gauss_kronrod(&kernel, w[0], w[1], 1e-15, 1e-14);
    }
    if alpha > 1.0 {
        let root = x.powf(1.0 / alpha);
        let (sn, cs) = (PI / alpha).sin_cos();
        total += (2.0 / alpha)
            * x.powf((1.0 - beta) / alpha)
            * (root * cs).exp()
            * (root * sn + PI * (1.0 - beta) / alpha).cos();
    }
    total
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK15_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]`.
pub fn adaptive_gauss_kronrod(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    let mut pieces = vec![{
        let (v, e) = gk15(f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..4000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    pieces.iter().map(|p| p.2).sum()
}

/// One Dirichlet eigenmode of `−Δ` on the unit interval or unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// `(k₁, k₂)`; `k₂ == 0` in one dimension.
    pub wavenumbers: (usize, usize),
    pub eigenvalue: f64,
    /// `(v, φ_k)` for the L²-normalized eigenfunction `φ_k`.
    pub coefficient: f64,
}

impl Mode {
    pub fn eigenfunction(&self, p: &Point) -> f64 {
        let (k1, k2) = self.wavenumbers;
        let s1 = (k1 as f64 * PI * p[0]).sin();
        if k2 == 0 {
            std::f64::consts::SQRT_2 * s1
        } else {
            2.0 * s1 * (k2 as f64 * PI * p[1]).sin()
        }
    }
}

/// A truncated eigenfunction expansion of the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProblem {
    pub alpha: f64,
    /// Sorted by ascending eigenvalue.
    pub modes: Vec<Mode>,
}

impl SpectralProblem {
    pub fn new(alpha: f64, mut modes: Vec<Mode>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1)")));
        }
        if modes.iter().any(|m| !(m.eigenvalue > 0.0) || !m.coefficient.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be positive".into()));
        }
        modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        Ok(Self { alpha, modes })
    }

    /// Initial data `c · sin(kπx)` on (0, 1).
    pub fn single_sine(alpha: f64, k: usize, amplitude: f64) -> Result<Self> {
        let kf = k as f64 * PI;
        Self::new(
            alpha,
            vec![Mode {
                wavenumbers: (k, 0),
                eigenvalue: kf * kf,
                coefficient: amplitude / std::f64::consts::SQRT_2,
            }],
        )
    }

    /// Expansion of `v` on (0, 1) in the first `modes` sine functions, with
    /// coefficients from composite 5-point Gauss quadrature on `cells` equal
    /// subintervals (choose `cells` so that any jump of `v` is a cell edge).
    pub fn sine_series_1d(
        alpha: f64,
        v: impl Fn(f64) -> f64,
        modes: usize,
        cells: usize,
    ) -> Result<Self> {
        let h = 1.0 / cells as f64;
        let rule = [
            (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
            (0.230_765_344_947_158_45, 0.239_314_335_249_683_2),
            (0.5, 0.284_444_444_444_444_4),
            (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
            (0.953_089_922_969_332, 0.118_463_442_528_094_5),
        ];
        let samples: Vec<(f64, f64)> = (0..cells)
            .flat_map(|c| rule.iter().map(move |&(s, w)| ((c as f64 + s) * h, w * h)))
            .map(|(x, w)| (x, w * v(x)))
            .collect();
        let list = (1..=modes)
            .map(|k| {
                let kf = k as f64 * PI;
                let c: f64 = samples.iter().map(|&(x, wv)| wv * (kf * x).sin()).sum();
                Mode {
                    wavenumbers: (k, 0),
                    eigenvalue: kf * kf,
                    coefficient: std::f64::consts::SQRT_2 * c,
                }
            })
            .collect();
        Self::new(alpha, list)
    }

    /// `Σ_k E_{α,1}(−λ_k t^α) (v, φ_k) φ_k(x)` at each point.
    pub fn exact_homogeneous(&self, t: f64, points: &[Point]) -> Result<Vec<f64>> {
        let decay = self.decay_factors(t)?;
        Ok(points
            .iter()
            .map(|p| {
                self.modes
                    .iter()
                    .zip(&decay)
                    .map(|(m, d)| d * m.coefficient * m.eigenfunction(p))
                    .sum()
            })
            .collect())
    }

    /// `E_{α,1}(−λ_k t^α)` for every mode.
    pub fn decay_factors(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        let ta = t.powf(self.alpha);
        self.modes
            .iter()
            .map(|m| if t == 0.0 { Ok(1.0) } else { mittag_leffler(self.alpha, 1.0, -m.eigenvalue * ta) })
            .collect()
    }

    /// L² truncation error of the expansion, given `‖v‖²_{L²}` (Parseval).
    pub fn truncation_error(&self, v_norm_sq: f64) -> f64 {
        let kept: f64 = self.modes.iter().map(|m| m.coefficient * m.coefficient).sum();
        (v_norm_sq - kept).max(0.0).sqrt()
    }
}
