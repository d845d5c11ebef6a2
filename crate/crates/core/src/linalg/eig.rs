use super::DenseSym;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector belonging to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl EigResult {
    /// Number of eigenvalues above [`rank_cutoff`].
    pub fn rank(&self) -> usize {
        let cut = rank_cutoff(&self.eigenvalues);
        self.eigenvalues.iter().take_while(|&&l| l > cut).count()
    }
}

/// Threshold below which eigenvalues count as zero:
/// `max(λ₁, 0) · n · ε · 10³`.
pub fn rank_cutoff(eigenvalues: &[f64]) -> f64 {
    let lead = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    lead * eigenvalues.len() as f64 * f64::EPSILON * 1e3
}

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations.
pub fn sym_eig(matrix: &DenseSym) -> Result<EigResult> {
    let n = matrix.n();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut a = matrix.clone().into_entries();
    // rows of `vt` are the eigenvectors
    let mut vt = DenseSym::identity(n).into_entries();
    let mut diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    // diagonal updates are accumulated separately to limit roundoff
    let mut z = vec![0.0; n];
    let mut b = diag.clone();

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].abs())
            .sum();
        if off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        let threshold = if sweeps < 4 { 0.2 * off / (n * n) as f64 } else { 0.0 };

        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 4
                    && diag[p].abs() + g == diag[p].abs()
                    && diag[q].abs() + g == diag[q].abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold {
                    continue;
                }
                let h = diag[q] - diag[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let hh = t * apq;
                z[p] -= hh;
                z[q] += hh;
                diag[p] -= hh;
                diag[q] += hh;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    let new_p = akp - s * (akq + akp * tau);
                    let new_q = akq + s * (akp - akq * tau);
                    a[p * n + k] = new_p;
                    a[k * n + p] = new_p;
                    a[q * n + k] = new_q;
                    a[k * n + q] = new_q;
                }
                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..p * n + n];
                let vq = &mut tail[..n];
                for (xp, xq) in vp.iter_mut().zip(vq.iter_mut()) {
                    let g = *xp;
                    let hq = *xq;
                    *xp = g - s * (hq + g * tau);
                    *xq = hq + s * (g - hq * tau);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            diag[i] = b[i];
            z[i] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    Ok(EigResult {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors: order.iter().map(|&i| vt[i * n..i * n + n].to_vec()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &DenseSym, lambda: f64, v: &[f64]) -> f64 {
        let av = a.matvec(v);
        av.iter().zip(v).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_2x2() {
        let r = sym_eig(&DenseSym::identity(2)).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0, 1.0]);
        let d = crate::linalg::dot(&r.eigenvectors[0], &r.eigenvectors[1]);
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn diagonal_case() {
        let a = DenseSym::from_row_major(2, vec![1.0, 0.0, 0.0, 3.0]).unwrap();
        let r = sym_eig(&a).unwrap();
        assert_eq!(r.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(r.eigenvectors[0][1].abs(), 1.0);
        assert_eq!(r.eigenvectors[1][0].abs(), 1.0);
    }

    #[test]
    fn two_by_two_coupled() {
        // characteristic polynomial (2-λ)² - 1 = 0 -> λ = 3, 1
        let a = DenseSym::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = sym_eig(&a).unwrap();
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = &r.eigenvectors[0];
        let v1 = &r.eigenvectors[1];
        assert!((v0[0].abs() - s).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - s).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_spectrum_kept() {
        let a = DenseSym::from_row_major(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = sym_eig(&a).unwrap();
        assert_eq!(r.eigenvalues.len(), 2);
        assert!((r.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(r.eigenvalues[1].abs() < 1e-14);
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn empty_matrix_rejected() {
        assert!(sym_eig(&DenseSym::zeros(0)).is_err());
    }

    fn lcg_matrix(n: usize, seed: u64) -> DenseSym {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        DenseSym::from_lower_fn(n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn reconstruction_n200() {
        let a = lcg_matrix(200, 7);
        let r = sym_eig(&a).unwrap();
        let n = a.n();
        let mut max_err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n)
                    .map(|k| r.eigenvalues[k] * r.eigenvectors[k][i] * r.eigenvectors[k][j])
                    .sum();
                max_err = max_err.max((s - a.get(i, j)).abs());
            }
        }
        assert!(max_err <= 1e-9 * a.frobenius_norm(), "max_err {max_err}");
        let lead = r.eigenvalues[0].abs().max(r.eigenvalues[n - 1].abs());
        for (l, v) in r.eigenvalues.iter().zip(&r.eigenvectors) {
            assert!(residual(&a, *l, v) <= 1e-10 * (1.0 + lead));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn eigenpairs_orthonormal_and_sorted(n in 1usize..30, seed in any::<u64>()) {
            let a = lcg_matrix(n, seed);
            let r = sym_eig(&a).unwrap();
            for w in r.eigenvalues.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            for i in 0..n {
                let vi = &r.eigenvectors[i];
                prop_assert!((crate::linalg::norm2(vi) - 1.0).abs() < 1e-12);
                for j in 0..i {
                    prop_assert!(crate::linalg::dot(vi, &r.eigenvectors[j]).abs() <= 1e-10);
                }
                let lead = r.eigenvalues[0].abs().max(r.eigenvalues[n - 1].abs());
                prop_assert!(residual(&a, r.eigenvalues[i], vi) <= 1e-10 * (1.0 + lead));
            }
        }
    }
}
