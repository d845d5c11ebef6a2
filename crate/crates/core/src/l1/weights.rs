use crate::error::{Error, Result};
use crate::mlf::gamma;

/// Weights `b_j = (j+1)^{1-α} − j^{1-α}`, `j = 0, …, n−1`, and
/// `c_α = Γ(2−α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    alpha: f64,
    b: Vec<f64>,
    c_alpha: f64,
}

impl L1Weights {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one weight".into()));
        }
        let e = 1.0 - alpha;
        let b = (0..n)
            .map(|j| {
                if j == 0 {
                    1.0
                } else {
                    // j^{1-α} ((1 + 1/j)^{1-α} − 1) without cancellation
                    let jf = j as f64;
                    jf.powf(e) * (e * (1.0 / jf).ln_1p()).exp_m1()
                }
            })
            .collect();
        Ok(Self { alpha, b, c_alpha: gamma(2.0 - alpha) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    #[inline]
    pub fn b(&self, j: usize) -> f64 {
        self.b[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    /// `b_{j−1} − b_j` for `j ≥ 1`.
    #[inline]
    pub fn decrement(&self, j: usize) -> f64 {
        self.b[j - 1] - self.b[j]
    }

    /// `c_α τ^α`, the factor in front of the spatial operator and the load.
    pub fn scale(&self, tau: f64) -> f64 {
        self.c_alpha * tau.powf(self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_weight_is_one() {
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(L1Weights::new(a, 3).unwrap().b(0), 1.0);
        }
    }

    #[test]
    fn half_order_second_weight() {
        let w = L1Weights::new(0.5, 2).unwrap();
        assert!((w.b(1) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn telescoping_sum() {
        let w = L1Weights::new(0.3, 100).unwrap();
        let s: f64 = w.as_slice().iter().sum();
        assert!((s - 100f64.powf(0.7)).abs() <= 1e-12 * s);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(L1Weights::new(0.0, 4).is_err());
        assert!(L1Weights::new(1.0, 4).is_err());
        assert!(L1Weights::new(0.5, 0).is_err());
    }

    proptest! {
        #[test]
        fn weights_positive_decreasing_and_telescoping(alpha in 0.01f64..0.99, n in 1usize..3000) {
            let w = L1Weights::new(alpha, n).unwrap();
            for j in 1..n {
                prop_assert!(w.b(j) > 0.0 && w.b(j) < w.b(j - 1));
            }
            let s: f64 = w.as_slice().iter().sum();
            let want = (n as f64).powf(1.0 - alpha);
            prop_assert!((s - want).abs() <= 1e-12 * want);
        }
    }
}
