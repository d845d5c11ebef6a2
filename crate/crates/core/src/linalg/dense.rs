use crate::error::{check_len, Error, Result};

/// Dense symmetric matrix stored as a full row-major array.
///
/// Writes through [`DenseSym::set`] update both triangles, so the stored
/// entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    n: usize,
    entries: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// Builds the matrix from the lower triangle of `f(i, j)`, `j <= i`.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from row-major data, rejecting input that is not exactly symmetric.
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        check_len(n * n, entries.len())?;
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.entries
            .chunks_exact(self.n.max(1))
            .take(self.n)
            .map(|row| super::dot(row, x))
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: f64, other: &DenseSym, b: f64) -> DenseSym {
        assert_eq!(self.n, other.n);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| a * x + b * y)
            .collect();
        DenseSym { n: self.n, entries }
    }

    pub(crate) fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

/// Solves `A x = b` for a dense SPD matrix with an unpivoted Cholesky
/// factorization. Used for the small reduced-order systems.
pub fn cholesky_solve(a: &DenseSym, b: &[f64]) -> Result<Vec<f64>> {
    CholeskyFactor::new(a)?.solve(b)
}

#[derive(Debug, Clone)]
pub(crate) struct CholeskyFactor {
    n: usize,
    // lower triangle, row-major
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub(crate) fn new(a: &DenseSym) -> Result<Self> {
        let n = a.n();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_keeps_symmetry() {
        let mut a = DenseSym::zeros(3);
        a.set(2, 0, 1.5);
        assert_eq!(a.get(0, 2), 1.5);
        assert_eq!(a.get(2, 0), 1.5);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = DenseSym::from_row_major(2, vec![1.0, 2.0, 3.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn cholesky_solves_small_system() {
        let a = DenseSym::from_row_major(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        // 4x + 2y = 2, 2x + 3y = 1 -> x = 1/2, y = 0
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseSym::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            cholesky_solve(&a, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { row: 1, .. })
        ));
    }
}
