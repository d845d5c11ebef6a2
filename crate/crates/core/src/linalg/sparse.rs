use crate::error::{Error, Result};

/// Sparse symmetric matrix in compressed sparse row form.
///
/// Both triangles are stored, column indices are sorted within each row and
/// every diagonal entry is present (possibly as an explicit zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    ///
    /// The triplet list must describe a symmetric matrix: for every `(i, j, v)`
    /// the summed `(j, i)` entry has to agree exactly.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside {n}x{n} matrix"
                )));
            }
            rows[i].push((j, v));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.push((i, 0.0));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let m = Self { n, row_ptr, col_idx, values };
        m.check_symmetric()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::identity(diag.len());
        m.values.copy_from_slice(diag);
        m
    }

    fn check_symmetric(&self) -> Result<()> {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if self.get(j, i) != v {
                    return Err(Error::InvalidArgument(format!(
                        "sparse matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        super::dot(x, &self.matvec(y))
    }

    /// Half bandwidth: max |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// `a * self + b * other` over the union of both patterns.
    pub fn combine(&self, a: f64, other: &SparseSym, b: f64) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        for i in 0..self.n {
            let mut lhs = self.row(i).peekable();
            let mut rhs = other.row(i).peekable();
            loop {
                let entry = match (lhs.peek(), rhs.peek()) {
                    (Some(&(jl, vl)), Some(&(jr, vr))) => {
                        if jl == jr {
                            lhs.next();
                            rhs.next();
                            (jl, a * vl + b * vr)
                        } else if jl < jr {
                            lhs.next();
                            (jl, a * vl)
                        } else {
                            rhs.next();
                            (jr, b * vr)
                        }
                    }
                    (Some(&(jl, vl)), None) => {
                        lhs.next();
                        (jl, a * vl)
                    }
                    (None, Some(&(jr, vr))) => {
                        rhs.next();
                        (jr, b * vr)
                    }
                    (None, None) => break,
                };
                col_idx.push(entry.0);
                values.push(entry.1);
            }
            row_ptr.push(col_idx.len());
        }
        SparseSym { n: self.n, row_ptr, col_idx, values }
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> SparseSym {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            let mut row: Vec<(usize, f64)> = self
                .row(i)
                .filter(|&(j, _)| new_index[j] != usize::MAX)
                .map(|(j, v)| (new_index[j], v))
                .collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseSym { n: keep.len(), row_ptr, col_idx, values }
    }

    pub fn sum_of_entries(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseSym {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSym::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseSym::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn diagonal_always_present() {
        let m = SparseSym::from_triplets(3, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.diagonal(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn asymmetric_triplets_rejected() {
        assert!(SparseSym::from_triplets(2, &[(0, 1, 1.0)]).is_err());
    }

    #[test]
    fn matvec_and_bandwidth() {
        let m = tridiag(4);
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0, 1.0]), vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.bandwidth(), 1);
    }

    #[test]
    fn combine_matches_dense() {
        let a = tridiag(3);
        let b = SparseSym::identity(3);
        let c = a.combine(2.0, &b, 0.5);
        assert_eq!(c.get(0, 0), 4.5);
        assert_eq!(c.get(0, 1), -2.0);
        assert_eq!(c.get(0, 2), 0.0);
    }

    #[test]
    fn submatrix_keeps_order() {
        let a = tridiag(4);
        let s = a.submatrix(&[1, 2]);
        assert_eq!(s.n(), 2);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(1, 1), 2.0);
    }
}
