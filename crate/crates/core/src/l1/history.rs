use super::L1Weights;
use crate::error::{check_len, Error, Result};

/// States `U⁰, …, Uⁿ` on the uniform grid `t_k = kτ`, stored row-wise in one
/// contiguous buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    alpha: f64,
    tau: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(alpha: f64, tau: f64, initial: Vec<f64>) -> Self {
        Self { alpha, tau, dim: initial.len(), data: initial }
    }

    pub fn with_capacity(alpha: f64, tau: f64, initial: Vec<f64>, steps: usize) -> Self {
        let mut data = Vec::with_capacity(initial.len() * (steps + 1));
        let dim = initial.len();
        data.extend(initial);
        Self { alpha, tau, dim, data }
    }

    pub fn push(&mut self, state: &[f64]) -> Result<()> {
        check_len(self.dim, state.len())?;
        self.data.extend_from_slice(state);
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `N` (there are `N + 1` states).
    pub fn steps(&self) -> usize {
        self.data.len() / self.dim.max(1) - 1
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Keeps every `stride`-th state and the entries listed in `rows`.
    pub fn restrict(&self, stride: usize, rows: &[usize]) -> Trajectory {
        let steps = self.steps() / stride;
        let mut data = Vec::with_capacity((steps + 1) * rows.len());
        for n in 0..=steps {
            let s = self.state(n * stride);
            data.extend(rows.iter().map(|&r| s[r]));
        }
        Trajectory { alpha: self.alpha, tau: self.tau * stride as f64, dim: rows.len(), data }
    }

    /// Applies a linear map to every state.
    pub fn map_states(&self, dim: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Trajectory {
        let mut data = Vec::with_capacity((self.steps() + 1) * dim);
        for s in self.states() {
            let out = f(s);
            assert_eq!(out.len(), dim);
            data.extend(out);
        }
        Trajectory { alpha: self.alpha, tau: self.tau, dim, data }
    }
}

/// Memory term `Hⁿ = b_{n−1}U⁰ + Σ_{j=1}^{n−1}(b_{j−1}−b_j)U^{n−j}` summed
/// directly.
pub fn history_term(weights: &L1Weights, states: &[f64], dim: usize, n: usize) -> Vec<f64> {
    assert!(n >= 1 && states.len() >= n * dim);
    let mut h: Vec<f64> = states[..dim].iter().map(|u| weights.b(n - 1) * u).collect();
    for j in 1..n {
        let a = weights.decrement(j);
        let u = &states[(n - j) * dim..(n - j + 1) * dim];
        for (hi, ui) in h.iter_mut().zip(u) {
            *hi += a * ui;
        }
    }
    h
}

const BLOCK: usize = 64;

/// Evaluates the memory term `Hⁿ` step by step with cache blocking.
///
/// Contributions of states older than the current block of `BLOCK` steps are
/// computed for the whole block at once as a matrix product, so the stored
/// history streams through memory once per block instead of once per step.
/// The result equals [`history_term`] up to summation order.
#[derive(Debug)]
pub struct HistoryMixer<'w> {
    weights: &'w L1Weights,
    dim: usize,
    last_step: usize,
    block_start: usize,
    block_len: usize,
    cache: Vec<f64>,
}

impl<'w> HistoryMixer<'w> {
    /// `last_step` is the final `n` that will be requested.
    pub fn new(weights: &'w L1Weights, dim: usize, last_step: usize) -> Result<Self> {
        if weights.len() < last_step {
            return Err(Error::InvalidArgument(format!(
                "{} weights cannot reach step {last_step}",
                weights.len()
            )));
        }
        Ok(Self { weights, dim, last_step, block_start: 0, block_len: 0, cache: Vec::new() })
    }

    // weight of state k in Hⁿ
    #[inline]
    fn coeff(&self, n: usize, k: usize) -> f64 {
        if k == 0 {
            self.weights.b(n - 1)
        } else {
            self.weights.decrement(n - k)
        }
    }

    /// `Hⁿ`; `states` must hold at least `U⁰ … U^{n−1}` and steps must be
    /// requested in increasing order.
    pub fn history(&mut self, states: &[f64], n: usize) -> Vec<f64> {
        let dim = self.dim;
        assert!(n >= 1 && n <= self.last_step && states.len() >= n * dim);
        if self.block_len == 0 || n >= self.block_start + self.block_len || n < self.block_start {
            self.start_block(states, n);
        }
        let s = self.block_start;
        let mut h = self.cache[(n - s) * dim..(n - s + 1) * dim].to_vec();
        for k in s..n {
            let c = self.coeff(n, k);
            let u = &states[k * dim..(k + 1) * dim];
            for (hi, ui) in h.iter_mut().zip(u) {
                *hi += c * ui;
            }
        }
        h
    }

    fn start_block(&mut self, states: &[f64], s: usize) {
        let dim = self.dim;
        let len = BLOCK.min(self.last_step + 1 - s);
        self.block_start = s;
        self.block_len = len;
        self.cache.clear();
        self.cache.resize(len * dim, 0.0);
        let mut w = vec![0.0; len * s];
        for i in 0..len {
            for k in 0..s {
                w[i * s + k] = self.coeff(s + i, k);
            }
        }
        // cache (len × dim) = w (len × s) · states[0..s] (s × dim)
        unsafe {
            matrixmultiply::dgemm(
                len,
                s,
                dim,
                1.0,
                w.as_ptr(),
                s as isize,
                1,
                states.as_ptr(),
                dim as isize,
                1,
                0.0,
                self.cache.as_mut_ptr(),
                dim as isize,
                1,
            );
        }
    }
}

/// Fractional difference quotient
/// `Σ_{j=0}^{n−1} b_j (U^{n−j} − U^{n−j−1}) / (τ^α Γ(2−α))`.
pub fn fdq(traj: &Trajectory, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > traj.steps() {
        return Err(Error::InvalidArgument(format!(
            "fdq index {n} outside 1..={}",
            traj.steps()
        )));
    }
    let weights = L1Weights::new(traj.alpha(), n)?;
    let scale = weights.scale(traj.tau());
    let mut out = vec![0.0; traj.dim()];
    for j in 0..n {
        let (new, old) = (traj.state(n - j), traj.state(n - j - 1));
        let b = weights.b(j);
        for ((o, x), y) in out.iter_mut().zip(new).zip(old) {
            *o += b * (x - y);
        }
    }
    out.iter_mut().for_each(|o| *o /= scale);
    Ok(out)
}

/// All fractional difference quotients `n = 1, …, N`, as rows of a
/// trajectory-shaped buffer (row `n − 1` holds the quotient at `t_n`).
pub fn fdq_all(traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    let steps = traj.steps();
    let dim = traj.dim();
    if steps == 0 {
        return Ok(Vec::new());
    }
    let weights = L1Weights::new(traj.alpha(), steps)?;
    let scale = weights.scale(traj.tau());
    let mut diffs = vec![0.0; steps * dim];
    for k in 1..=steps {
        let (new, old) = (traj.state(k), traj.state(k - 1));
        for (d, (x, y)) in diffs[(k - 1) * dim..k * dim].iter_mut().zip(new.iter().zip(old)) {
            *d = x - y;
        }
    }
    // lower-triangular Toeplitz: L[n−1][k−1] = b_{n−k} / scale
    let mut lower = vec![0.0; steps * steps];
    for n in 1..=steps {
        for k in 1..=n {
            lower[(n - 1) * steps + (k - 1)] = weights.b(n - k) / scale;
        }
    }
    let mut out = vec![0.0; steps * dim];
    unsafe {
        matrixmultiply::dgemm(
            steps,
            steps,
            dim,
            1.0,
            lower.as_ptr(),
            steps as isize,
            1,
            diffs.as_ptr(),
            dim as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            dim as isize,
            1,
        );
    }
    Ok(out.chunks_exact(dim.max(1)).map(<[f64]>::to_vec).collect())
}
