//! Dense symmetric eigendecomposition and sparse SPD linear solves.

mod dense;
mod eig;
mod solve;
mod sparse;

pub use dense::{cholesky_solve, DenseSym};
pub(crate) use dense::CholeskyFactor;
pub use eig::{rank_cutoff, sym_eig, EigResult};
pub use solve::{pcg, solve_spd, SpdSolver, Tridiagonal};
pub use sparse::SparseSym;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
