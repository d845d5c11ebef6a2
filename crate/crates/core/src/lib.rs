//! Galerkin finite elements with L1 time stepping and proper orthogonal
//! decomposition for the subdiffusion equation
//!
//! ```text
//!     ∂ₜᵅu − Δu + q u = f   in Ω × (0, T],   u = 0 on ∂Ω,   u(0) = v,
//! ```
//!
//! where ∂ₜᵅ is the Caputo derivative of order α ∈ (0, 1).
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense symmetric eigendecomposition (cyclic Jacobi) and sparse
//!   SPD solves (Thomas, banded Cholesky, Jacobi-preconditioned CG).
//! - [`mesh`] and [`fem`]: uniform interval / rectangle meshes and P1 assembly.
//! - [`mlf`]: Mittag-Leffler functions and spectral exact solutions.
//! - [`l1`]: L1 weights, fractional difference quotients and the full-order
//!   time stepper, plus numerical checks of the weight inequalities and the
//!   discrete stability estimate.
//! - [`pod`]: snapshots, correlation matrices, POD bases, Ritz projection and
//!   the reduced-order stepper.
//! - [`harness`]: experiment configurations, error metrics and CSV reports.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fem;
pub mod harness;
pub mod l1;
pub mod linalg;
pub mod mesh;
pub mod mlf;
pub mod pod;

pub use error::{Error, Result};

/// A point in the (at most two-dimensional) physical domain. One-dimensional
/// meshes use the first coordinate only.
pub type Point = [f64; 2];
