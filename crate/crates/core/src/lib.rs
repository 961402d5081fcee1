//! Tall-and-skinny QR factorization by the CholeskyQR family.
//!
//! Besides the classical CholeskyQR, CholeskyQR2 and shifted CholeskyQR3,
//! the crate provides randomized preconditioned variants: a small sketch
//! `A1 = P A` (row sampling or a Gaussian projection) is factored by LU or
//! Householder QR, its triangular factor `R~` preconditions `A`, and a single
//! CholeskyQR pass on `X = A R~^-1` finishes the job.
//!
//! Module map:
//!
//! - [`kernels`]: dense primitives (Grammian, Cholesky, triangular solves,
//!   Householder QR, pivoted LU, Jacobi SVD).
//! - [`matgen`]: seeded test matrices with prescribed spectra.
//! - [`sketch`]: row sampling and Gaussian sketches.
//! - [`cholqr`]: the factorization algorithms.
//! - [`parexec`]: row-block parallel execution with simulated collectives.
//! - [`diagnostics`]: error metrics, condition numbers, probabilistic bounds,
//!   flop model and round-off inflation bound.
//! - [`apps`]: randomized SVD with power iteration and a sketch-preconditioned
//!   least-squares solver.
//!
//! The `parallel` feature (on by default) runs data-parallel loops on rayon;
//! without it every loop runs sequentially and produces bitwise identical
//! results.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod cholqr;
pub mod diagnostics;
mod error;
pub mod kernels;
pub mod matgen;
mod matrix;
pub mod par;
pub mod parexec;
pub mod rng;
pub mod sketch;

pub use cholqr::{FactorOptions, Method, MethodKind, QRFactorization, ShiftMode, StageReport};
pub use error::{Error, Hypothesis, Result};
pub use matrix::{DenseMatrix, UpperTriangular};
pub use sketch::{SketchConfig, SketchSize, SketchStrategy};

/// Unit round-off used throughout, `2^-52`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON;
