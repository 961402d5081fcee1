//! Downstream applications: randomized SVD with power iteration and a
//! sketch-preconditioned least-squares solver.

pub mod lstsq;
pub mod rsvd;
pub mod sparse;

pub use lstsq::{ls_solve, normal_equations_solve};
pub use rsvd::{rsvd_power, Orthogonalizer, RsvdResult};
pub use sparse::SparseMatrixCSR;
