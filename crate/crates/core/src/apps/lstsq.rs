//! Least squares `min ||Ax - b||` through preconditioned normal equations.

use crate::cholqr::{self, Sequential};
use crate::error::{Error, Result};
use crate::kernels;
use crate::matrix::DenseMatrix;
use crate::sketch::SketchConfig;

/// Sketches `A`, takes `R1` from a Q-less QR of the sketch, and solves the
/// normal equations of the well-conditioned `B = A R1^-1`:
/// `y = (B^T B)^-1 B^T b` by Cholesky, then `x = R1^-1 y`.
pub fn ls_solve(a: &DenseMatrix, b: &[f64], cfg: &SketchConfig) -> Result<Vec<f64>> {
    check(a, b)?;
    let r1 = cholqr::rough_factor(&Sequential, a, None, &kernels::qr_rless, cfg)?.r;
    let bm = kernels::right_trisolve(a, &r1)?;
    let rb = kernels::cholesky_upper(&kernels::gram(&bm)?)?;
    let c = bm.tr_matvec(b)?;
    let y = rb.solve(&rb.solve_transpose(&c)?)?;
    r1.solve(&y)
}

/// Unpreconditioned normal equations `x = (A^T A)^-1 A^T b`, for comparison.
pub fn normal_equations_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check(a, b)?;
    let r = kernels::cholesky_upper(&kernels::gram(a)?)?;
    let c = a.tr_matvec(b)?;
    r.solve(&r.solve_transpose(&c)?)
}

fn check(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("right-hand side has {} entries for {} rows", b.len(), a.rows())));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}
