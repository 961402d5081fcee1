//! Randomized SVD with power iteration and a pluggable orthogonalizer.

use std::time::{Duration, Instant};

use rand::RngCore;

use crate::apps::sparse::SparseMatrixCSR;
use crate::cholqr::{self, FactorOptions, Method};
use crate::error::{Error, Result};
use crate::kernels;
use crate::matrix::DenseMatrix;
use crate::rng;
use crate::sketch::{SketchConfig, SketchSize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orthogonalizer {
    Householder,
    RqrCholeskyQr,
    CholeskyQr2,
}

impl Orthogonalizer {
    pub const ALL: [Orthogonalizer; 3] = [Orthogonalizer::Householder, Orthogonalizer::RqrCholeskyQr, Orthogonalizer::CholeskyQr2];

    /// Short name as used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Orthogonalizer::Householder => "qr",
            Orthogonalizer::RqrCholeskyQr => "rqr",
            Orthogonalizer::CholeskyQr2 => "cholqr2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qr" | "householder" => Some(Orthogonalizer::Householder),
            "rqr" | "rqr-cholqr" => Some(Orthogonalizer::RqrCholeskyQr),
            "cholqr2" => Some(Orthogonalizer::CholeskyQr2),
            _ => None,
        }
    }

    /// Orthonormal basis of the columns of `y`. `sketch_seed` is only used by
    /// the randomized variant.
    pub fn orth(self, y: DenseMatrix, sketch_seed: u64) -> Result<DenseMatrix> {
        let opts = FactorOptions { r_less: true, diagnostics: false };
        match self {
            Orthogonalizer::Householder => Ok(kernels::householder_qr_owned(y)?.0),
            Orthogonalizer::RqrCholeskyQr => {
                let cfg = SketchConfig::uniform(SketchSize::Rate(2.0), sketch_seed);
                Ok(cholqr::factor(&Method::Rqr(cfg), &y, opts)?.q)
            }
            Orthogonalizer::CholeskyQr2 => Ok(cholqr::factor(&Method::CholeskyQr2, &y, opts)?.q),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RsvdResult {
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
    pub iterations: usize,
    /// Entry 0 is the initial orthogonalization; entry `i` sums the two
    /// orthogonalizations of power iteration `i`.
    pub per_iteration_orth_time: Vec<Duration>,
}

impl RsvdResult {
    pub fn total_orth_time(&self) -> Duration {
        self.per_iteration_orth_time.iter().sum()
    }
}

/// Rank-`k` approximation `A ~ U diag(sigma) V^T`.
///
/// `Y = orth(A X)` for a Gaussian `n x k` matrix `X`, followed by `power`
/// rounds of `Y = orth(A^T Y)`, `Y = orth(A Y)`. The factors come from the
/// small SVD `A^T Y = W diag(sigma) Z^T`, giving `U = Y Z` and `V = W`.
pub fn rsvd_power(a: &SparseMatrixCSR, k: usize, power: usize, orth: Orthogonalizer, seed: u64) -> Result<RsvdResult> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::DimensionMismatch(format!("rank {k} must lie in 1..={} for a {m}x{n} matrix", m.min(n))));
    }
    let mut x = DenseMatrix::zeros(n, k);
    rng::fill_standard_normal(&mut rng::stream(seed, rng::streams::RSVD), x.as_mut_slice());
    // A fresh sketch seed for every orthogonalization, determined by the run
    // seed and the call counter.
    let mut seeds = rng::stream(seed, rng::streams::SKETCH);
    let at = a.transpose();

    let mut times = Vec::with_capacity(power + 1);
    let mut timed = |y: DenseMatrix, acc: &mut Duration| -> Result<DenseMatrix> {
        let s = seeds.next_u64();
        let t0 = Instant::now();
        let q = orth.orth(y, s)?;
        *acc += t0.elapsed();
        Ok(q)
    };

    let mut t = Duration::ZERO;
    let mut y = timed(a.mul_dense(&x)?, &mut t)?;
    times.push(t);
    for _ in 0..power {
        let mut t = Duration::ZERO;
        let z = timed(at.mul_dense(&y)?, &mut t)?;
        y = timed(a.mul_dense(&z)?, &mut t)?;
        times.push(t);
    }

    let b = at.mul_dense(&y)?;
    let svd = kernels::svd_thin(&b)?;
    let u = y.matmul(&svd.v)?;
    Ok(RsvdResult { u, sigma: svd.sigma, v: svd.u, iterations: power, per_iteration_orth_time: times })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64], rows: usize, cols: usize) -> SparseMatrixCSR {
        SparseMatrixCSR::from_triplets(rows, cols, vals.iter().enumerate().map(|(i, &v)| (i, i, v)).collect()).unwrap()
    }

    #[test]
    fn diagonal_top_values() {
        let a = diag(&[5.0, 4.0, 3.0, 2.0, 1.0], 5, 5);
        // The gap 4 -> 3 converges like (3/4)^(2K), so a few power rounds
        // only get close; forty are plenty for 1e-8.
        for orth in [Orthogonalizer::Householder, Orthogonalizer::CholeskyQr2] {
            let few = rsvd_power(&a, 2, 2, orth, 1).unwrap();
            let many = rsvd_power(&a, 2, 40, orth, 1).unwrap();
            assert!((many.sigma[0] - 5.0).abs() < 1e-8 && (many.sigma[1] - 4.0).abs() < 1e-8, "{orth:?}: {:?}", many.sigma);
            assert!((few.sigma[1] - 4.0).abs() > (many.sigma[1] - 4.0).abs());
            assert_eq!(few.per_iteration_orth_time.len(), 3);
        }
        // Once Y lives on two of five rows, a uniform 4-row sketch can miss
        // one of them; that is the coherence limit of row sampling, so the
        // randomized variant is only compared over a few rounds.
        let qr = rsvd_power(&a, 2, 2, Orthogonalizer::Householder, 1).unwrap();
        let rqr = rsvd_power(&a, 2, 2, Orthogonalizer::RqrCholeskyQr, 1).unwrap();
        for (x, y) in qr.sigma.iter().zip(&rqr.sigma) {
            assert!((x - y).abs() <= 1e-10 * x);
        }
    }

    #[test]
    fn factors_reconstruct_low_rank_matrix() {
        let a = diag(&[9.0, 7.0, 0.0, 0.0], 60, 4);
        let r = rsvd_power(&a, 2, 0, Orthogonalizer::Householder, 3).unwrap();
        let us = DenseMatrix::from_fn(60, 2, |i, j| r.u.get(i, j) * r.sigma[j]);
        let rec = us.matmul(&r.v.transpose()).unwrap();
        assert!(rec.sub(&a.to_dense()).unwrap().max_abs() < 1e-12);
        assert!(r.sigma.windows(2).all(|w| w[0] >= w[1]) && r.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn rejects_bad_rank() {
        let a = diag(&[1.0, 1.0], 3, 2);
        assert!(matches!(rsvd_power(&a, 3, 0, Orthogonalizer::Householder, 0), Err(Error::DimensionMismatch(_))));
        assert!(rsvd_power(&a, 0, 0, Orthogonalizer::Householder, 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for o in Orthogonalizer::ALL {
            assert_eq!(Orthogonalizer::parse(o.name()), Some(o));
        }
    }
}
