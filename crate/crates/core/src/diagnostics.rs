//! Error metrics, condition numbers, coherence, the concentration bounds for
//! sketched preconditioners, the flop model and the round-off inflation
//! bound for the preconditioned matrix.

use crate::cholqr::MethodKind;
use crate::error::{Error, Hypothesis, Result};
use crate::kernels;
use crate::matrix::{DenseMatrix, UpperTriangular};
use crate::par;
use crate::UNIT_ROUNDOFF;

/// `cond2` reports [`Error::RankDeficient`] below this multiple of `u`.
pub const RANK_TOLERANCE: f64 = 1e3 * UNIT_ROUNDOFF;

/// `||Q^T Q - I||_F`.
pub fn orthogonality_error(q: &DenseMatrix) -> f64 {
    let n = q.cols();
    let g = if q.rows() >= n {
        match kernels::gram(q) {
            Ok(g) => g,
            Err(_) => return f64::INFINITY,
        }
    } else {
        match q.transpose().matmul(q) {
            Ok(g) => g,
            Err(_) => return f64::INFINITY,
        }
    };
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = g.get(i, j) - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s.sqrt()
}

/// `||A - QR||_F / ||A||_F`, computed row by row without forming `QR`.
pub fn residual_error(a: &DenseMatrix, q: &DenseMatrix, r: &UpperTriangular) -> Result<f64> {
    if q.shape() != a.shape() || r.order() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, Q is {}x{}, R has order {}",
            a.rows(),
            a.cols(),
            q.rows(),
            q.cols(),
            r.order()
        )));
    }
    let norm_a = a.frobenius_norm();
    if norm_a == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let n = a.cols();
    const CHUNK: usize = 4096;
    let chunks = a.rows().div_ceil(CHUNK);
    let partial = par::map_range(chunks, |c| {
        let mut row = vec![0.0; n];
        let mut s = 0.0;
        for i in c * CHUNK..((c + 1) * CHUNK).min(a.rows()) {
            row.copy_from_slice(a.row(i));
            for (k, &qk) in q.row(i).iter().enumerate() {
                for (x, &rv) in row[k..].iter_mut().zip(&r.row(k)[k..]) {
                    *x -= qk * rv;
                }
            }
            s += row.iter().map(|x| x * x).sum::<f64>();
        }
        s
    });
    Ok(partial.iter().sum::<f64>().sqrt() / norm_a)
}

/// `sigma_max / sigma_min`. Tall inputs are reduced to their `R` factor
/// first.
pub fn cond2(m: &DenseMatrix) -> Result<f64> {
    let s = if m.rows() > m.cols() {
        kernels::svd_values(&kernels::qr_rless(m)?.to_dense())?
    } else {
        kernels::svd_values(m)?
    };
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if !(lo >= RANK_TOLERANCE * hi) || hi == 0.0 {
        return Err(Error::RankDeficient { sigma_min: lo, sigma_max: hi });
    }
    Ok(hi / lo)
}

/// Squared row norms of an orthonormal `Q`.
pub fn leverage_scores(q: &DenseMatrix) -> Vec<f64> {
    (0..q.rows()).map(|i| q.row(i).iter().map(|x| x * x).sum()).collect()
}

/// Coherence `theta(Q)`: the largest squared row norm.
pub fn theta(q: &DenseMatrix) -> f64 {
    leverage_scores(q).into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub epsilon: f64,
    pub delta: f64,
    /// Upper bound on `P[cond(X) >= cond_threshold]`. Not clipped to 1.
    pub tail_probability: f64,
    /// Natural log of `tail_probability`, finite even when the tail
    /// underflows.
    pub log_tail: f64,
    pub cond_threshold: f64,
}

/// `ln(e^-eps / (1-eps)^(1-eps))`.
fn log_lower_factor(eps: f64) -> f64 {
    -eps - (1.0 - eps) * (-eps).ln_1p()
}

/// `ln(e^delta / (1+delta)^(1+delta))`.
fn log_upper_factor(delta: f64) -> f64 {
    delta - (1.0 + delta) * delta.ln_1p()
}

fn chernoff(n: usize, exponent: f64, eps: f64, delta: f64) -> Result<BoundReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let a = exponent * log_lower_factor(eps);
    let b = exponent * log_upper_factor(delta);
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let log_tail = (n as f64).ln() + hi + (lo - hi).exp().ln_1p();
    Ok(BoundReport {
        epsilon: eps,
        delta,
        tail_probability: log_tail.exp(),
        log_tail,
        cond_threshold: ((1.0 + delta) / (1.0 - eps)).sqrt(),
    })
}

/// Tail bound for uniform row sampling with replacement:
/// `n [ (e^-eps/(1-eps)^(1-eps))^E + (e^delta/(1+delta)^(1+delta))^E ]`
/// with `E = l / (m theta)`.
pub fn chernoff_tail_uniform(n: usize, l: usize, m: usize, theta_q: f64, eps: f64, delta: f64) -> Result<BoundReport> {
    if !(theta_q > 0.0 && theta_q <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {theta_q}")));
    }
    chernoff(n, l as f64 / (m as f64 * theta_q), eps, delta)
}

/// Tail bound for leverage-score sampling: the exponent is `l / n`.
pub fn chernoff_tail_leverage(n: usize, l: usize, eps: f64, delta: f64) -> Result<BoundReport> {
    chernoff(n, l as f64 / n as f64, eps, delta)
}

/// Gaussian projection: `P[cond(X) >= (3 + sqrt(n/l)) / (1 - sqrt(n/l))] <=
/// 2 exp(-(sqrt(l) - sqrt(n))^2 / 8)`. `epsilon` and `delta` report the
/// deviation `(1 - sqrt(n/l)) / 2` the bound is built from.
pub fn gaussian_tail(n: usize, l: usize) -> Result<BoundReport> {
    if l <= n || n == 0 {
        return Err(Error::InvalidArgument(format!("Gaussian bound needs l > n >= 1, got l={l}, n={n}")));
    }
    let r = (n as f64 / l as f64).sqrt();
    let gap = (l as f64).sqrt() - (n as f64).sqrt();
    let log_tail = std::f64::consts::LN_2 - gap * gap / 8.0;
    let eps = 0.5 * (1.0 - r);
    Ok(BoundReport {
        epsilon: eps,
        delta: eps,
        tail_probability: log_tail.exp(),
        log_tail,
        cond_threshold: (3.0 + r) / (1.0 - r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopEstimate {
    pub total: f64,
    /// Per-process count with the `m` terms divided by `p`; `None` for
    /// methods without a row-parallel schedule.
    pub critical_path: Option<f64>,
}

/// Leading-order flop counts of the family:
///
/// | method | flops |
/// |---|---|
/// | Householder | `n^2 (4m - 4n/3)` |
/// | CholeskyQR | `n^2 (2m + n/3)` |
/// | CholeskyQR2 | `n^2 (4m + 2n/3)` |
/// | shifted CholeskyQR3 | `n^2 (6m + n)` |
/// | rLU-CholeskyQR | `n^2 (3m + l)` |
/// | rQR-CholeskyQR | `n^2 (3m + 4l - n)` |
pub fn flop_estimate(method: MethodKind, m: usize, n: usize, l: usize, p: usize) -> Result<FlopEstimate> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let (m, n, l, p) = (m as f64, n as f64, l as f64, p as f64);
    let n2 = n * n;
    // (coefficient of m, the rest)
    let (cm, rest) = match method {
        MethodKind::Householder => (4.0, -4.0 * n / 3.0),
        MethodKind::CholeskyQr => (2.0, n / 3.0),
        MethodKind::CholeskyQr2 => (4.0, 2.0 * n / 3.0),
        MethodKind::ShiftedCholeskyQr3 => (6.0, n),
        MethodKind::RluCholeskyQr => (3.0, l),
        MethodKind::RqrCholeskyQr => (3.0, 4.0 * l - n),
    };
    let total = n2 * (cm * m + rest);
    let critical_path = match method {
        MethodKind::Householder => None,
        _ => Some(n2 * (cm * m / p + rest)),
    };
    Ok(FlopEstimate { total, critical_path })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBound {
    pub gamma: f64,
    /// `(1 + gamma) / (1 - gamma)`.
    pub cond_inflation: f64,
    /// `cond_inflation * cond(X)`: guaranteed upper bound on the computed
    /// `cond(X^)`.
    pub bound: f64,
}

/// Inflation of `cond(X)` by round-off in the sketch factorization
/// (`alpha`-stable) and the triangular solve (`beta`-stable):
/// `gamma = 2 (beta cond(A) + alpha cond(A1))`.
pub fn stability_gamma(alpha: f64, beta: f64, cond_a: f64, cond_a1: f64, cond_x: f64) -> Result<StabilityBound> {
    if !(beta * cond_a < 0.5) {
        return Err(Error::HypothesisViolated { which: Hypothesis::TriangularSolve });
    }
    if !(alpha * cond_a1 < 0.5) {
        return Err(Error::HypothesisViolated { which: Hypothesis::SketchFactor });
    }
    let gamma = 2.0 * (beta * cond_a + alpha * cond_a1);
    if !(gamma * cond_x < 1.0) {
        return Err(Error::HypothesisViolated { which: Hypothesis::Perturbation });
    }
    let cond_inflation = (1.0 + gamma) / (1.0 - gamma);
    Ok(StabilityBound { gamma, cond_inflation, bound: cond_inflation * cond_x })
}
