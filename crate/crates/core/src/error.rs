use std::fmt;

/// Hypotheses of the round-off inflation bound, see
/// [`diagnostics::stability_gamma`](crate::diagnostics::stability_gamma).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// `beta * cond(A) < 1/2`
    TriangularSolve,
    /// `alpha * cond(A1) < 1/2`
    SketchFactor,
    /// `gamma * cond(X) < 1`
    Perturbation,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::TriangularSolve => "beta*cond(A) < 1/2",
            Hypothesis::SketchFactor => "alpha*cond(A1) < 1/2",
            Hypothesis::Perturbation => "gamma*cond(X) < 1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A Cholesky pivot was not positive: the Grammian is numerically
    /// indefinite, i.e. cond(A)^2 exceeds working precision.
    #[error("Cholesky breakdown at pivot {pivot_index}")]
    CholeskyBreakdown { pivot_index: usize },

    #[error("singular triangular factor: zero (or degenerate) diagonal at {index}")]
    SingularTriangular { index: usize },

    #[error("SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("sampled row {row} has zero leverage")]
    ZeroLeverageRow { row: usize },

    #[error("matrix has zero Frobenius norm")]
    ZeroMatrix,

    #[error("matrix is numerically rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("bound hypothesis violated: {which}")]
    HypothesisViolated { which: Hypothesis },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
