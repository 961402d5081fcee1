//! CSV rows. Field order is the column order; `None` is an empty field and
//! floats are written in shortest round-trip form.

use std::io::Write;

use serde::Serialize;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// A Cholesky factorization met a nonpositive pivot.
    Breakdown,
    /// A triangular factor was (numerically) singular.
    Singular,
}

impl Status {
    /// Maps an expected numerical failure to a status; anything else is a
    /// real error.
    pub fn from_error(e: &rcholqr::Error) -> Option<Status> {
        use rcholqr::Error as E;
        match e {
            E::CholeskyBreakdown { .. } => Some(Status::Breakdown),
            E::SingularTriangular { .. } | E::RankDeficient { .. } | E::ZeroLeverageRow { .. } => Some(Status::Singular),
            _ => None,
        }
    }
}

/// One factorization run (accuracy, runtime and scaling commands).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub m: usize,
    pub n: usize,
    /// Sketch rows actually used, for the randomized methods.
    pub l: Option<usize>,
    pub p: usize,
    pub kappa: f64,
    pub seed: u64,
    pub status: Status,
    pub orth_err: Option<f64>,
    pub res_err: Option<f64>,
    pub cond_x: Option<f64>,
    pub retries: usize,
    pub sketch_ms: f64,
    pub precondition_ms: f64,
    pub gram_ms: f64,
    pub cholesky_ms: f64,
    pub trisolve_ms: f64,
    pub combine_ms: f64,
    pub wall_ms: f64,
    pub comm_rounds: usize,
    pub comm_volume: f64,
    /// `t(p=1) / t(p)`, scaling command only.
    pub speedup: Option<f64>,
}

/// One `cond(X)` sample of the sampling-rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingRecord {
    pub strategy: String,
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub rate: f64,
    pub l: usize,
    pub seed: u64,
    pub status: Status,
    pub cond_x: Option<f64>,
}

/// Orthogonalization time of one RSVD iteration. Iteration 0 is the initial
/// orthogonalization; the row with `iteration = total` sums them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsvdRecord {
    pub matrix: String,
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub k: usize,
    pub power: usize,
    pub orth: String,
    pub seed: u64,
    pub iteration: String,
    pub orth_ms: f64,
    /// Householder time divided by this row's time.
    pub ratio: Option<f64>,
    pub sigma_max: Option<f64>,
    pub sigma_k: Option<f64>,
    /// Largest relative difference to the Householder singular values.
    pub sigma_rel_diff: Option<f64>,
}

/// Writes `rows` with a header, which is emitted even when there are no rows.
pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T], header: &[&str]) -> Result<(), BenchError> {
    let mut wr = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(w);
    if rows.is_empty() {
        wr.write_record(header)?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub const RUN_HEADER: &[&str] = &[
    "method",
    "m",
    "n",
    "l",
    "p",
    "kappa",
    "seed",
    "status",
    "orth_err",
    "res_err",
    "cond_x",
    "retries",
    "sketch_ms",
    "precondition_ms",
    "gram_ms",
    "cholesky_ms",
    "trisolve_ms",
    "combine_ms",
    "wall_ms",
    "comm_rounds",
    "comm_volume",
    "speedup",
];

pub const SAMPLING_HEADER: &[&str] = &["strategy", "m", "n", "kappa", "rate", "l", "seed", "status", "cond_x"];

pub const RSVD_HEADER: &[&str] = &[
    "matrix",
    "m",
    "n",
    "nnz",
    "k",
    "power",
    "orth",
    "seed",
    "iteration",
    "orth_ms",
    "ratio",
    "sigma_max",
    "sigma_k",
    "sigma_rel_diff",
];
