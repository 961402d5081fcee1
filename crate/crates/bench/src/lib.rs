//! Experiment drivers behind the `bench` command line tool. Each driver
//! returns its CSV rows; `main` only parses flags and writes files.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod grid;
pub mod record;

use rcholqr::cholqr::BENCH_SHIFT;
use rcholqr::{Method, ShiftMode, SketchConfig, SketchSize, SketchStrategy};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad flags or parameters; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Reading input or writing output failed; exit code 3.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// An unexpected numerical error (not a breakdown, which is data).
    #[error(transparent)]
    Numeric(#[from] rcholqr::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Io(_) | BenchError::Csv(_) => 3,
            BenchError::Numeric(rcholqr::Error::Io(_) | rcholqr::Error::Parse { .. }) => 3,
            BenchError::Numeric(_) => 1,
        }
    }
}

/// The factorizations the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Householder,
    CholeskyQr,
    CholeskyQr2,
    ShiftedCholeskyQr3,
    Rlu,
    Rqr,
    /// rQR-CholeskyQR with a Gaussian sketch.
    RqrGauss,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 7] = [
        BenchMethod::Householder,
        BenchMethod::CholeskyQr,
        BenchMethod::CholeskyQr2,
        BenchMethod::ShiftedCholeskyQr3,
        BenchMethod::Rlu,
        BenchMethod::Rqr,
        BenchMethod::RqrGauss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Householder => "householder",
            BenchMethod::CholeskyQr => "cholqr",
            BenchMethod::CholeskyQr2 => "cholqr2",
            BenchMethod::ShiftedCholeskyQr3 => "scholqr3",
            BenchMethod::Rlu => "rlu",
            BenchMethod::Rqr => "rqr",
            BenchMethod::RqrGauss => "rqr-gauss",
        }
    }

    /// `all` or a comma list of names.
    pub fn parse_list(s: &str) -> Result<Vec<BenchMethod>, BenchError> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for t in s.split(',').map(str::trim) {
            let m = Self::ALL
                .into_iter()
                .find(|m| m.name() == t)
                .ok_or_else(|| BenchError::Usage(format!("unknown method '{t}' (known: all, {})", Self::names())))?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    fn names() -> String {
        Self::ALL.map(|m| m.name()).join(", ")
    }

    pub fn build(self, setup: &MethodSetup, seed: u64) -> Method {
        let cfg = |strategy| SketchConfig::new(strategy, setup.sketch, seed);
        match self {
            BenchMethod::Householder => Method::Householder,
            BenchMethod::CholeskyQr => Method::CholeskyQr,
            BenchMethod::CholeskyQr2 => Method::CholeskyQr2,
            BenchMethod::ShiftedCholeskyQr3 => Method::ShiftedCholeskyQr3(setup.shift),
            BenchMethod::Rlu => Method::Rlu(cfg(SketchStrategy::Uniform)),
            BenchMethod::Rqr => Method::Rqr(cfg(SketchStrategy::Uniform)),
            BenchMethod::RqrGauss => Method::Rqr(cfg(SketchStrategy::Gaussian)),
        }
    }
}

/// Knobs shared by every method of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSetup {
    pub sketch: SketchSize,
    pub shift: ShiftMode,
    /// Record `cond(X)` of the preconditioned matrix.
    pub diag: bool,
}

impl Default for MethodSetup {
    fn default() -> Self {
        MethodSetup { sketch: SketchSize::Rate(2.0), shift: ShiftMode::Fixed(BENCH_SHIFT), diag: false }
    }
}

/// `theory`, `fixed` (the bench default `1e-15`) or `fixed:<value>`.
pub fn parse_shift_mode(s: &str) -> Result<ShiftMode, BenchError> {
    match s.split_once(':') {
        None if s == "theory" => Ok(ShiftMode::TheoryFormula),
        None if s == "fixed" => Ok(ShiftMode::Fixed(BENCH_SHIFT)),
        Some(("fixed", v)) => match v.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.is_finite() => Ok(ShiftMode::Fixed(x)),
            _ => Err(BenchError::Usage(format!("bad shift value '{v}'"))),
        },
        _ => Err(BenchError::Usage(format!("bad shift mode '{s}' (theory, fixed or fixed:<value>)"))),
    }
}
