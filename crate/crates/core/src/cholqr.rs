//! The CholeskyQR family and the sketch-preconditioned framework.
//!
//! Every algorithm is written once against [`Backend`], which supplies the
//! Grammian, the triangular solve and the sketch. [`Sequential`] routes them
//! to [`kernels`]; `parexec` supplies a row-blocked implementation.

use crate::error::{Error, Result};
use crate::kernels;
use crate::matrix::{DenseMatrix, UpperTriangular};
use crate::rng::{self, streams, SeededRng};
use crate::sketch::{self, Sketch, SketchConfig, SketchSize};
use crate::UNIT_ROUNDOFF;

/// A sketch whose triangular factor has `min|r_ii| < DEGENERATE_RATIO *
/// max|r_ii|` is redrawn.
pub const DEGENERATE_RATIO: f64 = 1e-14;

/// Shift used by the benchmark reproductions.
pub const BENCH_SHIFT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ShiftMode {
    /// `11 (mn + n(n+1)) u ||A||_F^2`.
    #[default]
    TheoryFormula,
    Fixed(f64),
}

impl ShiftMode {
    pub fn shift(self, a: &DenseMatrix) -> f64 {
        match self {
            ShiftMode::Fixed(s) => s,
            ShiftMode::TheoryFormula => {
                let (m, n) = (a.rows() as f64, a.cols() as f64);
                11.0 * (m * n + n * (n + 1.0)) * UNIT_ROUNDOFF * a.frobenius_norm().powi(2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Householder,
    CholeskyQr,
    CholeskyQr2,
    ShiftedCholeskyQr3,
    RluCholeskyQr,
    RqrCholeskyQr,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::Householder,
        MethodKind::CholeskyQr,
        MethodKind::CholeskyQr2,
        MethodKind::ShiftedCholeskyQr3,
        MethodKind::RluCholeskyQr,
        MethodKind::RqrCholeskyQr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Householder => "householder",
            MethodKind::CholeskyQr => "cholqr",
            MethodKind::CholeskyQr2 => "cholqr2",
            MethodKind::ShiftedCholeskyQr3 => "scholqr3",
            MethodKind::RluCholeskyQr => "rlu",
            MethodKind::RqrCholeskyQr => "rqr",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, MethodKind::RluCholeskyQr | MethodKind::RqrCholeskyQr)
    }
}

/// A fully parameterized algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Householder,
    CholeskyQr,
    CholeskyQr2,
    ShiftedCholeskyQr3(ShiftMode),
    Rlu(SketchConfig),
    Rqr(SketchConfig),
}

impl Method {
    pub fn kind(&self) -> MethodKind {
        match self {
            Method::Householder => MethodKind::Householder,
            Method::CholeskyQr => MethodKind::CholeskyQr,
            Method::CholeskyQr2 => MethodKind::CholeskyQr2,
            Method::ShiftedCholeskyQr3(_) => MethodKind::ShiftedCholeskyQr3,
            Method::Rlu(_) => MethodKind::RluCholeskyQr,
            Method::Rqr(_) => MethodKind::RqrCholeskyQr,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }

    pub fn sketch_config(&self) -> Option<&SketchConfig> {
        match self {
            Method::Rlu(c) | Method::Rqr(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FactorOptions {
    /// Skip forming `R`; only `Q` is wanted.
    pub r_less: bool,
    /// Estimate `cond(X)` of the preconditioned matrix (costs an extra
    /// Q-less QR of `X`).
    pub diagnostics: bool,
}

impl FactorOptions {
    pub fn with_diagnostics() -> Self {
        FactorOptions { r_less: false, diagnostics: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageName {
    Householder,
    CholeskyQr,
    ShiftedCholeskyQr,
    /// Sketch plus triangular factor of the sketch (`R~`).
    Precondition,
}

impl StageName {
    pub fn name(self) -> &'static str {
        match self {
            StageName::Householder => "householder",
            StageName::CholeskyQr => "cholqr",
            StageName::ShiftedCholeskyQr => "shifted-cholqr",
            StageName::Precondition => "precondition",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: StageName,
    /// For the preconditioning stage: `cond(X)` of `X = A R~^-1`.
    pub cond_estimate: Option<f64>,
    pub shift: Option<f64>,
    pub retries: usize,
    /// Rows of the sketch that was finally used.
    pub sketch_rows: Option<usize>,
}

impl StageRecord {
    fn plain(name: StageName) -> Self {
        StageRecord { name, cond_estimate: None, shift: None, retries: 0, sketch_rows: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageReport {
    pub stages: Vec<StageRecord>,
    /// `R` was not reconstructed; `r` then holds only the last stage's factor.
    pub r_less: bool,
}

impl StageReport {
    pub fn cond_x(&self) -> Option<f64> {
        self.stages.iter().find_map(|s| s.cond_estimate)
    }

    pub fn retries(&self) -> usize {
        self.stages.iter().map(|s| s.retries).sum()
    }

    pub fn sketch_rows(&self) -> Option<usize> {
        self.stages.iter().find_map(|s| s.sketch_rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QRFactorization {
    pub q: DenseMatrix,
    pub r: UpperTriangular,
    pub report: StageReport,
}

/// Work phases a backend may time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Sketch,
    Precondition,
    Gram,
    Cholesky,
    Trisolve,
    Combine,
    Diagnostics,
}

/// The operations that touch all `m` rows. Everything else in the
/// algorithms works on `n x n` or `l x n` data.
pub trait Backend {
    fn gram(&self, a: &DenseMatrix) -> Result<DenseMatrix>;

    fn trisolve_in_place(&self, x: &mut DenseMatrix, r: &UpperTriangular) -> Result<()>;

    fn sketch(&self, a: &DenseMatrix, q: Option<&DenseMatrix>, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
        sketch::draw(a, q, cfg, rng)
    }

    /// Runs small root-side work; backends may time it.
    fn local<T>(&self, _phase: Phase, f: impl FnOnce() -> T) -> T {
        f()
    }
}

/// The plain sequential kernels.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Backend for Sequential {
    fn gram(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        kernels::gram(a)
    }

    fn trisolve_in_place(&self, x: &mut DenseMatrix, r: &UpperTriangular) -> Result<()> {
        kernels::right_trisolve_in_place(x, r)
    }
}

fn check_input(a: &DenseMatrix) -> Result<()> {
    if a.cols() == 0 || a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "tall-and-skinny input needs m >= n >= 1, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite()
}

/// One CholeskyQR pass on `x` in place; returns `R`.
fn cholqr_pass<B: Backend>(b: &B, x: &mut DenseMatrix, shift: f64) -> Result<UpperTriangular> {
    let mut g = b.gram(x)?;
    if shift != 0.0 {
        for i in 0..g.rows() {
            g.set(i, i, g.get(i, i) + shift);
        }
    }
    let r = b.local(Phase::Cholesky, || kernels::cholesky_upper(&g))?;
    b.trisolve_in_place(x, &r)?;
    Ok(r)
}

fn combine<B: Backend>(b: &B, outer: &UpperTriangular, inner: &UpperTriangular) -> Result<UpperTriangular> {
    b.local(Phase::Combine, || outer.mul(inner))
}

/// Runs `method` on `a` with the given backend.
pub fn factor_with<B: Backend>(b: &B, method: &Method, a: &DenseMatrix, opts: FactorOptions) -> Result<QRFactorization> {
    check_input(a)?;
    match method {
        Method::Householder => {
            let (q, r) = b.local(Phase::Precondition, || kernels::householder_qr(a))?;
            Ok(QRFactorization { q, r, report: report(vec![StageRecord::plain(StageName::Householder)], false) })
        }
        Method::CholeskyQr => {
            let mut q = a.clone();
            let r = cholqr_pass(b, &mut q, 0.0)?;
            Ok(QRFactorization { q, r, report: report(vec![StageRecord::plain(StageName::CholeskyQr)], false) })
        }
        Method::CholeskyQr2 => {
            let mut q = a.clone();
            let r1 = cholqr_pass(b, &mut q, 0.0)?;
            let r2 = cholqr_pass(b, &mut q, 0.0)?;
            let r = if opts.r_less { r2 } else { combine(b, &r2, &r1)? };
            let stages = vec![StageRecord::plain(StageName::CholeskyQr), StageRecord::plain(StageName::CholeskyQr)];
            Ok(QRFactorization { q, r, report: report(stages, opts.r_less) })
        }
        Method::ShiftedCholeskyQr3(mode) => {
            let shift = mode.shift(a);
            let mut q = a.clone();
            let r1 = cholqr_pass(b, &mut q, shift)?;
            let r2 = cholqr_pass(b, &mut q, 0.0)?;
            let r3 = cholqr_pass(b, &mut q, 0.0)?;
            let r = if opts.r_less { r3 } else { combine(b, &r3, &combine(b, &r2, &r1)?)? };
            let mut first = StageRecord::plain(StageName::ShiftedCholeskyQr);
            first.shift = Some(shift);
            let stages = vec![first, StageRecord::plain(StageName::CholeskyQr), StageRecord::plain(StageName::CholeskyQr)];
            Ok(QRFactorization { q, r, report: report(stages, opts.r_less) })
        }
        Method::Rlu(cfg) => precond_with(b, a, None, &kernels::lu_upper, cfg, opts),
        Method::Rqr(cfg) => precond_with(b, a, None, &kernels::qr_rless, cfg, opts),
    }
}

fn report(stages: Vec<StageRecord>, r_less: bool) -> StageReport {
    StageReport { stages, r_less }
}

/// `R~` factor of a sketch; e.g. [`kernels::qr_rless`] or [`kernels::lu_upper`].
pub type Preconditioner<'a> = &'a (dyn Fn(&DenseMatrix) -> Result<UpperTriangular> + Sync);

/// The preconditioned framework: sketch, `R~ = precond(A1)`, `X = A R~^-1`,
/// CholeskyQR of `X`, `R = R^ R~`.
///
/// `q_oracle` is needed only for leverage sampling. A degenerate `R~` is
/// redrawn with a grown sketch up to `cfg.max_retries` times.
pub fn precond_with<B: Backend>(
    b: &B,
    a: &DenseMatrix,
    q_oracle: Option<&DenseMatrix>,
    precond: Preconditioner<'_>,
    cfg: &SketchConfig,
    opts: FactorOptions,
) -> Result<QRFactorization> {
    check_input(a)?;
    let rough = rough_factor(b, a, q_oracle, precond, cfg)?;
    let (rt, retries, used_rows) = (rough.r, rough.retries, rough.rows);

    let mut x = a.clone();
    b.trisolve_in_place(&mut x, &rt)?;
    let cond_estimate = if opts.diagnostics {
        Some(b.local(Phase::Diagnostics, || cond_via_r(&x))?)
    } else {
        None
    };
    let rh = cholqr_pass(b, &mut x, 0.0)?;
    let r = if opts.r_less { rh } else { combine(b, &rh, &rt)? };
    let pre = StageRecord {
        name: StageName::Precondition,
        cond_estimate,
        shift: None,
        retries,
        sketch_rows: Some(used_rows),
    };
    Ok(QRFactorization { q: x, r, report: report(vec![pre, StageRecord::plain(StageName::CholeskyQr)], opts.r_less) })
}

/// Triangular factor of an accepted sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughFactor {
    /// `R~`, sign-normalized to a positive diagonal.
    pub r: UpperTriangular,
    pub retries: usize,
    /// Rows of the accepted sketch.
    pub rows: usize,
}

/// Sketches `a` and factors the sketch, redrawing with a grown sketch while
/// `R~` is singular or numerically degenerate.
pub fn rough_factor<B: Backend>(
    b: &B,
    a: &DenseMatrix,
    q_oracle: Option<&DenseMatrix>,
    precond: Preconditioner<'_>,
    cfg: &SketchConfig,
) -> Result<RoughFactor> {
    let (m, n) = a.shape();
    let mut rng = rng::stream(cfg.seed, streams::SKETCH);
    let mut last_err = None;
    for attempt in 0..=cfg.max_retries {
        let l = cfg.rows_for_attempt(m, n, attempt)?;
        let attempt_cfg = SketchConfig { size: SketchSize::Rows(l), ..cfg.clone() };
        let sk = b.sketch(a, q_oracle, &attempt_cfg, &mut rng)?;
        match b.local(Phase::Precondition, || precond(&sk.a1)) {
            Ok(mut rt) => {
                rt.normalize_signs();
                if rt.diagonal_ratio() >= DEGENERATE_RATIO {
                    return Ok(RoughFactor { r: rt, retries: attempt, rows: l });
                }
                let d = rt.diagonal();
                let idx = (0..n).min_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs())).unwrap_or(0);
                last_err = Some(Error::SingularTriangular { index: idx });
            }
            Err(e @ Error::SingularTriangular { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::SingularTriangular { index: 0 }))
}

/// `cond(X)` from the singular values of the `R` factor of `X`.
pub(crate) fn cond_via_r(x: &DenseMatrix) -> Result<f64> {
    let r = kernels::qr_rless(x)?;
    let s = kernels::svd_values(&r.to_dense())?;
    let (hi, lo) = (s[0], s[s.len() - 1]);
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

/// Runs `method` sequentially.
pub fn factor(method: &Method, a: &DenseMatrix, opts: FactorOptions) -> Result<QRFactorization> {
    factor_with(&Sequential, method, a, opts)
}

pub fn householder(a: &DenseMatrix) -> Result<QRFactorization> {
    factor(&Method::Householder, a, FactorOptions::default())
}

pub fn cholesky_qr(a: &DenseMatrix) -> Result<QRFactorization> {
    factor(&Method::CholeskyQr, a, FactorOptions::default())
}

pub fn cholesky_qr2(a: &DenseMatrix) -> Result<QRFactorization> {
    factor(&Method::CholeskyQr2, a, FactorOptions::default())
}

pub fn shifted_cholesky_qr3(a: &DenseMatrix, shift: ShiftMode) -> Result<QRFactorization> {
    factor(&Method::ShiftedCholeskyQr3(shift), a, FactorOptions::default())
}

pub fn precond_cholesky_qr(
    a: &DenseMatrix,
    precond: Preconditioner<'_>,
    cfg: &SketchConfig,
    opts: FactorOptions,
) -> Result<QRFactorization> {
    precond_with(&Sequential, a, None, precond, cfg, opts)
}

pub fn rqr_cholesky_qr(a: &DenseMatrix, cfg: &SketchConfig) -> Result<QRFactorization> {
    factor(&Method::Rqr(cfg.clone()), a, FactorOptions::default())
}

pub fn rlu_cholesky_qr(a: &DenseMatrix, cfg: &SketchConfig) -> Result<QRFactorization> {
    factor(&Method::Rlu(cfg.clone()), a, FactorOptions::default())
}
