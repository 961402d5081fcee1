//! The five experiment families.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rcholqr::apps::{self, rsvd_power, Orthogonalizer, SparseMatrixCSR};
use rcholqr::cholqr::{self, Sequential};
use rcholqr::diagnostics::{orthogonality_error, residual_error};
use rcholqr::matgen::SpectralFrame;
use rcholqr::parexec::run_parallel;
use rcholqr::{kernels, DenseMatrix, FactorOptions, Method, SketchConfig, SketchSize, SketchStrategy};

use crate::record::{RsvdRecord, RunRecord, SamplingRecord, Status};
use crate::{BenchError, BenchMethod, MethodSetup};

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn check_shape(m: usize, n: usize, p: usize) -> Result<(), BenchError> {
    if n == 0 || m < n {
        return Err(BenchError::Usage(format!("need m >= n >= 1, got m={m} n={n}")));
    }
    if p == 0 || p > m {
        return Err(BenchError::Usage(format!("need 1 <= p <= m, got p={p}")));
    }
    Ok(())
}

fn check_kappa(kappa: f64, n: usize) -> Result<(), BenchError> {
    if !(kappa >= 1.0 && kappa.is_finite()) || (n == 1 && kappa != 1.0) {
        return Err(BenchError::Usage(format!("kappa {kappa} is not valid for n={n}")));
    }
    Ok(())
}

/// Runs one factorization and measures it. Breakdowns become a status, not
/// an error.
pub fn run_one(
    method: BenchMethod,
    setup: &MethodSetup,
    a: &DenseMatrix,
    kappa: f64,
    seed: u64,
    p: usize,
) -> Result<RunRecord, BenchError> {
    let (m, n) = a.shape();
    let built = method.build(setup, seed);
    let opts = FactorOptions { r_less: false, diagnostics: setup.diag };
    let start = Instant::now();
    let outcome = match &built {
        Method::Householder => cholqr::factor(&built, a, opts).map(|f| (f, None)),
        _ => run_parallel(&built, a, p, opts).map(|(f, t)| (f, Some(t))),
    };
    let wall = start.elapsed();

    let mut rec = RunRecord {
        method: method.name().to_string(),
        m,
        n,
        l: None,
        p: if matches!(built, Method::Householder) { 1 } else { p },
        kappa,
        seed,
        status: Status::Ok,
        orth_err: None,
        res_err: None,
        cond_x: None,
        retries: 0,
        sketch_ms: 0.0,
        precondition_ms: 0.0,
        gram_ms: 0.0,
        cholesky_ms: 0.0,
        trisolve_ms: 0.0,
        combine_ms: 0.0,
        wall_ms: ms(wall),
        comm_rounds: 0,
        comm_volume: 0.0,
        speedup: None,
    };
    match outcome {
        Ok((f, timing)) => {
            rec.orth_err = Some(orthogonality_error(&f.q));
            rec.res_err = Some(residual_error(a, &f.q, &f.r)?);
            rec.cond_x = f.report.cond_x();
            rec.l = f.report.sketch_rows();
            rec.retries = f.report.retries();
            if let Some(t) = timing {
                rec.sketch_ms = ms(t.sketch);
                rec.precondition_ms = ms(t.precondition);
                rec.gram_ms = ms(t.gram);
                rec.cholesky_ms = ms(t.cholesky);
                rec.trisolve_ms = ms(t.trisolve);
                rec.combine_ms = ms(t.combine);
                rec.wall_ms = ms(t.total - t.diagnostics);
                rec.comm_rounds = t.comm.rounds;
                rec.comm_volume = t.comm.volume;
            }
        }
        Err(e) => rec.status = Status::from_error(&e).ok_or(e)?,
    }
    Ok(rec)
}

#[derive(Debug, Clone)]
pub struct AccuracyParams {
    pub m: usize,
    pub n: usize,
    pub kappas: Vec<f64>,
    pub methods: Vec<BenchMethod>,
    pub seeds: Vec<u64>,
    pub p: usize,
    pub setup: MethodSetup,
}

/// Every method on every `(kappa, seed)`; one synthetic frame per seed.
pub fn accuracy(params: &AccuracyParams) -> Result<Vec<RunRecord>, BenchError> {
    let AccuracyParams { m, n, p, .. } = *params;
    check_shape(m, n, p)?;
    for &k in &params.kappas {
        check_kappa(k, n)?;
    }
    let mut out = Vec::new();
    for &seed in &params.seeds {
        let frame = SpectralFrame::new(m, n, seed)?;
        for &kappa in &params.kappas {
            let a = frame.with_kappa(kappa)?;
            for &method in &params.methods {
                out.push(run_one(method, &params.setup, &a, kappa, seed, p)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RuntimeParams {
    pub ms: Vec<usize>,
    pub n: usize,
    pub kappa: f64,
    pub p: usize,
    pub methods: Vec<BenchMethod>,
    pub seeds: Vec<u64>,
    pub reps: usize,
    pub setup: MethodSetup,
}

/// Median-of-`reps` run (by wall time). The matrix is generated once.
pub fn timed_median(
    method: BenchMethod,
    setup: &MethodSetup,
    a: &DenseMatrix,
    kappa: f64,
    seed: u64,
    p: usize,
    reps: usize,
) -> Result<RunRecord, BenchError> {
    let mut runs = (0..reps.max(1)).map(|_| run_one(method, setup, a, kappa, seed, p)).collect::<Result<Vec<_>, _>>()?;
    runs.sort_by(|x, y| x.wall_ms.total_cmp(&y.wall_ms));
    Ok(runs.swap_remove(runs.len() / 2))
}

/// Wall time of each method across a grid of row counts.
pub fn runtime(params: &RuntimeParams) -> Result<Vec<RunRecord>, BenchError> {
    check_kappa(params.kappa, params.n)?;
    let mut out = Vec::new();
    for &m in &params.ms {
        check_shape(m, params.n, params.p)?;
        for &seed in &params.seeds {
            let a = SpectralFrame::new(m, params.n, seed)?.with_kappa(params.kappa)?;
            for &method in &params.methods {
                out.push(timed_median(method, &params.setup, &a, params.kappa, seed, params.p, params.reps)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// Fixed total `m`.
    Strong,
    /// Fixed `m / p`.
    Weak,
}

#[derive(Debug, Clone)]
pub struct ScalingParams {
    pub mode: ScalingMode,
    /// Total rows (strong) or rows per worker (weak).
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub ps: Vec<usize>,
    pub methods: Vec<BenchMethod>,
    pub seeds: Vec<u64>,
    pub reps: usize,
    pub setup: MethodSetup,
}

/// Strong or weak scaling over the worker counts; `speedup` is relative to
/// the first `p` of the grid (normally 1).
pub fn scaling(params: &ScalingParams) -> Result<Vec<RunRecord>, BenchError> {
    check_kappa(params.kappa, params.n)?;
    if params.ps.is_empty() {
        return Err(BenchError::Usage("empty worker grid".into()));
    }
    let methods: Vec<BenchMethod> = params.methods.iter().copied().filter(|&m| m != BenchMethod::Householder).collect();
    if methods.is_empty() {
        return Err(BenchError::Usage("scaling needs a row-parallel method (not householder)".into()));
    }
    let mut out = Vec::new();
    for &seed in &params.seeds {
        let mut cached: Option<DenseMatrix> = None;
        let mut base: Vec<Option<f64>> = vec![None; methods.len()];
        for &p in &params.ps {
            let m = match params.mode {
                ScalingMode::Strong => params.m,
                ScalingMode::Weak => params.m * p,
            };
            check_shape(m, params.n, p)?;
            if cached.as_ref().is_none_or(|a| a.rows() != m) {
                // Drop the old matrix before building the next one.
                drop(cached.take());
                cached = Some(SpectralFrame::new(m, params.n, seed)?.with_kappa(params.kappa)?);
            }
            let a = cached.as_ref().expect("matrix generated above");
            for (i, &method) in methods.iter().enumerate() {
                let mut rec = timed_median(method, &params.setup, a, params.kappa, seed, p, params.reps)?;
                let t0 = *base[i].get_or_insert(rec.wall_ms);
                rec.speedup = Some(t0 / rec.wall_ms);
                out.push(rec);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SamplingParams {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub rates: Vec<f64>,
    pub strategy: SketchStrategy,
    pub seeds: Vec<u64>,
}

/// `cond(X)` of `X = A R~^-1` for a grid of sampling rates. Each seed gets
/// its own matrix and sketch; no retries, so a singular sketch is recorded.
pub fn sampling(params: &SamplingParams) -> Result<Vec<SamplingRecord>, BenchError> {
    let SamplingParams { m, n, kappa, .. } = *params;
    check_shape(m, n, 1)?;
    check_kappa(kappa, n)?;
    for &rho in &params.rates {
        if !(rho >= 1.0) || rho * n as f64 > m as f64 + 1e-9 {
            return Err(BenchError::Usage(format!("rate {rho} must satisfy 1 <= rate and rate*n <= m")));
        }
    }
    let mut out = Vec::new();
    for &seed in &params.seeds {
        let frame = SpectralFrame::new(m, n, seed)?;
        let a = frame.with_kappa(kappa)?;
        // The left frame is an exact orthogonal basis of range(A).
        let q = (params.strategy == SketchStrategy::Leverage).then_some(&frame.u);
        for &rate in &params.rates {
            let cfg = SketchConfig::new(params.strategy, SketchSize::Rate(rate), seed).with_retries(0);
            let l = cfg.rows(m, n)?;
            let (status, cond_x) = match preconditioned_cond(&a, q, &cfg) {
                Ok(c) => (Status::Ok, Some(c)),
                Err(e) => (Status::from_error(&e).ok_or(e)?, None),
            };
            out.push(SamplingRecord {
                strategy: params.strategy.name().to_string(),
                m,
                n,
                kappa,
                rate,
                l,
                seed,
                status,
                cond_x,
            });
        }
    }
    Ok(out)
}

/// `cond(A R~^-1)` with `R~` from a Q-less QR of the sketch.
pub fn preconditioned_cond(a: &DenseMatrix, q: Option<&DenseMatrix>, cfg: &SketchConfig) -> rcholqr::Result<f64> {
    let rough = cholqr::rough_factor(&Sequential, a, q, &kernels::qr_rless, cfg)?;
    let x = kernels::right_trisolve(a, &rough.r)?;
    let s = kernels::svd_values(&kernels::qr_rless(&x)?.to_dense())?;
    let lo = s[s.len() - 1];
    Ok(if lo > 0.0 { s[0] / lo } else { f64::INFINITY })
}

#[derive(Debug, Clone)]
pub enum SparseSource {
    MatrixMarket(PathBuf),
    Synthetic { m: usize, n: usize, density: f64 },
}

#[derive(Debug, Clone)]
pub struct RsvdParams {
    pub source: SparseSource,
    pub k: usize,
    pub power: usize,
    pub orths: Vec<Orthogonalizer>,
    pub seeds: Vec<u64>,
}

/// Per-iteration orthogonalization times of the power-iteration RSVD for
/// each orthogonalizer, with the Householder/other time ratio.
pub fn rsvd(params: &RsvdParams) -> Result<Vec<RsvdRecord>, BenchError> {
    if params.orths.is_empty() {
        return Err(BenchError::Usage("no orthogonalizer selected".into()));
    }
    let mut out = Vec::new();
    let loaded = match &params.source {
        SparseSource::MatrixMarket(path) => Some((
            path.file_name().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            apps::sparse::load_matrix_market(path)?,
        )),
        SparseSource::Synthetic { density, .. } if !(*density > 0.0 && *density <= 1.0) => {
            return Err(BenchError::Usage(format!("density must lie in (0, 1], got {density}")));
        }
        SparseSource::Synthetic { .. } => None,
    };
    for &seed in &params.seeds {
        let (label, a) = match (&loaded, &params.source) {
            (Some((label, a)), _) => (label.clone(), a.clone()),
            (None, SparseSource::Synthetic { m, n, density }) => {
                ("synthetic".to_string(), SparseMatrixCSR::random(*m, *n, *density, seed)?)
            }
            (None, SparseSource::MatrixMarket(_)) => unreachable!("loaded above"),
        };
        let (m, n) = a.shape();
        if params.k == 0 || params.k > m.min(n) {
            return Err(BenchError::Usage(format!("k = {} must lie in 1..={}", params.k, m.min(n))));
        }
        let results = params
            .orths
            .iter()
            .map(|&o| rsvd_power(&a, params.k, params.power, o, seed).map(|r| (o, r)))
            .collect::<Result<Vec<_>, _>>()?;
        let reference = results.iter().find(|(o, _)| *o == Orthogonalizer::Householder).map(|(_, r)| r);
        for (orth, r) in &results {
            let row = |iteration: String, t: Duration, qr_t: Option<Duration>| RsvdRecord {
                matrix: label.clone(),
                m,
                n,
                nnz: a.nnz(),
                k: params.k,
                power: params.power,
                orth: orth.name().to_string(),
                seed,
                iteration,
                orth_ms: ms(t),
                ratio: qr_t.map(|q| q.as_secs_f64() / t.as_secs_f64()),
                sigma_max: None,
                sigma_k: None,
                sigma_rel_diff: None,
            };
            for (i, &t) in r.per_iteration_orth_time.iter().enumerate() {
                out.push(row(i.to_string(), t, reference.map(|q| q.per_iteration_orth_time[i])));
            }
            let mut total = row("total".into(), r.total_orth_time(), reference.map(|q| q.total_orth_time()));
            total.sigma_max = r.sigma.first().copied();
            total.sigma_k = r.sigma.last().copied();
            total.sigma_rel_diff = reference.map(|q| {
                q.sigma.iter().zip(&r.sigma).map(|(x, y)| (x - y).abs() / x.abs()).fold(0.0, f64::max)
            });
            out.push(total);
        }
    }
    Ok(out)
}

/// Least-squares fit `t = a + b m` per method with its `R^2`, plus the
/// CholeskyQR2/rQR time ratio at the largest `m`. Informational lines for
/// the runtime command.
pub fn runtime_summary(rows: &[RunRecord]) -> Vec<String> {
    let mut lines = Vec::new();
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.dedup();
    methods.sort_unstable();
    methods.dedup();
    for method in methods {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.method == method && r.status == Status::Ok).map(|r| (r.m as f64, r.wall_ms)).collect();
        if let Some((slope, r2)) = linear_fit(&pts) {
            lines.push(format!("{method}: {:.3} ms per 1e5 rows, R^2 = {r2:.4}", slope * 1e5));
        }
    }
    if let Some(m_max) = rows.iter().map(|r| r.m).max() {
        let median_at = |name: &str| {
            let v: Vec<f64> = rows.iter().filter(|r| r.method == name && r.m == m_max).map(|r| r.wall_ms).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        if let (Some(c2), Some(rq)) = (median_at("cholqr2"), median_at("rqr")) {
            lines.push(format!("cholqr2/rqr time ratio at m = {m_max}: {:.3}", c2 / rq));
        }
    }
    lines
}

/// Slope and coefficient of determination of a least-squares line.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}
