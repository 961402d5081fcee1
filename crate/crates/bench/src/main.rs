use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcholqr::apps::Orthogonalizer;
use rcholqr::{SketchSize, SketchStrategy};
use serde::Serialize;

use rcholqr_bench::experiments::{self, ScalingMode, SparseSource};
use rcholqr_bench::grid::{parse_count_grid, parse_grid};
use rcholqr_bench::record::{write_csv, RSVD_HEADER, RUN_HEADER, SAMPLING_HEADER};
use rcholqr_bench::{parse_shift_mode, BenchError, BenchMethod, MethodSetup};

/// Benchmarks for randomized CholeskyQR. Every command writes CSV.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Orthogonality and residual across a condition-number grid.
    Accuracy(AccuracyArgs),
    /// Wall time across a grid of row counts.
    Runtime(RuntimeArgs),
    /// Strong or weak scaling in the number of workers.
    Scaling(ScalingArgs),
    /// cond(X) after preconditioning across sampling rates.
    Sampling(SamplingArgs),
    /// Orthogonalization time inside randomized SVD with power iteration.
    Rsvd(RsvdArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Number of seeds; seeds run from --seed0.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed0: u64,
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn seed_list(&self) -> Result<Vec<u64>, BenchError> {
        if self.seeds == 0 {
            return Err(BenchError::Usage("--seeds must be positive".into()));
        }
        Ok((0..self.seeds).map(|i| self.seed0.wrapping_add(i)).collect())
    }
}

#[derive(Args, Debug)]
struct MethodArgs {
    /// `all` or a comma list of householder, cholqr, cholqr2, scholqr3,
    /// rlu, rqr, rqr-gauss.
    #[arg(long)]
    methods: Option<String>,
    /// Sketch rows; overrides --rate.
    #[arg(long)]
    l: Option<usize>,
    /// Sketch rate l/n.
    #[arg(long, default_value_t = 2.0)]
    rate: f64,
    /// `theory`, `fixed` or `fixed:<value>`.
    #[arg(long, default_value = "fixed")]
    shift_mode: String,
    /// Record cond(X) of the preconditioned matrix.
    #[arg(long)]
    diag: bool,
}

impl MethodArgs {
    fn setup(&self) -> Result<MethodSetup, BenchError> {
        let sketch = match self.l {
            Some(0) => return Err(BenchError::Usage("--l must be positive".into())),
            Some(l) => SketchSize::Rows(l),
            None if self.rate >= 1.0 && self.rate.is_finite() => SketchSize::Rate(self.rate),
            None => return Err(BenchError::Usage(format!("--rate must be at least 1, got {}", self.rate))),
        };
        Ok(MethodSetup { sketch, shift: parse_shift_mode(&self.shift_mode)?, diag: self.diag })
    }

    fn methods(&self, default: &str) -> Result<Vec<BenchMethod>, BenchError> {
        BenchMethod::parse_list(self.methods.as_deref().unwrap_or(default))
    }
}

#[derive(Args, Debug)]
struct AccuracyArgs {
    #[arg(long, default_value = "10000")]
    m: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value = "1e3:1e15:log10")]
    kappa: String,
    #[arg(long, default_value_t = 8)]
    p: usize,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RuntimeArgs {
    /// Row-count grid.
    #[arg(long, default_value = "1e5:1e6")]
    m: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1e5)]
    kappa: f64,
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// Repetitions per cell; the median is kept.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strong,
    Weak,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, value_enum, default_value = "strong")]
    mode: ModeArg,
    /// Total rows (strong) or rows per worker (weak).
    #[arg(long, default_value = "200000")]
    m: String,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1e5)]
    kappa: f64,
    /// Worker-count grid.
    #[arg(long, default_value = "1,2,4,8")]
    p: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Uniform,
    Leverage,
    Gaussian,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long, default_value = "10000")]
    m: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1e5)]
    kappa: f64,
    /// Grid of sampling rates l/n.
    #[arg(long, default_value = "1.0:3.0:0.1")]
    rate: String,
    #[arg(long, value_enum, default_value = "uniform")]
    sketch: StrategyArg,
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed0: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RsvdArgs {
    /// Matrix Market input; a random sparse matrix is generated otherwise.
    #[arg(long)]
    mm: Option<PathBuf>,
    #[arg(long, default_value = "50000")]
    m: String,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 1e-4)]
    density: f64,
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Power iterations.
    #[arg(long, default_value_t = 3)]
    power: usize,
    /// Comma list of qr, rqr, cholqr2.
    #[arg(long, default_value = "qr,rqr")]
    orth: String,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed0: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn single_count(s: &str, flag: &str) -> Result<usize, BenchError> {
    match parse_count_grid(s)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(BenchError::Usage(format!("{flag} takes a single value here, got '{s}'"))),
    }
}

fn seeds(count: u64, seed0: u64) -> Result<Vec<u64>, BenchError> {
    Common { seeds: count, seed0, out: None }.seed_list()
}

fn emit<T: Serialize>(out: &Option<PathBuf>, rows: &[T], header: &[&str]) -> Result<(), BenchError> {
    match out.as_deref() {
        Some(p) if p.as_os_str() != "-" => {
            let mut w = BufWriter::new(File::create(p)?);
            write_csv(&mut w, rows, header)?;
            w.flush()?;
        }
        _ => write_csv(io::stdout().lock(), rows, header)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.cmd {
        Cmd::Accuracy(a) => {
            let params = experiments::AccuracyParams {
                m: single_count(&a.m, "--m")?,
                n: a.n,
                kappas: parse_grid(&a.kappa)?,
                methods: a.method.methods("all")?,
                seeds: a.common.seed_list()?,
                p: a.p,
                setup: a.method.setup()?,
            };
            emit(&a.common.out, &experiments::accuracy(&params)?, RUN_HEADER)
        }
        Cmd::Runtime(a) => {
            let params = experiments::RuntimeParams {
                ms: parse_count_grid(&a.m)?,
                n: a.n,
                kappa: a.kappa,
                p: a.p,
                methods: a.method.methods("cholqr2,scholqr3,rlu,rqr")?,
                seeds: a.common.seed_list()?,
                reps: a.reps,
                setup: a.method.setup()?,
            };
            let rows = experiments::runtime(&params)?;
            for line in experiments::runtime_summary(&rows) {
                eprintln!("{line}");
            }
            emit(&a.common.out, &rows, RUN_HEADER)
        }
        Cmd::Scaling(a) => {
            let params = experiments::ScalingParams {
                mode: match a.mode {
                    ModeArg::Strong => ScalingMode::Strong,
                    ModeArg::Weak => ScalingMode::Weak,
                },
                m: single_count(&a.m, "--m")?,
                n: a.n,
                kappa: a.kappa,
                ps: parse_count_grid(&a.p)?,
                methods: a.method.methods("cholqr2,scholqr3,rlu,rqr")?,
                seeds: a.common.seed_list()?,
                reps: a.reps,
                setup: a.method.setup()?,
            };
            emit(&a.common.out, &experiments::scaling(&params)?, RUN_HEADER)
        }
        Cmd::Sampling(a) => {
            let params = experiments::SamplingParams {
                m: single_count(&a.m, "--m")?,
                n: a.n,
                kappa: a.kappa,
                rates: parse_grid(&a.rate)?,
                strategy: match a.sketch {
                    StrategyArg::Uniform => SketchStrategy::Uniform,
                    StrategyArg::Leverage => SketchStrategy::Leverage,
                    StrategyArg::Gaussian => SketchStrategy::Gaussian,
                },
                seeds: seeds(a.seeds, a.seed0)?,
            };
            emit(&a.out, &experiments::sampling(&params)?, SAMPLING_HEADER)
        }
        Cmd::Rsvd(a) => {
            let orths = a
                .orth
                .split(',')
                .map(|t| {
                    Orthogonalizer::parse(t.trim())
                        .ok_or_else(|| BenchError::Usage(format!("unknown orthogonalizer '{t}' (qr, rqr, cholqr2)")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let source = match a.mm {
                Some(path) => SparseSource::MatrixMarket(path),
                None => SparseSource::Synthetic { m: single_count(&a.m, "--m")?, n: a.n, density: a.density },
            };
            let params = experiments::RsvdParams { source, k: a.k, power: a.power, orths, seeds: seeds(a.seeds, a.seed0)? };
            emit(&a.out, &experiments::rsvd(&params)?, RSVD_HEADER)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
