//! Sketches `A1 = P A` of a tall matrix: uniform row sampling, leverage-score
//! row sampling and Gaussian projection.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::par;
use crate::rng::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchStrategy {
    Uniform,
    /// Rows drawn with probability `||q_i||^2 / n`. Needs the orthogonal
    /// factor, so it is only useful as a test oracle.
    Leverage,
    Gaussian,
}

impl SketchStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SketchStrategy::Uniform => "uniform",
            SketchStrategy::Leverage => "leverage",
            SketchStrategy::Gaussian => "gaussian",
        }
    }
}

/// Sketch size, either an explicit row count or the rate `l / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SketchSize {
    Rows(usize),
    Rate(f64),
}

impl SketchSize {
    /// Resolves to `l` with `n <= l <= m`.
    pub fn resolve(self, m: usize, n: usize) -> Result<usize> {
        let l = match self {
            SketchSize::Rows(l) => l,
            SketchSize::Rate(rho) => {
                if !(rho >= 1.0) || !rho.is_finite() {
                    return Err(Error::InvalidArgument(format!("sampling rate must be >= 1, got {rho}")));
                }
                // The small offset keeps e.g. 1.1 * 100 from rounding up to 111.
                (rho * n as f64 - 1e-9).ceil() as usize
            }
        };
        if l < n || l > m {
            return Err(Error::InvalidArgument(format!("sketch size l={l} outside [n, m] = [{n}, {m}]")));
        }
        Ok(l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    pub strategy: SketchStrategy,
    pub size: SketchSize,
    pub seed: u64,
    pub max_retries: usize,
    pub retry_growth: f64,
    /// Draw distinct rows. Off by default: the concentration results assume
    /// i.i.d. draws.
    pub without_replacement: bool,
}

impl Default for SketchConfig {
    fn default() -> Self {
        SketchConfig {
            strategy: SketchStrategy::Uniform,
            size: SketchSize::Rate(2.0),
            seed: 0,
            max_retries: 2,
            retry_growth: 2.0,
            without_replacement: false,
        }
    }
}

impl SketchConfig {
    pub fn new(strategy: SketchStrategy, size: SketchSize, seed: u64) -> Self {
        SketchConfig { strategy, size, seed, ..Default::default() }
    }

    pub fn uniform(size: SketchSize, seed: u64) -> Self {
        Self::new(SketchStrategy::Uniform, size, seed)
    }

    pub fn gaussian(size: SketchSize, seed: u64) -> Self {
        Self::new(SketchStrategy::Gaussian, size, seed)
    }

    pub fn with_retries(mut self, max_retries: usize) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn with_replacement(mut self, with: bool) -> Self {
        self.without_replacement = !with;
        self
    }

    pub fn rows(&self, m: usize, n: usize) -> Result<usize> {
        self.size.resolve(m, n)
    }

    /// Size used on retry number `attempt` (0 = first draw): grown
    /// geometrically and capped at `m`.
    pub fn rows_for_attempt(&self, m: usize, n: usize, attempt: usize) -> Result<usize> {
        let mut l = self.rows(m, n)?;
        for _ in 0..attempt {
            l = ((l as f64 * self.retry_growth).ceil() as usize).clamp(l, m);
        }
        Ok(l)
    }
}

/// Where the rows of a sketch came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Source row of each sketch row, in draw order.
    Rows(Vec<usize>),
    /// Seed of the Gaussian projection; row `t` of the projection is drawn
    /// from stream `t` of this seed.
    Projection { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    pub a1: DenseMatrix,
    pub provenance: Provenance,
    /// Per-row scale factors (leverage sampling only).
    pub weights: Option<Vec<f64>>,
}

impl Sketch {
    pub fn rows(&self) -> usize {
        self.a1.rows()
    }

    /// Rebuilds `a1` from `a` and the provenance alone.
    pub fn reconstruct(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.provenance {
            Provenance::Rows(idx) => {
                let mut out = a.select_rows(idx);
                if let Some(w) = &self.weights {
                    for (i, &s) in w.iter().enumerate() {
                        out.row_mut(i).iter_mut().for_each(|x| *x *= s);
                    }
                }
                Ok(out)
            }
            Provenance::Projection { seed } => Ok(gaussian_project(a, self.a1.rows(), *seed)),
        }
    }
}

/// `l` rows drawn uniformly, with replacement unless the config says
/// otherwise.
pub fn sample_rows_uniform(a: &DenseMatrix, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
    let (m, n) = a.shape();
    let l = cfg.rows(m, n)?;
    let idx: Vec<usize> = if cfg.without_replacement {
        rand::seq::index::sample(rng, m, l).into_vec()
    } else {
        (0..l).map(|_| rng.random_range(0..m)).collect()
    };
    Ok(Sketch { a1: a.select_rows(&idx), provenance: Provenance::Rows(idx), weights: None })
}

/// `l` rows drawn i.i.d. with probability `||q_i||^2 / n`; sketch row `i` is
/// `A(idx, :) / ||q_idx||`.
pub fn sample_rows_leverage(a: &DenseMatrix, q: &DenseMatrix, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
    let (m, n) = a.shape();
    if q.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "orthogonal factor is {}x{}, matrix is {m}x{n}",
            q.rows(),
            q.cols()
        )));
    }
    let l = cfg.rows(m, n)?;
    let scores: Vec<f64> = (0..m).map(|i| q.row(i).iter().map(|x| x * x).sum()).collect();
    let total: f64 = scores.iter().map(|s| s / n as f64).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "leverage probabilities sum to {total}, the factor is not orthonormal"
        )));
    }
    let dist = WeightedIndex::new(&scores).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut idx = Vec::with_capacity(l);
    let mut weights = Vec::with_capacity(l);
    for _ in 0..l {
        let i = dist.sample(rng);
        let p = scores[i] / n as f64;
        if !(p > 0.0) {
            return Err(Error::ZeroLeverageRow { row: i });
        }
        idx.push(i);
        weights.push(1.0 / scores[i].sqrt());
    }
    let mut a1 = a.select_rows(&idx);
    for (r, &w) in weights.iter().enumerate() {
        a1.row_mut(r).iter_mut().for_each(|x| *x *= w);
    }
    Ok(Sketch { a1, provenance: Provenance::Rows(idx), weights: Some(weights) })
}

/// `Omega A` with `Omega` an `l x m` standard Gaussian matrix that is never
/// stored: its rows are regenerated from the recorded seed.
pub fn sketch_gaussian(a: &DenseMatrix, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
    let (m, n) = a.shape();
    let l = cfg.rows(m, n)?;
    let seed = rng.next_u64();
    Ok(Sketch { a1: gaussian_project(a, l, seed), provenance: Provenance::Projection { seed }, weights: None })
}

fn gaussian_project(a: &DenseMatrix, l: usize, seed: u64) -> DenseMatrix {
    let (m, n) = a.shape();
    let rows = par::map_range(l, |t| {
        let mut r = rng::stream(seed, t as u64);
        let mut omega = vec![0.0; m];
        rng::fill_standard_normal(&mut r, &mut omega);
        let mut out = vec![0.0; n];
        for (i, &w) in omega.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(a.row(i)) {
                *o += w * x;
            }
        }
        out
    });
    DenseMatrix::from_vec(l, n, rows.concat()).expect("l x n sketch")
}

/// Draws a sketch with the configured strategy. Leverage sampling needs the
/// orthogonal factor `q`.
pub fn draw(a: &DenseMatrix, q: Option<&DenseMatrix>, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
    match cfg.strategy {
        SketchStrategy::Uniform => sample_rows_uniform(a, cfg, rng),
        SketchStrategy::Gaussian => sketch_gaussian(a, cfg, rng),
        SketchStrategy::Leverage => match q {
            Some(q) => sample_rows_leverage(a, q, cfg, rng),
            None => Err(Error::InvalidArgument("leverage sampling needs the orthogonal factor".into())),
        },
    }
}
