//! Row-block parallel execution with simulated collectives.
//!
//! The `m` rows are split into `p` contiguous blocks, one per worker. Each
//! worker forms its share of the Grammian, the shares meet in a fixed
//! combining tree on the root (the reduce), the root factors the `n x n`
//! result and sends `R` back (the broadcast), and every worker solves its own
//! rows. Collectives run through shared memory; the messages an MPI run would
//! send are counted analytically in [`Communication`].
//!
//! The Grammian tree is defined over fixed row chunks, not over blocks, so
//! results are bitwise independent of `p`.

use std::cell::RefCell;
use std::time::{Duration, Instant};

use crate::cholqr::{self, Backend, FactorOptions, Method, Phase, QRFactorization};
use crate::error::{Error, Result};
use crate::kernels::{self, GramNode, GramTree};
use crate::matrix::{DenseMatrix, UpperTriangular};
use crate::par;
use crate::rng::SeededRng;
use crate::sketch::{self, Sketch, SketchConfig, SketchStrategy};

/// Row range `[start, end)` of each of `p` blocks: `[ceil(bm/p),
/// ceil((b+1)m/p))`, so the `m mod p` larger blocks come first.
pub fn block_bounds(m: usize, p: usize) -> Vec<(usize, usize)> {
    (0..p).map(|b| ((b * m).div_ceil(p), ((b + 1) * m).div_ceil(p))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockedMatrix {
    pub blocks: Vec<DenseMatrix>,
    pub offsets: Vec<usize>,
    pub p: usize,
}

impl BlockedMatrix {
    pub fn cols(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.cols())
    }

    pub fn rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum()
    }

    pub fn concat(&self) -> DenseMatrix {
        DenseMatrix::vstack(&self.blocks).expect("blocks share a column count")
    }
}

/// Splits `a` into `p` near-equal contiguous row blocks.
pub fn partition_rows(a: &DenseMatrix, p: usize) -> Result<BlockedMatrix> {
    check_workers(a.rows(), p)?;
    let bounds = block_bounds(a.rows(), p);
    Ok(BlockedMatrix {
        blocks: bounds.iter().map(|&(s, e)| a.row_range(s, e)).collect(),
        offsets: bounds.iter().map(|&(s, _)| s).collect(),
        p,
    })
}

fn check_workers(m: usize, p: usize) -> Result<()> {
    if p == 0 || p > m {
        return Err(Error::InvalidArgument(format!("worker count p={p} outside [1, m={m}]")));
    }
    Ok(())
}

/// Grammian of row-major `data` (`m x n`) with the rows split by `bounds`.
fn gram_rows(data: &[f64], m: usize, n: usize, bounds: &[(usize, usize)]) -> DenseMatrix {
    let tree = GramTree::new(m, n);
    // Each worker owns the tree chunks that start inside its rows.
    let partials: Vec<Vec<(GramNode, Vec<f64>)>> = par::map_slice(bounds, |&(s, e)| {
        let (c0, c1) = (tree.chunk_of_row(s), tree.chunk_of_row(e));
        tree.cover(c0, c1).into_iter().map(|node| (node, tree.subtree(data, node))).collect()
    });
    let mut known: Vec<(GramNode, Vec<f64>)> = partials.into_iter().flatten().collect();
    let mut g = tree.combine(&mut known, tree.root());
    kernels::mirror_upper(&mut g, n);
    DenseMatrix::from_vec(n, n, g).expect("n x n storage")
}

/// Sum of the block Grammians.
pub fn parallel_gram(b: &BlockedMatrix) -> Result<DenseMatrix> {
    let a = b.concat();
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!("Grammian needs rows >= cols, got {}x{}", a.rows(), a.cols())));
    }
    a.ensure_finite()?;
    let bounds: Vec<(usize, usize)> = b.offsets.iter().zip(&b.blocks).map(|(&s, blk)| (s, s + blk.rows())).collect();
    Ok(gram_rows(a.as_slice(), a.rows(), a.cols(), &bounds))
}

/// Solves `X_b R = A_b` independently on every block.
pub fn parallel_trisolve(b: &BlockedMatrix, r: &UpperTriangular) -> Result<BlockedMatrix> {
    kernels::check_trisolve(b.cols(), r)?;
    let mut out = b.clone();
    par::for_each_mut(&mut out.blocks, |_, blk| kernels::trisolve_rows(blk.as_mut_slice(), r));
    Ok(out)
}

fn trisolve_rows_blocked(data: &mut [f64], n: usize, bounds: &[(usize, usize)], r: &UpperTriangular) {
    let mut pieces = Vec::with_capacity(bounds.len());
    let mut rest = data;
    for &(s, e) in bounds {
        let (head, tail) = rest.split_at_mut((e - s) * n);
        pieces.push(head);
        rest = tail;
    }
    par::for_each_mut(&mut pieces, |_, piece| kernels::trisolve_rows(piece, r));
}

/// Message counts an MPI run of the same schedule would incur. Volumes are
/// in matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Communication {
    pub rounds: usize,
    pub volume: f64,
    pub reduces: usize,
    pub broadcasts: usize,
    pub gathers: usize,
}

impl Communication {
    /// Reduce of one `n x n` symmetric matrix from `p` workers.
    fn reduce_gram(&mut self, p: usize, n: usize) {
        self.rounds += 1;
        self.reduces += 1;
        self.volume += p as f64 * (n * n) as f64 / 2.0;
    }

    /// Broadcast of an `n x n` triangular factor to `p` workers.
    fn broadcast_r(&mut self, p: usize, n: usize) {
        self.rounds += 1;
        self.broadcasts += 1;
        self.volume += p as f64 * (n * n) as f64 / 2.0;
    }

    /// Gather of `l` sampled rows of length `n` on the root.
    fn gather_rows(&mut self, l: usize, n: usize) {
        self.rounds += 1;
        self.gathers += 1;
        self.volume += (l * n) as f64;
    }

    /// Reduce of the `l x n` partial Gaussian sketches.
    fn reduce_sketch(&mut self, p: usize, l: usize, n: usize) {
        self.rounds += 1;
        self.reduces += 1;
        self.volume += (p * l * n) as f64;
    }
}

/// Communication a run without sketch retries incurs (the cost table).
///
/// CholeskyQR sends one reduce and one broadcast, `p n^2` entries. The
/// randomized methods add a sketch gather (`n l`) and need one broadcast of
/// `R~` before the CholeskyQR pass: 4 rounds, `3/2 p n^2 + n l` entries.
pub fn expected_communication(method: &Method, n: usize, l: usize, p: usize) -> Option<(usize, f64)> {
    let pn2 = p as f64 * (n * n) as f64;
    let nl = (n * l) as f64;
    match method {
        Method::Householder => None,
        Method::CholeskyQr => Some((2, pn2)),
        Method::CholeskyQr2 => Some((4, 2.0 * pn2)),
        Method::ShiftedCholeskyQr3(_) => Some((6, 3.0 * pn2)),
        Method::Rlu(cfg) | Method::Rqr(cfg) => match cfg.strategy {
            SketchStrategy::Gaussian => Some((4, 1.5 * pn2 + p as f64 * nl)),
            _ => Some((4, 1.5 * pn2 + nl)),
        },
    }
}

/// Wall time per phase plus the simulated communication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimingBreakdown {
    pub sketch: Duration,
    pub precondition: Duration,
    pub gram: Duration,
    pub cholesky: Duration,
    pub trisolve: Duration,
    pub combine: Duration,
    pub diagnostics: Duration,
    pub total: Duration,
    pub comm: Communication,
}

impl TimingBreakdown {
    pub fn get(&self, phase: Phase) -> Duration {
        match phase {
            Phase::Sketch => self.sketch,
            Phase::Precondition => self.precondition,
            Phase::Gram => self.gram,
            Phase::Cholesky => self.cholesky,
            Phase::Trisolve => self.trisolve,
            Phase::Combine => self.combine,
            Phase::Diagnostics => self.diagnostics,
        }
    }

    fn add(&mut self, phase: Phase, d: Duration) {
        let slot = match phase {
            Phase::Sketch => &mut self.sketch,
            Phase::Precondition => &mut self.precondition,
            Phase::Gram => &mut self.gram,
            Phase::Cholesky => &mut self.cholesky,
            Phase::Trisolve => &mut self.trisolve,
            Phase::Combine => &mut self.combine,
            Phase::Diagnostics => &mut self.diagnostics,
        };
        *slot += d;
    }
}

/// Backend that splits every `m`-row operation over `p` row blocks.
#[derive(Debug)]
pub struct Parallel {
    p: usize,
    timing: RefCell<TimingBreakdown>,
}

impl Parallel {
    pub fn new(p: usize) -> Self {
        Parallel { p, timing: RefCell::new(TimingBreakdown::default()) }
    }

    pub fn workers(&self) -> usize {
        self.p
    }

    pub fn take_timing(&self) -> TimingBreakdown {
        self.timing.take()
    }

    fn timed<T>(&self, phase: Phase, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timing.borrow_mut().add(phase, t.elapsed());
        out
    }

    fn bounds(&self, m: usize) -> Result<Vec<(usize, usize)>> {
        check_workers(m, self.p)?;
        Ok(block_bounds(m, self.p))
    }
}

impl Backend for Parallel {
    fn gram(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::DimensionMismatch(format!("Grammian needs rows >= cols, got {m}x{n}")));
        }
        let bounds = self.bounds(m)?;
        let g = self.timed(Phase::Gram, || {
            a.ensure_finite()?;
            Ok::<_, Error>(gram_rows(a.as_slice(), m, n, &bounds))
        })?;
        self.timing.borrow_mut().comm.reduce_gram(self.p, n);
        Ok(g)
    }

    fn trisolve_in_place(&self, x: &mut DenseMatrix, r: &UpperTriangular) -> Result<()> {
        kernels::check_trisolve(x.cols(), r)?;
        let bounds = self.bounds(x.rows())?;
        let n = x.cols();
        self.timing.borrow_mut().comm.broadcast_r(self.p, n);
        self.timed(Phase::Trisolve, || trisolve_rows_blocked(x.as_mut_slice(), n, &bounds, r));
        Ok(())
    }

    fn sketch(&self, a: &DenseMatrix, q: Option<&DenseMatrix>, cfg: &SketchConfig, rng: &mut SeededRng) -> Result<Sketch> {
        let s = self.timed(Phase::Sketch, || sketch::draw(a, q, cfg, rng))?;
        let (l, n) = s.a1.shape();
        let mut t = self.timing.borrow_mut();
        match cfg.strategy {
            SketchStrategy::Gaussian => t.comm.reduce_sketch(self.p, l, n),
            _ => t.comm.gather_rows(l, n),
        }
        Ok(s)
    }

    fn local<T>(&self, phase: Phase, f: impl FnOnce() -> T) -> T {
        self.timed(phase, f)
    }
}

/// Runs `method` on `a` with `p` workers. With `p = 1` the result is bitwise
/// equal to the sequential algorithm, and in fact to every other `p`.
pub fn run_parallel(method: &Method, a: &DenseMatrix, p: usize, opts: FactorOptions) -> Result<(QRFactorization, TimingBreakdown)> {
    if matches!(method, Method::Householder) {
        return Err(Error::InvalidArgument("Householder QR has no row-parallel schedule".into()));
    }
    check_workers(a.rows(), p)?;
    let backend = Parallel::new(p);
    let start = Instant::now();
    let f = cholqr::factor_with(&backend, method, a, opts)?;
    let mut timing = backend.take_timing();
    timing.total = start.elapsed();
    Ok((f, timing))
}
