//! Sequential dense kernels every algorithm is built from.
//!
//! All routines are pure and reentrant. Loops are written row-major so that
//! the innermost loop runs over contiguous memory.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, UpperTriangular};

/// Maximum number of one-sided Jacobi sweeps before [`Error::NoConvergence`].
pub const SVD_MAX_SWEEPS: usize = 100;

/// Rows per leaf of the Grammian summation tree.
pub const GRAM_CHUNK_ROWS: usize = 256;

/// Grammian `A^T A`.
///
/// Rows are grouped into fixed chunks of [`GRAM_CHUNK_ROWS`]; inside a chunk
/// each entry is accumulated left to right in plain `f64`, and chunk results
/// are added along a fixed pairwise tree over chunk indices. The tree does
/// not depend on how rows are later split between workers, so a row-blocked
/// computation reproduces this result bitwise. Only the upper triangle is
/// computed; the lower triangle is a bitwise mirror.
pub fn gram(a: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "Grammian needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite()?;
    let n = a.cols();
    let tree = GramTree::new(a.rows(), n);
    let mut g = tree.subtree(a.as_slice(), tree.root());
    mirror_upper(&mut g, n);
    Ok(DenseMatrix::from_vec(n, n, g).expect("n x n storage"))
}

/// Node of the Grammian summation tree: `level` 0 is a single chunk, a node
/// at `level` h and `index` j covers chunks `[j 2^h, (j+1) 2^h)` clipped to
/// the chunk count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct GramNode {
    pub level: u32,
    pub index: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GramTree {
    rows: usize,
    n: usize,
    chunks: usize,
    height: u32,
}

impl GramTree {
    pub fn new(rows: usize, n: usize) -> Self {
        let chunks = rows.div_ceil(GRAM_CHUNK_ROWS).max(1);
        let height = chunks.next_power_of_two().trailing_zeros();
        GramTree { rows, n, chunks, height }
    }

    pub fn root(&self) -> GramNode {
        GramNode { level: self.height, index: 0 }
    }

    pub fn chunk_of_row(&self, row: usize) -> usize {
        row.div_ceil(GRAM_CHUNK_ROWS)
    }

    /// First chunk of the node and one past its last chunk.
    fn span(&self, node: GramNode) -> (usize, usize) {
        let lo = node.index << node.level;
        (lo, ((node.index + 1) << node.level).min(self.chunks))
    }

    /// Rows `[lo, hi)` covered by chunks `[c0, c1)`.
    pub fn row_span(&self, c0: usize, c1: usize) -> (usize, usize) {
        ((c0 * GRAM_CHUNK_ROWS).min(self.rows), (c1 * GRAM_CHUNK_ROWS).min(self.rows))
    }

    /// Maximal tree nodes exactly covering chunks `[c0, c1)`.
    pub fn cover(&self, c0: usize, c1: usize) -> Vec<GramNode> {
        let mut out = Vec::new();
        let mut k = c0;
        while k < c1 {
            let mut level = 0;
            while level < self.height {
                let next = level + 1;
                let aligned = k.is_multiple_of(1 << next);
                let end = (k + (1 << next)).min(self.chunks);
                if !aligned || end > c1 {
                    break;
                }
                level = next;
            }
            let node = GramNode { level, index: k >> level };
            out.push(node);
            k = self.span(node).1;
        }
        out
    }

    /// Upper triangle of the node's Grammian (lower part left zero).
    /// `data` holds all rows of the matrix.
    pub fn subtree(&self, data: &[f64], node: GramNode) -> Vec<f64> {
        let n = self.n;
        if node.level == 0 {
            let (lo, hi) = self.row_span(node.index, node.index + 1);
            let mut g = vec![0.0; n * n];
            gram_accumulate(&data[lo * n..hi * n], n, &mut g);
            return g;
        }
        let left = GramNode { level: node.level - 1, index: 2 * node.index };
        let right = GramNode { level: node.level - 1, index: 2 * node.index + 1 };
        let mut g = self.subtree(data, left);
        if self.span(right).0 < self.chunks {
            add_upper(&mut g, &self.subtree(data, right), n);
        }
        g
    }

    /// Completes the tree from precomputed node values. Every node not in
    /// `known` is rebuilt from its children, exactly as [`Self::subtree`]
    /// would, so the result does not depend on which nodes were supplied.
    pub fn combine(&self, known: &mut Vec<(GramNode, Vec<f64>)>, node: GramNode) -> Vec<f64> {
        if let Some(pos) = known.iter().position(|(k, _)| *k == node) {
            return known.swap_remove(pos).1;
        }
        assert!(node.level > 0, "Grammian leaf {node:?} was never computed");
        let left = GramNode { level: node.level - 1, index: 2 * node.index };
        let right = GramNode { level: node.level - 1, index: 2 * node.index + 1 };
        let mut g = self.combine(known, left);
        if self.span(right).0 < self.chunks {
            add_upper(&mut g, &self.combine(known, right), self.n);
        }
        g
    }
}

fn add_upper(g: &mut [f64], other: &[f64], n: usize) {
    for p in 0..n {
        for (a, &b) in g[p * n + p..(p + 1) * n].iter_mut().zip(&other[p * n + p..(p + 1) * n]) {
            *a += b;
        }
    }
}

/// Adds `B^T B` to the upper triangle of `g` for the row-major rows in
/// `rows`. Four rows are streamed per pass over `g`, but every entry still
/// receives its row contributions one at a time in row order.
pub(crate) fn gram_accumulate(rows: &[f64], n: usize, g: &mut [f64]) {
    if n == 0 {
        return;
    }
    let mut chunks = rows.chunks_exact(4 * n);
    for block in &mut chunks {
        let (r0, rest) = block.split_at(n);
        let (r1, rest) = rest.split_at(n);
        let (r2, r3) = rest.split_at(n);
        for p in 0..n {
            let (a0, a1, a2, a3) = (r0[p], r1[p], r2[p], r3[p]);
            let grow = &mut g[p * n + p..(p + 1) * n];
            let it = grow
                .iter_mut()
                .zip(&r0[p..])
                .zip(&r1[p..])
                .zip(&r2[p..])
                .zip(&r3[p..]);
            for ((((gv, &b0), &b1), &b2), &b3) in it {
                let mut s = *gv;
                s += a0 * b0;
                s += a1 * b1;
                s += a2 * b2;
                s += a3 * b3;
                *gv = s;
            }
        }
    }
    for r in chunks.remainder().chunks_exact(n) {
        for p in 0..n {
            let a = r[p];
            for (gv, &b) in g[p * n + p..(p + 1) * n].iter_mut().zip(&r[p..]) {
                *gv += a * b;
            }
        }
    }
}

pub(crate) fn mirror_upper(g: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
}

/// Upper Cholesky factor `R` with `R^T R = G` and positive diagonal.
///
/// Only the upper triangle of `g` is read. A pivot that is not strictly
/// positive (or NaN) yields [`Error::CholeskyBreakdown`].
pub fn cholesky_upper(g: &DenseMatrix) -> Result<UpperTriangular> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::DimensionMismatch(format!("Cholesky of a {}x{} matrix", n, g.cols())));
    }
    g.ensure_finite()?;
    let mut r = vec![0.0; n * n];
    // Column j of R is read repeatedly; keep a contiguous copy of it.
    let mut col = vec![0.0; n];
    for j in 0..n {
        for (k, c) in col.iter_mut().enumerate().take(j) {
            *c = r[k * n + j];
        }
        let mut d = g.get(j, j);
        for &c in &col[..j] {
            d -= c * c;
        }
        if !(d > 0.0) {
            return Err(Error::CholeskyBreakdown { pivot_index: j });
        }
        let rjj = d.sqrt();
        r[j * n + j] = rjj;
        for i in j + 1..n {
            let mut s = g.get(j, i);
            for (k, &c) in col[..j].iter().enumerate() {
                s -= c * r[k * n + i];
            }
            r[j * n + i] = s / rjj;
        }
    }
    Ok(UpperTriangular::from_raw(n, r))
}

/// `X = A R^-1`, solved row by row (`x_i R = a_i`) without forming `R^-1`.
pub fn right_trisolve(a: &DenseMatrix, r: &UpperTriangular) -> Result<DenseMatrix> {
    let mut x = a.clone();
    right_trisolve_in_place(&mut x, r)?;
    Ok(x)
}

/// In-place variant of [`right_trisolve`].
pub fn right_trisolve_in_place(x: &mut DenseMatrix, r: &UpperTriangular) -> Result<()> {
    check_trisolve(x.cols(), r)?;
    trisolve_rows(x.as_mut_slice(), r);
    Ok(())
}

pub(crate) fn check_trisolve(cols: usize, r: &UpperTriangular) -> Result<()> {
    if cols != r.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} columns against a triangular factor of order {}",
            cols,
            r.order()
        )));
    }
    if let Some(i) = (0..r.order()).find(|&i| r.get(i, i) == 0.0) {
        return Err(Error::SingularTriangular { index: i });
    }
    Ok(())
}

/// Solves `x R = row` in place for every row of the row-major `data`.
///
/// Each row sees exactly the same sequence of floating-point operations no
/// matter how rows are grouped, so results are independent of blocking and
/// of how rows are split between workers.
pub(crate) fn trisolve_rows(data: &mut [f64], r: &UpperTriangular) {
    let n = r.order();
    if n == 0 {
        return;
    }
    let rs = r.as_slice();
    let mut chunks = data.chunks_exact_mut(4 * n);
    for block in &mut chunks {
        let (x0, rest) = block.split_at_mut(n);
        let (x1, rest) = rest.split_at_mut(n);
        let (x2, x3) = rest.split_at_mut(n);
        for k in 0..n {
            let rrow = &rs[k * n..(k + 1) * n];
            let d = rrow[k];
            let c0 = x0[k] / d;
            let c1 = x1[k] / d;
            let c2 = x2[k] / d;
            let c3 = x3[k] / d;
            x0[k] = c0;
            x1[k] = c1;
            x2[k] = c2;
            x3[k] = c3;
            let it = x0[k + 1..]
                .iter_mut()
                .zip(x1[k + 1..].iter_mut())
                .zip(x2[k + 1..].iter_mut())
                .zip(x3[k + 1..].iter_mut())
                .zip(&rrow[k + 1..]);
            for ((((y0, y1), y2), y3), &rv) in it {
                *y0 -= c0 * rv;
                *y1 -= c1 * rv;
                *y2 -= c2 * rv;
                *y3 -= c3 * rv;
            }
        }
    }
    for x in chunks.into_remainder().chunks_exact_mut(n) {
        for k in 0..n {
            let rrow = &rs[k * n..(k + 1) * n];
            let c = x[k] / rrow[k];
            x[k] = c;
            for (y, &rv) in x[k + 1..].iter_mut().zip(&rrow[k + 1..]) {
                *y -= c * rv;
            }
        }
    }
}

/// `A R` for an upper-triangular `R`.
pub fn mul_upper(a: &DenseMatrix, r: &UpperTriangular) -> Result<DenseMatrix> {
    if a.cols() != r.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} columns times triangular order {}",
            a.cols(),
            r.order()
        )));
    }
    let n = r.order();
    let mut out = DenseMatrix::zeros(a.rows(), n);
    for i in 0..a.rows() {
        let src = a.row(i);
        let dst = out.row_mut(i);
        for (k, &v) in src.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (d, &rv) in dst[k..].iter_mut().zip(&r.row(k)[k..]) {
                *d += v * rv;
            }
        }
    }
    Ok(out)
}

/// Householder factorization in place.
///
/// On return the upper triangle of the leading `n x n` block holds `R`
/// (unnormalized signs) and the entries below the diagonal hold the
/// Householder vectors with an implicit unit leading entry. Returns the
/// reflector coefficients `tau`.
///
/// The update of column `k` and the accumulation of the next reflector's
/// inputs share one pass over the trailing rows.
fn householder_in_place(w: &mut [f64], m: usize, n: usize) -> Vec<f64> {
    let kmax = n.min(m);
    let mut taus = vec![0.0; kmax];
    if kmax == 0 {
        return taus;
    }
    // tail_sq: sum of squares of column k below row k.
    // cross[j]: sum over rows i > k of w[i][k] * w[i][k+1+j].
    let mut tail_sq = 0.0;
    let mut cross = vec![0.0; n];
    for i in 1..m {
        let row = &w[i * n..(i + 1) * n];
        let a = row[0];
        tail_sq += a * a;
        for (c, &b) in cross[..n - 1].iter_mut().zip(&row[1..]) {
            *c += a * b;
        }
    }
    let mut s = vec![0.0; n];
    for k in 0..kmax {
        let width = n - k - 1;
        let x0 = w[k * n + k];
        let mut next_tail = 0.0;
        let mut next_cross = vec![0.0; n];
        if tail_sq == 0.0 {
            // Column already triangular below the diagonal: H = I.
            taus[k] = 0.0;
            if k + 1 < kmax {
                for i in k + 2..m {
                    let row = &w[i * n..(i + 1) * n];
                    let a = row[k + 1];
                    next_tail += a * a;
                    for (c, &b) in next_cross[..width - 1].iter_mut().zip(&row[k + 2..]) {
                        *c += a * b;
                    }
                }
            }
        } else {
            let alpha = (x0 * x0 + tail_sq).sqrt();
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            let scale = 1.0 / (x0 - beta);
            let tau = (beta - x0) / beta;
            taus[k] = tau;
            // s = w[k][k+1..] + v_tail^T W_tail, with v_tail = scale * w[i][k].
            for (j, sj) in s[..width].iter_mut().enumerate() {
                *sj = w[k * n + k + 1 + j] + scale * cross[j];
            }
            w[k * n + k] = beta;
            for (j, sj) in s[..width].iter().enumerate() {
                w[k * n + k + 1 + j] -= tau * sj;
            }
            for i in k + 1..m {
                let row = &mut w[i * n..(i + 1) * n];
                let v = row[k] * scale;
                row[k] = v;
                let f = tau * v;
                for (x, &sj) in row[k + 1..].iter_mut().zip(&s[..width]) {
                    *x -= f * sj;
                }
                if i > k + 1 && k + 1 < kmax {
                    let a = row[k + 1];
                    next_tail += a * a;
                    for (c, &b) in next_cross[..width - 1].iter_mut().zip(&row[k + 2..]) {
                        *c += a * b;
                    }
                }
            }
        }
        tail_sq = next_tail;
        cross = next_cross;
    }
    taus
}

fn extract_r(w: &[f64], n: usize) -> UpperTriangular {
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        r[i * n + i..(i + 1) * n].copy_from_slice(&w[i * n + i..(i + 1) * n]);
    }
    UpperTriangular::from_raw(n, r)
}

/// `R` factor of a Householder QR of `A1` (`l >= n`), sign-normalized to a
/// nonnegative diagonal. `Q` is never formed.
pub fn qr_rless(a1: &DenseMatrix) -> Result<UpperTriangular> {
    let (l, n) = a1.shape();
    if l < n {
        return Err(Error::DimensionMismatch(format!("Q-less QR needs rows >= cols, got {l}x{n}")));
    }
    a1.ensure_finite()?;
    let mut w = a1.as_slice().to_vec();
    householder_in_place(&mut w, l, n);
    let mut r = extract_r(&w, n);
    r.normalize_signs();
    Ok(r)
}

/// Thin Householder QR `A = Q R` with `Q` of size `m x n` and `R` with a
/// nonnegative diagonal.
pub fn householder_qr(a: &DenseMatrix) -> Result<(DenseMatrix, UpperTriangular)> {
    a.ensure_finite()?;
    householder_qr_owned(a.clone())
}

/// [`householder_qr`] consuming its input to save one copy.
pub fn householder_qr_owned(a: DenseMatrix) -> Result<(DenseMatrix, UpperTriangular)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::DimensionMismatch(format!("thin QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.into_vec();
    let taus = householder_in_place(&mut w, m, n);
    let mut r = extract_r(&w, n);

    // Q = H_0 ... H_{n-1} [I; 0], accumulated backwards. When H_k is applied
    // only columns k.. of rows k.. are nonzero.
    let mut q = DenseMatrix::eye(m, n);
    let qs = q.as_mut_slice();
    let mut s = vec![0.0; n];
    for k in (0..n).rev() {
        let tau = taus[k];
        if tau == 0.0 {
            continue;
        }
        let width = n - k;
        s[..width].copy_from_slice(&qs[k * n + k..(k + 1) * n]);
        for i in k + 1..m {
            let v = w[i * n + k];
            if v == 0.0 {
                continue;
            }
            for (sj, &x) in s[..width].iter_mut().zip(&qs[i * n + k..(i + 1) * n]) {
                *sj += v * x;
            }
        }
        for (x, &sj) in qs[k * n + k..(k + 1) * n].iter_mut().zip(&s[..width]) {
            *x -= tau * sj;
        }
        for i in k + 1..m {
            let f = tau * w[i * n + k];
            if f == 0.0 {
                continue;
            }
            for (x, &sj) in qs[i * n + k..(i + 1) * n].iter_mut().zip(&s[..width]) {
                *x -= f * sj;
            }
        }
    }
    let signs = r.normalize_signs();
    if signs.iter().any(|&s| s < 0.0) {
        for i in 0..m {
            for (x, &sg) in q.row_mut(i).iter_mut().zip(&signs) {
                *x *= sg;
            }
        }
    }
    Ok((q, r))
}

/// Row-pivoted LU of an `l x n` matrix (`l >= n`): `A1[perm[i], :]` is row
/// `i` of `L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    pub perm: Vec<usize>,
    /// `l x n` unit lower trapezoidal factor.
    pub lower: DenseMatrix,
    pub upper: UpperTriangular,
}

/// Gaussian elimination with partial (row) pivoting.
pub fn lu_partial_pivot(a1: &DenseMatrix) -> Result<LuFactors> {
    let (l, n) = a1.shape();
    if l < n {
        return Err(Error::DimensionMismatch(format!("LU needs rows >= cols, got {l}x{n}")));
    }
    a1.ensure_finite()?;
    let mut w = a1.as_slice().to_vec();
    let mut perm: Vec<usize> = (0..l).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = w[k * n + k].abs();
        for i in k + 1..l {
            let v = w[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularTriangular { index: k });
        }
        if p != k {
            for j in 0..n {
                w.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let (head, tail) = w.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        let d = pivot_row[k];
        for row in tail.chunks_exact_mut(n) {
            let f = row[k] / d;
            row[k] = f;
            if f == 0.0 {
                continue;
            }
            for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= f * u;
            }
        }
    }
    let mut lower = DenseMatrix::zeros(l, n);
    for i in 0..l {
        for j in 0..n.min(i + 1) {
            lower.set(i, j, if i == j { 1.0 } else { w[i * n + j] });
        }
    }
    let upper = extract_r(&w, n);
    Ok(LuFactors { perm, lower, upper })
}

/// Leading `n x n` upper factor of a row-pivoted LU of `A1`.
pub fn lu_upper(a1: &DenseMatrix) -> Result<UpperTriangular> {
    lu_partial_pivot(a1).map(|f| f.upper)
}

/// Thin singular value decomposition `M = U diag(sigma) V^T` with
/// `k = min(m, n)` singular triplets in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// Singular values of `M` in descending order (one-sided Jacobi).
///
/// Intended for small matrices: `n x n` triangular factors and sketches.
pub fn svd_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.ensure_finite()?;
    let (vecs, _) = jacobi(m, false)?;
    let mut sigma: Vec<f64> = vecs.iter().map(|c| norm2(c)).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// Thin SVD with singular vectors (one-sided Jacobi).
pub fn svd_thin(m: &DenseMatrix) -> Result<ThinSvd> {
    m.ensure_finite()?;
    let (rows, cols) = m.shape();
    let (vecs, rot) = jacobi(m, true)?;
    let rot = rot.expect("rotations requested");
    let k = vecs.len();
    let sigma_raw: Vec<f64> = vecs.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma_raw[b].total_cmp(&sigma_raw[a]));

    // The rotated vectors are the columns of `M V` (tall case) or of
    // `M^T U` (wide case).
    let long_len = rows.max(cols);
    let mut left = DenseMatrix::zeros(long_len, k);
    let mut right = DenseMatrix::zeros(k, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma_raw[src];
        sigma.push(s);
        if s > 0.0 {
            for (i, &x) in vecs[src].iter().enumerate() {
                left.set(i, dst, x / s);
            }
        }
        for (i, &x) in rot[src].iter().enumerate() {
            right.set(i, dst, x);
        }
    }
    if rows >= cols {
        Ok(ThinSvd { u: left, sigma, v: right })
    } else {
        Ok(ThinSvd { u: right, sigma, v: left })
    }
}

fn norm2(v: &[f64]) -> f64 {
    crate::matrix::frobenius(v)
}

/// One-sided Jacobi on the columns of `M` (or of `M^T` when `M` is wide).
/// Returns the rotated vectors and, optionally, the accumulated rotation as
/// rows (`rot[p]` is column `p` of the rotation matrix).
#[allow(clippy::type_complexity)]
fn jacobi(m: &DenseMatrix, want_rotation: bool) -> Result<(Vec<Vec<f64>>, Option<Vec<Vec<f64>>>)> {
    let (rows, cols) = m.shape();
    let mut vecs: Vec<Vec<f64>> = if rows >= cols {
        (0..cols).map(|j| m.column(j)).collect()
    } else {
        (0..rows).map(|i| m.row(i).to_vec()).collect()
    };
    let k = vecs.len();
    let mut rot: Option<Vec<Vec<f64>>> = want_rotation.then(|| {
        (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                e
            })
            .collect()
    });
    // A dot product of length `len` carries rounding of about sqrt(len) u;
    // a tighter threshold can keep rotating on noise forever.
    let len = vecs.first().map_or(1, Vec::len);
    let tol = (len as f64).sqrt().max(1.0) * f64::EPSILON;
    let mut norms: Vec<f64> = vecs.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
    for _sweep in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: f64 = vecs[p].iter().zip(&vecs[q]).map(|(a, b)| a * b).sum();
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (vp, vq) = pair_mut(&mut vecs, p, q);
                rotate(vp, vq, c, s);
                norms[p] = vp.iter().map(|x| x * x).sum();
                norms[q] = vq.iter().map(|x| x * x).sum();
                if let Some(rot) = rot.as_mut() {
                    let (rp, rq) = pair_mut(rot, p, q);
                    rotate(rp, rq, c, s);
                }
            }
        }
        if !rotated {
            return Ok((vecs, rot));
        }
    }
    Err(Error::NoConvergence { sweeps: SVD_MAX_SWEEPS })
}

fn pair_mut(v: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (a, b) = v.split_at_mut(q);
    (&mut a[p], &mut b[0])
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (u, v) = (*a, *b);
        *a = c * u - s * v;
        *b = s * u + c * v;
    }
}
