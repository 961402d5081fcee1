//! Compressed sparse row matrices and Matrix Market coordinate files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::par;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCSR {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSR {
    /// Checks the CSR invariants: `row_ptr` nondecreasing from 0 to `nnz`,
    /// column indices in bounds and strictly increasing within a row.
    pub fn new(rows: usize, cols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if row_ptr.len() != rows + 1 || row_ptr[0] != 0 {
            return bad(format!("row_ptr must have {} entries starting at 0", rows + 1));
        }
        if row_ptr[rows] != col_idx.len() || col_idx.len() != values.len() {
            return bad("row_ptr end, col_idx and values disagree on nnz".into());
        }
        for i in 0..rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return bad(format!("row_ptr decreases at row {i}"));
            }
            let cols_i = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols_i.iter().any(|&j| j >= cols) {
                return bad(format!("column index out of bounds in row {i}"));
            }
            if cols_i.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns of row {i} are not strictly increasing"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SparseMatrixCSR { rows, cols, row_ptr, col_idx, values })
    }

    /// Builds from `(row, col, value)` triplets in any order; duplicates are
    /// summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::InvalidArgument(format!("entry ({i}, {j}) outside {rows}x{cols}")));
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::new(rows, cols, row_ptr, col_idx, values)
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.rows(), a.cols(), t).expect("dense entries are in bounds")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d.set(i, j, x);
            }
        }
        d
    }

    pub fn transpose(&self) -> SparseMatrixCSR {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                col_idx[next[j]] = i;
                values[next[j]] = x;
                next[j] += 1;
            }
        }
        SparseMatrixCSR { rows: self.cols, cols: self.rows, row_ptr, col_idx, values }
    }

    /// `A X` for a dense `X`, rows computed in parallel.
    pub fn mul_dense(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} sparse times {}x{} dense",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        let k = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, k);
        const CHUNK: usize = 512;
        let mut chunks: Vec<&mut [f64]> = out.as_mut_slice().chunks_mut(CHUNK * k.max(1)).collect();
        par::for_each_mut(&mut chunks, |c, dst| {
            for (r, drow) in dst.chunks_exact_mut(k).enumerate() {
                let (cols, vals) = self.row(c * CHUNK + r);
                for (&j, &v) in cols.iter().zip(vals) {
                    for (d, &y) in drow.iter_mut().zip(x.row(j)) {
                        *d += v * y;
                    }
                }
            }
        });
        Ok(out)
    }

    /// Random matrix with about `density * rows * cols` standard normal
    /// entries at uniformly drawn positions.
    pub fn random(rows: usize, cols: usize, density: f64, seed: u64) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::InvalidArgument(format!("density must lie in (0, 1], got {density}")));
        }
        let target = ((rows as f64) * (cols as f64) * density).round().max(1.0) as usize;
        let mut r = rng::stream(seed, rng::streams::PLANTED);
        let triplets = (0..target)
            .map(|_| {
                let i = r.random_range(0..rows);
                let j = r.random_range(0..cols);
                (i, j, rng::standard_normal(&mut r))
            })
            .collect();
        Self::from_triplets(rows, cols, triplets)
    }
}

/// Reads a Matrix Market `coordinate` file with `real`, `integer` or
/// `pattern` entries and `general`, `symmetric` or `skew-symmetric`
/// symmetry. Indices in the file are 1-based.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrixCSR> {
    let mut lines = reader.lines().enumerate();
    let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };

    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(hline, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(hline, "only the coordinate format is supported"));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "double" | "integer" => false,
        "pattern" => true,
        _ => return Err(parse_err(hline, "unsupported field (complex?)")),
    };
    let sign = match tokens[4].as_str() {
        "general" => None,
        "symmetric" => Some(1.0),
        "skew-symmetric" => Some(-1.0),
        _ => return Err(parse_err(hline, "unsupported symmetry")),
    };

    let mut size = None;
    let mut triplets = Vec::new();
    let mut expected = 0;
    for (ln, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let Some((rows, cols)) = size else {
            if fields.len() != 3 {
                return Err(parse_err(ln, "size line needs 'rows cols nnz'"));
            }
            let nums: Vec<usize> = fields
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(ln, "bad size line"))?;
            size = Some((nums[0], nums[1]));
            expected = nums[2];
            triplets.reserve(expected);
            continue;
        };
        let need = if pattern { 2 } else { 3 };
        if fields.len() < need {
            return Err(parse_err(ln, "entry line too short"));
        }
        let i: usize = fields[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
        let j: usize = fields[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(ln, "index out of range (indices are 1-based)"));
        }
        let v: f64 = if pattern { 1.0 } else { fields[2].parse().map_err(|_| parse_err(ln, "bad value"))? };
        triplets.push((i - 1, j - 1, v));
        if let Some(s) = sign {
            if i != j {
                triplets.push((j - 1, i - 1, s * v));
            }
        }
    }
    let (rows, cols) = size.ok_or_else(|| parse_err(hline, "missing size line"))?;
    let stored = if sign.is_some() { triplets.iter().filter(|t| t.0 >= t.1).count() } else { triplets.len() };
    if stored != expected {
        return Err(Error::Parse { line: 0, msg: format!("header promises {expected} entries, found {stored}") });
    }
    SparseMatrixCSR::from_triplets(rows, cols, triplets)
}

/// Writes `a` as `coordinate real general` with 1-based indices.
pub fn write_matrix_market<W: Write>(mut w: W, a: &SparseMatrixCSR) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.rows, a.cols, a.nnz())?;
    for i in 0..a.rows {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, x)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrixCSR> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

pub fn save_matrix_market(path: impl AsRef<Path>, a: &SparseMatrixCSR) -> Result<()> {
    write_matrix_market(BufWriter::new(File::create(path)?), a)
}
