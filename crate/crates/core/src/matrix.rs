use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The `rows x cols` matrix with ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.data[i * cols + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: expected {cols} columns, got {}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Errors with [`Error::NonFinite`] if any entry is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                t.data[j * self.rows + i] = v;
            }
        }
        t
    }

    /// `self * other`, accumulated row by row.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self^T * y`.
    pub fn tr_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "transpose of {}x{} times vector of length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} minus {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// New matrix made of the given rows (repetitions allowed).
    pub fn select_rows(&self, indices: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix { rows: indices.len(), cols: self.cols, data }
    }

    /// Rows `[start, end)` as a new matrix.
    pub fn row_range(&self, start: usize, end: usize) -> DenseMatrix {
        DenseMatrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[DenseMatrix]) -> Result<DenseMatrix> {
        let cols = parts.first().map_or(0, |p| p.cols);
        let mut data = Vec::with_capacity(parts.iter().map(|p| p.data.len()).sum());
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::DimensionMismatch(format!("stacking {} and {} columns", cols, p.cols)));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(DenseMatrix { rows, cols, data })
    }
}

/// Square upper-triangular matrix stored densely with an exactly zero strict
/// lower part.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    order: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn identity(order: usize) -> Self {
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            data[i * order + i] = 1.0;
        }
        Self { order, data }
    }

    /// Takes the upper triangle of a square matrix; the strict lower part is
    /// discarded.
    pub fn from_upper(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!(
                "triangular factor must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let mut data = m.as_slice().to_vec();
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = 0.0;
            }
        }
        Ok(Self { order: n, data })
    }

    /// Like [`from_upper`](Self::from_upper) but rejects a nonzero strict
    /// lower part.
    pub fn try_from_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        for i in 0..n {
            for j in 0..i.min(m.cols()) {
                if m.get(i, j) != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) below the diagonal is nonzero"
                    )));
                }
            }
        }
        Self::from_upper(m)
    }

    pub(crate) fn from_raw(order: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), order * order);
        Self { order, data }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn is_invertible(&self) -> bool {
        (0..self.order).all(|i| self.get(i, i) != 0.0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.order, self.order, self.data.clone()).expect("square storage")
    }

    /// `self * other`; the product of upper-triangular matrices is upper
    /// triangular.
    pub fn mul(&self, other: &UpperTriangular) -> Result<UpperTriangular> {
        if self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "triangular orders {} and {}",
                self.order, other.order
            )));
        }
        let n = self.order;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in i..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in k..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(UpperTriangular { order: n, data })
    }

    pub fn scaled(&self, c: f64) -> UpperTriangular {
        UpperTriangular { order: self.order, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// Flips the sign of every row with a negative diagonal entry and
    /// returns the applied signs (`+1`/`-1` per row).
    pub fn normalize_signs(&mut self) -> Vec<f64> {
        let n = self.order;
        let mut signs = vec![1.0; n];
        for (i, s) in signs.iter_mut().enumerate() {
            if self.data[i * n + i] < 0.0 {
                *s = -1.0;
                for v in &mut self.data[i * n..(i + 1) * n] {
                    *v = -*v;
                }
            }
        }
        signs
    }

    /// Smallest over largest absolute diagonal entry.
    pub fn diagonal_ratio(&self) -> f64 {
        let d = self.diagonal();
        let max = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let min = d.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    /// Solves `self * x = y` by back substitution.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.order;
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs of length {} for order {n}", y.len())));
        }
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let d = self.get(i, i);
            if d == 0.0 {
                return Err(Error::SingularTriangular { index: i });
            }
            let mut s = x[i];
            for (r, v) in self.row(i)[i + 1..].iter().zip(&x[i + 1..]) {
                s -= r * v;
            }
            x[i] = s / d;
        }
        Ok(x)
    }

    /// Solves `self^T * x = y` by forward substitution.
    pub fn solve_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.order;
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs of length {} for order {n}", y.len())));
        }
        let mut x = y.to_vec();
        for i in 0..n {
            let d = self.get(i, i);
            if d == 0.0 {
                return Err(Error::SingularTriangular { index: i });
            }
            x[i] /= d;
            let xi = x[i];
            for (v, r) in x[i + 1..].iter_mut().zip(&self.row(i)[i + 1..]) {
                *v -= r * xi;
            }
        }
        Ok(x)
    }
}

pub(crate) fn frobenius(v: &[f64]) -> f64 {
    let s: f64 = v.iter().map(|x| x * x).sum();
    if s.is_finite() && s > f64::MIN_POSITIVE * 1e10 {
        return s.sqrt();
    }
    // Overflow or underflow in the plain sum: redo it scaled by the largest entry.
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}
