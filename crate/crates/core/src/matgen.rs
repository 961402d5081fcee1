//! Seeded test matrices with a prescribed spectrum, plus a maximally
//! coherent adversarial case.
//!
//! `A = U diag(sigma) V^T` with `U` (m x n) and `V` (n x n) the orthogonal
//! factors of Householder QR applied to standard Gaussian matrices, and
//! `sigma_i = kappa^(-i/(n-1))`, so `||A||_2 = 1` and `cond(A) = kappa`.
//!
//! Matrices can be saved in the `.dmat` format: a 16-byte header (the magic
//! bytes `DMATv001`, then rows and cols as little-endian `u32`) followed by
//! the row-major little-endian `f64` payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels;
use crate::matrix::DenseMatrix;
use crate::par;
use crate::rng::{self, streams, SeededRng};

/// Scale of the Gaussian noise that fills the lower rows of
/// [`embedded_identity`].
pub const EMBEDDED_NOISE: f64 = 1e-8;

/// Magic bytes opening a `.dmat` file.
pub const DMAT_MAGIC: [u8; 8] = *b"DMATv001";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixSpec {
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn new(m: usize, n: usize, kappa: f64, seed: u64) -> Result<Self> {
        let spec = MatrixSpec { m, n, kappa, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::InvalidArgument(format!("need m >= n >= 1, got m={} n={}", self.m, self.n)));
        }
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be finite and >= 1, got {}", self.kappa)));
        }
        if self.n == 1 && self.kappa != 1.0 {
            return Err(Error::InvalidArgument("a single column always has condition number 1".into()));
        }
        Ok(())
    }
}

/// Geometric spectrum `1, kappa^(-1/(n-1)), ..., 1/kappa`.
pub fn singular_values(n: usize, kappa: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => 1.0,
            i if i == n - 1 => 1.0 / kappa,
            i => kappa.powf(-(i as f64) / last),
        })
        .collect()
}

/// Orthonormal `rows x cols` matrix: the thin Householder Q of a standard
/// Gaussian matrix, with the sign convention `diag(R) >= 0` (Haar
/// distributed).
pub fn random_orthogonal(rows: usize, cols: usize, rng: &mut SeededRng) -> Result<DenseMatrix> {
    if rows < cols {
        return Err(Error::DimensionMismatch(format!("orthogonal frame needs rows >= cols, got {rows}x{cols}")));
    }
    let mut g = DenseMatrix::zeros(rows, cols);
    rng::fill_standard_normal(rng, g.as_mut_slice());
    kernels::householder_qr_owned(g).map(|(q, _)| q)
}

/// The orthogonal factors of a synthetic matrix. The frame depends only on
/// `(m, n, seed)`, so one frame serves a whole sweep over `kappa`.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

impl SpectralFrame {
    pub fn new(m: usize, n: usize, seed: u64) -> Result<Self> {
        MatrixSpec::new(m, n, 1.0, seed)?;
        let u = random_orthogonal(m, n, &mut rng::stream(seed, streams::MATGEN_LEFT))?;
        let v = random_orthogonal(n, n, &mut rng::stream(seed, streams::MATGEN_RIGHT))?;
        Ok(SpectralFrame { u, v })
    }

    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.u.cols()
    }

    /// `U diag(sigma) V^T` for an arbitrary spectrum.
    pub fn with_spectrum(&self, sigma: &[f64]) -> Result<DenseMatrix> {
        let n = self.cols();
        if sigma.len() != n {
            return Err(Error::DimensionMismatch(format!("{} singular values for {} columns", sigma.len(), n)));
        }
        let w = DenseMatrix::from_fn(n, n, |i, j| sigma[i] * self.v.get(j, i));
        Ok(row_parallel_matmul(&self.u, &w))
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<DenseMatrix> {
        MatrixSpec::new(self.rows(), self.cols(), kappa, 0)?;
        self.with_spectrum(&singular_values(self.cols(), kappa))
    }
}

/// `A * W` for a small square `W`, rows computed independently.
fn row_parallel_matmul(a: &DenseMatrix, w: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (a.rows(), w.cols());
    let k = a.cols();
    let mut out = DenseMatrix::zeros(m, n);
    let chunk_rows = 1024;
    let mut chunks: Vec<&mut [f64]> = out.as_mut_slice().chunks_mut(chunk_rows * n.max(1)).collect();
    par::for_each_mut(&mut chunks, |c, dst| {
        let first = c * chunk_rows;
        for (r, drow) in dst.chunks_exact_mut(n).enumerate() {
            let arow = a.row(first + r);
            for (t, &x) in arow.iter().enumerate().take(k) {
                for (d, &y) in drow.iter_mut().zip(w.row(t)) {
                    *d += x * y;
                }
            }
        }
    });
    out
}

/// Synthetic matrix with `||A||_2 = 1` and `cond(A) = kappa`. Bitwise
/// deterministic in `spec`.
pub fn synthesize(spec: &MatrixSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    SpectralFrame::new(spec.m, spec.n, spec.seed)?.with_kappa(spec.kappa)
}

/// `[I_n; E]` where `E` holds `1e-8`-scaled Gaussian noise: full rank, but
/// nearly all leverage sits on the first `n` rows.
pub fn embedded_identity(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    MatrixSpec::new(m, n, 1.0, seed)?;
    let mut a = DenseMatrix::eye(m, n);
    let mut r = rng::stream(seed, streams::NOISE);
    let tail = &mut a.as_mut_slice()[n * n..];
    rng::fill_standard_normal(&mut r, tail);
    for x in tail.iter_mut() {
        *x *= EMBEDDED_NOISE;
    }
    Ok(a)
}

pub fn write_dmat<W: Write>(mut w: W, a: &DenseMatrix) -> Result<()> {
    let rows = u32::try_from(a.rows()).map_err(|_| Error::InvalidArgument("too many rows for .dmat".into()))?;
    let cols = u32::try_from(a.cols()).map_err(|_| Error::InvalidArgument("too many cols for .dmat".into()))?;
    w.write_all(&DMAT_MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for x in a.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dmat<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..8] != DMAT_MAGIC {
        return Err(Error::Parse { line: 0, msg: "not a .dmat file (bad magic)".into() });
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
    let mut data = vec![0.0; rows * cols];
    let mut buf = [0u8; 8];
    for x in data.iter_mut() {
        r.read_exact(&mut buf)?;
        *x = f64::from_le_bytes(buf);
    }
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn save_dmat(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    write_dmat(BufWriter::new(File::create(path)?), a)
}

pub fn load_dmat(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_dmat(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orth_err(q: &DenseMatrix) -> f64 {
        let n = q.cols();
        kernels::gram(q).unwrap().sub(&DenseMatrix::eye(n, n)).unwrap().frobenius_norm()
    }

    #[test]
    fn scalar_orthogonal_is_plus_minus_one() {
        let q = random_orthogonal(1, 1, &mut rng::seeded(3)).unwrap();
        assert_eq!(q.get(0, 0).abs(), 1.0);
    }

    #[test]
    fn random_orthogonal_is_orthonormal_and_seed_dependent() {
        let a = random_orthogonal(100, 10, &mut rng::seeded(1)).unwrap();
        let b = random_orthogonal(100, 10, &mut rng::seeded(2)).unwrap();
        assert!(orth_err(&a) <= 1e-13);
        assert!(a.sub(&b).unwrap().frobenius_norm() > 1e-3);
    }

    #[test]
    fn spectrum_is_geometric() {
        let s = singular_values(5, 1e4);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[4], 1e-4);
        for w in s.windows(2) {
            assert!((w[1] / w[0] - 0.1).abs() < 1e-14);
        }
        assert_eq!(singular_values(1, 1e3), vec![1.0]);
    }

    #[test]
    fn kappa_one_gives_orthogonal_matrix() {
        let a = synthesize(&MatrixSpec::new(200, 8, 1.0, 4).unwrap()).unwrap();
        assert!(orth_err(&a) <= 1e-12);
    }

    #[test]
    fn synthesize_is_deterministic() {
        let spec = MatrixSpec::new(300, 6, 1e3, 9).unwrap();
        assert_eq!(synthesize(&spec).unwrap(), synthesize(&spec).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(MatrixSpec::new(3, 4, 1.0, 0).is_err());
        assert!(MatrixSpec::new(4, 0, 1.0, 0).is_err());
        assert!(MatrixSpec::new(4, 2, 0.5, 0).is_err());
        assert!(MatrixSpec::new(4, 2, f64::NAN, 0).is_err());
        assert!(MatrixSpec::new(4, 1, 10.0, 0).is_err());
        assert!(MatrixSpec::new(4, 1, 1.0, 0).is_ok());
    }

    #[test]
    fn embedded_identity_square_is_identity() {
        assert_eq!(embedded_identity(4, 4, 1).unwrap(), DenseMatrix::eye(4, 4));
        let a = embedded_identity(50, 3, 1).unwrap();
        assert_eq!(a.row_range(0, 3), DenseMatrix::eye(3, 3));
        assert!(a.row_range(3, 50).max_abs() < 1e-6);
        assert!(a.row_range(3, 50).max_abs() > 0.0);
    }

    #[test]
    fn dmat_round_trip_and_bad_magic() {
        let a = synthesize(&MatrixSpec::new(7, 3, 10.0, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_dmat(&mut buf, &a).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 21);
        assert_eq!(&buf[..8], b"DMATv001");
        assert_eq!(read_dmat(buf.as_slice()).unwrap(), a);
        buf[0] = b'X';
        assert!(matches!(read_dmat(buf.as_slice()), Err(Error::Parse { .. })));
        assert!(matches!(read_dmat(&buf[..10]), Err(Error::Io(_))));
    }
}
