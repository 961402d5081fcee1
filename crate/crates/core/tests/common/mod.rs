#![allow(dead_code)]

use rcholqr::kernels;
use rcholqr::matgen::{self, MatrixSpec};
use rcholqr::DenseMatrix;

pub fn matrix(m: usize, n: usize, kappa: f64, seed: u64) -> DenseMatrix {
    matgen::synthesize(&MatrixSpec::new(m, n, kappa, seed).unwrap()).unwrap()
}

/// Householder `Q` used as the exact orthogonal factor.
pub fn oracle_q(a: &DenseMatrix) -> DenseMatrix {
    kernels::householder_qr(a).unwrap().0
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}
