mod common;

use std::time::Duration;

use common::matrix;
use rcholqr::apps::{ls_solve, normal_equations_solve, rsvd_power, Orthogonalizer, SparseMatrixCSR};
use rcholqr::{kernels, rng, DenseMatrix, SketchConfig};

/// Random sparse matrix with column `j` scaled by `1/(j+1)`, so the spectrum
/// decays and the top singular values are separated.
fn decaying_sparse(m: usize, n: usize, density: f64, seed: u64) -> SparseMatrixCSR {
    let b = SparseMatrixCSR::random(m, n, density, seed).unwrap();
    let mut t = Vec::with_capacity(b.nnz());
    for i in 0..m {
        let (c, v) = b.row(i);
        t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x / (1.0 + j as f64))));
    }
    SparseMatrixCSR::from_triplets(m, n, t).unwrap()
}

#[test]
fn rsvd_matches_dense_svd_and_rqr_orthogonalizes_faster() {
    let a = decaying_sparse(2000, 500, 0.01, 1);
    let oracle = kernels::svd_values(&kernels::qr_rless(&a.to_dense()).unwrap().to_dense()).unwrap();
    let qr = rsvd_power(&a, 20, 3, Orthogonalizer::Householder, 1).unwrap();
    let rqr = rsvd_power(&a, 20, 3, Orthogonalizer::RqrCholeskyQr, 1).unwrap();
    for (i, (s, o)) in rqr.sigma.iter().zip(&oracle).take(5).enumerate() {
        assert!((s - o).abs() <= 1e-3 * o, "sigma {i}");
    }
    for (x, y) in qr.sigma.iter().zip(&rqr.sigma) {
        assert!((x - y).abs() <= 1e-6 * x);
    }

    let best = |orth| {
        (0..5).map(|_| rsvd_power(&a, 20, 3, orth, 1).unwrap().total_orth_time()).min().unwrap_or(Duration::MAX)
    };
    let (t_qr, t_rqr) = (best(Orthogonalizer::Householder), best(Orthogonalizer::RqrCholeskyQr));
    assert!(t_rqr < t_qr, "rqr {t_rqr:?} vs qr {t_qr:?}");
}

// Without power rounds the result is the projection Y Y^T A onto the range
// of A X.
#[test]
fn zero_power_rounds_project_onto_range_of_ax() {
    let a = decaying_sparse(300, 80, 0.05, 2);
    let (k, seed) = (6, 5);
    let r = rsvd_power(&a, k, 0, Orthogonalizer::Householder, seed).unwrap();
    assert_eq!(r.per_iteration_orth_time.len(), 1);

    let mut x = DenseMatrix::zeros(80, k);
    rng::fill_standard_normal(&mut rng::stream(seed, rng::streams::RSVD), x.as_mut_slice());
    let y = kernels::householder_qr(&a.mul_dense(&x).unwrap()).unwrap().0;
    let ad = a.to_dense();
    let proj = y.matmul(&y.transpose().matmul(&ad).unwrap()).unwrap();
    let us = DenseMatrix::from_fn(300, k, |i, j| r.u.get(i, j) * r.sigma[j]);
    let rec = us.matmul(&r.v.transpose()).unwrap();
    assert!(rec.sub(&proj).unwrap().frobenius_norm() <= 1e-12 * ad.frobenius_norm());
}

#[test]
fn orthogonalizers_agree_on_sparse_inputs() {
    for seed in 0..3 {
        let a = SparseMatrixCSR::random(3000, 400, 0.005, seed).unwrap();
        let base = rsvd_power(&a, 10, 2, Orthogonalizer::Householder, seed).unwrap().sigma;
        for orth in [Orthogonalizer::RqrCholeskyQr, Orthogonalizer::CholeskyQr2] {
            let s = rsvd_power(&a, 10, 2, orth, seed).unwrap().sigma;
            for (x, y) in base.iter().zip(&s) {
                assert!((x - y).abs() <= 1e-6 * x, "{orth:?} seed {seed}");
            }
        }
    }
}

fn rel_err(x: &[f64], want: &[f64]) -> f64 {
    let d: f64 = x.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum();
    (d / want.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

#[test]
fn planted_least_squares_solution() {
    let a = matrix(10_000, 50, 1e6, 3);
    let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).cos()).collect();
    let b = a.matvec(&xs).unwrap();
    let e = rel_err(&ls_solve(&a, &b, &SketchConfig::default()).unwrap(), &xs);
    let en = rel_err(&normal_equations_solve(&a, &b).unwrap(), &xs);
    assert!(e <= 1e-8, "{e:e}");
    assert!(en >= 100.0 * e, "normal equations {en:e} vs {e:e}");
}

#[test]
fn least_squares_residual_is_orthogonal_to_the_range() {
    for (kappa, seed) in [(1e2, 1), (1e5, 2), (1e8, 3)] {
        let a = matrix(4000, 30, kappa, seed);
        let mut r = rng::seeded(seed);
        let mut b = vec![0.0; 4000];
        rng::fill_standard_normal(&mut r, &mut b);
        let x = ls_solve(&a, &b, &SketchConfig::default()).unwrap();
        let ax = a.matvec(&x).unwrap();
        let resid: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let g = a.tr_matvec(&resid).unwrap();
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(gn <= 1e-8 * a.frobenius_norm() * bn, "kappa {kappa:e}: {gn:e}");
    }
}
