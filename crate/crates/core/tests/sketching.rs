mod common;

use common::{matrix, oracle_q};
use rcholqr::diagnostics::theta;
use rcholqr::matgen;
use rcholqr::rng;
use rcholqr::sketch::{self, Provenance, Sketch};
use rcholqr::{kernels, DenseMatrix, FactorOptions, Method, SketchConfig, SketchSize, SketchStrategy};

fn rows_of(sk: &Sketch) -> &[usize] {
    match &sk.provenance {
        Provenance::Rows(idx) => idx,
        Provenance::Projection { .. } => panic!("row sketch expected"),
    }
}

#[test]
fn embedded_identity_is_maximally_coherent() {
    let a = matgen::embedded_identity(1000, 10, 1).unwrap();
    assert!(theta(&oracle_q(&a)) >= 0.99);
}

fn rqr_fails(a: &DenseMatrix, seed: u64) -> bool {
    let cfg = SketchConfig::uniform(SketchSize::Rate(2.0), seed).with_retries(0);
    match rcholqr::cholqr::factor(&Method::Rqr(cfg), a, FactorOptions::with_diagnostics()) {
        Err(_) => true,
        Ok(f) => f.report.cond_x().unwrap() > 1e6,
    }
}

// With exact zeros below the identity, a uniform sketch of 2n rows must
// contain all n identity rows to be nonsingular, which happens with
// probability below (l/m)^n.
#[test]
fn uniform_sampling_fails_on_exact_embedded_identity() {
    let a = DenseMatrix::eye(1000, 10);
    let failures = (0..100u64).filter(|&s| rqr_fails(&a, s)).count();
    assert!(failures >= 50, "{failures}/100");
}

// With noise rows the sketch that misses the identity block entirely is
// still a fine preconditioner (X is then a rescaled Gaussian factor). What
// breaks it is a sketch that catches some identity rows but not all of them.
#[test]
fn noisy_embedded_identity_fails_exactly_on_partial_hits() {
    let (m, n) = (1000, 10);
    let a = matgen::embedded_identity(m, n, 2).unwrap();
    let mut failures = 0;
    for s in 0..100u64 {
        let cfg = SketchConfig::uniform(SketchSize::Rate(2.0), s);
        let sk = sketch::draw(&a, None, &cfg, &mut rng::stream(s, rng::streams::SKETCH)).unwrap();
        let mut hit: Vec<usize> = rows_of(&sk).iter().copied().filter(|&i| i < n).collect();
        hit.sort_unstable();
        hit.dedup();
        let partial = !hit.is_empty() && hit.len() < n;
        let failed = rqr_fails(&a, s);
        assert_eq!(failed, partial, "seed {s}");
        failures += failed as usize;
    }
    assert!(failures > 0);
}

#[test]
fn uniform_draws_are_reproducible() {
    let a = matrix(1000, 10, 10.0, 3);
    let cfg = SketchConfig::uniform(SketchSize::Rows(20), 9);
    let one = sketch::sample_rows_uniform(&a, &cfg, &mut rng::seeded(9)).unwrap();
    let two = sketch::sample_rows_uniform(&a, &cfg, &mut rng::seeded(9)).unwrap();
    assert_eq!(one, two);
    assert_eq!(rows_of(&one).len(), 20);
}

#[test]
fn uniform_indices_pass_chi_squared() {
    let m = 1000;
    let a = DenseMatrix::eye(m, 1);
    let cfg = SketchConfig::uniform(SketchSize::Rows(m), 0);
    let mut r = rng::seeded(11);
    let mut counts = vec![0usize; m];
    for _ in 0..50 {
        for &i in rows_of(&sketch::sample_rows_uniform(&a, &cfg, &mut r).unwrap()) {
            counts[i] += 1;
        }
    }
    let expect = 50_000.0 / m as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let dof = (m - 1) as f64;
    assert!((chi2 - dof).abs() <= 3.0 * (2.0 * dof).sqrt(), "chi2 = {chi2}");
}

#[test]
fn leverage_sampling_finds_the_identity_block() {
    let (m, n) = (1000, 10);
    let a = matgen::embedded_identity(m, n, 4).unwrap();
    let q = oracle_q(&a);
    let cfg = SketchConfig::new(SketchStrategy::Leverage, SketchSize::Rows(n), 0);
    let mut r = rng::seeded(4);
    let mut inside = 0;
    for _ in 0..100 {
        inside += rows_of(&sketch::sample_rows_leverage(&a, &q, &cfg, &mut r).unwrap()).iter().filter(|&&i| i < n).count();
    }
    assert!(inside as f64 / 1000.0 >= 0.99, "{inside}/1000");
}

#[test]
fn gaussian_sketch_is_unbiased_for_the_grammian() {
    let a = matrix(50, 5, 10.0, 5);
    let l = 10;
    let cfg = SketchConfig::gaussian(SketchSize::Rows(l), 0);
    let mut r = rng::seeded(5);
    let mut mean = DenseMatrix::zeros(5, 5);
    let trials = 2000;
    for _ in 0..trials {
        let g = kernels::gram(&sketch::sketch_gaussian(&a, &cfg, &mut r).unwrap().a1).unwrap();
        for (m, x) in mean.as_mut_slice().iter_mut().zip(g.as_slice()) {
            *m += x / trials as f64;
        }
    }
    let want = kernels::gram(&a).unwrap().scaled(l as f64);
    let err = mean.sub(&want).unwrap().frobenius_norm() / want.frobenius_norm();
    assert!(err <= 0.05, "{err}");
}

#[test]
fn every_sketch_reconstructs_from_provenance() {
    let a = matrix(500, 8, 1e4, 6);
    let q = oracle_q(&a);
    for strategy in [SketchStrategy::Uniform, SketchStrategy::Leverage, SketchStrategy::Gaussian] {
        for seed in 0..5 {
            let cfg = SketchConfig::new(strategy, SketchSize::Rate(2.0), seed);
            let sk = sketch::draw(&a, Some(&q), &cfg, &mut rng::seeded(seed)).unwrap();
            assert_eq!(sk.reconstruct(&a).unwrap(), sk.a1, "{strategy:?}");
            if let Provenance::Rows(idx) = &sk.provenance {
                assert!(idx.iter().all(|&i| i < 500));
            }
        }
    }
}

#[test]
fn sketches_of_full_rank_matrices_have_full_rank() {
    let a = matrix(2000, 20, 1e10, 7);
    let q = oracle_q(&a);
    for strategy in [SketchStrategy::Uniform, SketchStrategy::Leverage, SketchStrategy::Gaussian] {
        let good = (0..100u64)
            .filter(|&s| {
                let cfg = SketchConfig::new(strategy, SketchSize::Rate(2.0), s);
                let a1 = sketch::draw(&a, Some(&q), &cfg, &mut rng::seeded(s)).unwrap().a1;
                let floor = 1e-12 * a1.frobenius_norm();
                kernels::qr_rless(&a1).is_ok_and(|r| r.diagonal().iter().all(|d| d.abs() > floor))
            })
            .count();
        assert!(good >= 99, "{strategy:?}: {good}/100");
    }
}

// A benign R factor of a preconditioned matrix on which Jacobi once cycled
// because its stopping threshold sat below the rounding of the dot products.
#[test]
fn jacobi_converges_on_a_preconditioned_factor() {
    let a = matgen::SpectralFrame::new(10_000, 100, 108).unwrap().with_kappa(1e5).unwrap();
    let cfg = SketchConfig::uniform(SketchSize::Rate(1.2), 108).with_retries(0);
    let rough = rcholqr::cholqr::rough_factor(&rcholqr::cholqr::Sequential, &a, None, &kernels::qr_rless, &cfg).unwrap();
    let x = kernels::right_trisolve(&a, &rough.r).unwrap();
    let s = kernels::svd_values(&kernels::qr_rless(&x).unwrap().to_dense()).unwrap();
    let want = kernels::svd_values(&x).unwrap();
    for (u, v) in s.iter().zip(&want) {
        assert!((u - v).abs() <= 1e-12 * want[0], "{u} vs {v}");
    }
}
