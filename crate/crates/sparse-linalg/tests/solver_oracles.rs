//! Solver checks against independent dense oracles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_linalg::{
    dense_solve, fgmres, CsrBuilder, IlutParams, IlutPreconditioner, KrylovConfig, SparseMatrixCsr,
};

fn identity(x: &[f64], y: &mut [f64]) {
    y.copy_from_slice(x);
}

fn random_spd_csr(n: usize, rng: &mut ChaCha8Rng) -> (SparseMatrixCsr, DMatrix<f64>) {
    let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let spd = &raw * raw.transpose() + DMatrix::identity(n, n) * (n as f64);
    let mut b = CsrBuilder::new(n, n);
    for i in 0..n {
        for j in 0..n {
            b.push(i, j, spd[(i, j)]);
        }
    }
    (b.build(), spd)
}

#[test]
fn dense_spd_system_matches_lu_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (a, dense) = random_spd_csr(20, &mut rng);
    let rhs: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // independent oracle: dense LU
    let oracle = dense_solve(&dense, &DVector::from_column_slice(&rhs)).unwrap();

    let out = fgmres(&a, &identity, &rhs, &KrylovConfig::with_tol(1e-12)).unwrap();
    assert!(out.converged);
    let denom = oracle.norm();
    let err: f64 = out
        .x
        .iter()
        .zip(oracle.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(err / denom < 1e-8, "relative error {:.3e}", err / denom);
}

fn poisson_1d(n: usize) -> SparseMatrixCsr {
    let mut b = CsrBuilder::new(n, n);
    for i in 0..n {
        if i > 0 {
            b.push(i, i - 1, -1.0);
        }
        b.push(i, i, 2.0);
        if i + 1 < n {
            b.push(i, i + 1, -1.0);
        }
    }
    b.build()
}

#[test]
fn ilut_reduces_poisson_iteration_count() {
    let n = 50;
    let a = poisson_1d(n);
    let rhs = vec![1.0; n];
    let cfg = KrylovConfig {
        rel_tol: 1e-10,
        restart: n,
        ..KrylovConfig::default()
    };
    let plain = fgmres(&a, &identity, &rhs, &cfg).unwrap();

    let m = IlutPreconditioner::factor(&a, IlutParams::default()).unwrap();
    let apply_m = |x: &[f64], y: &mut [f64]| m.apply(x, y);
    let pre = fgmres(&a, &apply_m, &rhs, &cfg).unwrap();

    assert!(plain.converged && pre.converged);
    assert!(
        pre.iterations < plain.iterations,
        "preconditioned {} vs plain {}",
        pre.iterations,
        plain.iterations
    );
}

#[test]
fn ilut_application_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (a, _) = random_spd_csr(30, &mut rng);
    let m = IlutPreconditioner::factor(&a, IlutParams::default()).unwrap();
    let x: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (alpha, beta) = (0.37, -1.61);

    let mut mx = vec![0.0; 30];
    let mut my = vec![0.0; 30];
    m.apply(&x, &mut mx);
    m.apply(&y, &mut my);
    let combo: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| alpha * xi + beta * yi)
        .collect();
    let mut mcombo = vec![0.0; 30];
    m.apply(&combo, &mut mcombo);
    let scale: f64 = mcombo.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..30 {
        assert!(
            (mcombo[i] - (alpha * mx[i] + beta * my[i])).abs() < 1e-12 * scale.max(1.0),
            "nonlinearity at {i}"
        );
    }
}

#[test]
fn breakdown_is_distinguished_from_stall() {
    // singular operator that zeroes everything: first Arnoldi step breaks down
    let zero_op = (3usize, |_x: &[f64], y: &mut [f64]| y.fill(0.0));
    let err = fgmres(&zero_op, &identity, &[1.0, 0.0, 0.0], &KrylovConfig::default()).unwrap_err();
    assert!(matches!(err, sparse_linalg::SparseError::Breakdown { .. }));

    // hard problem with a tiny iteration cap: stall, not breakdown
    let a = poisson_1d(60);
    let cfg = KrylovConfig {
        rel_tol: 1e-14,
        max_iters: 3,
        restart: 3,
        ..KrylovConfig::default()
    };
    let err = fgmres(&a, &identity, &vec![1.0; 60], &cfg).unwrap_err();
    assert!(matches!(err, sparse_linalg::SparseError::Stalled { .. }));
}
