//! Central finite-difference oracles for every derivative operator, plus the
//! transpose-consistency identity between the mixed Hessian blocks.

use euler_dg::{
    BumpMeshSpec, EulerDgOps, FlowBoundaryConditions, FreeStream, HessianBlock,
    InverseDesignObjective, WallTarget,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_SAFE_PERTURBATION: f64 = 0.02;

struct Setup {
    disc: euler_dg::DgDiscretization,
    x: Vec<f64>,
    u: Vec<f64>,
    bc: FlowBoundaryConditions,
}

fn setup(p: usize, nx: usize, ny: usize, seed: u64) -> Setup {
    let (disc, x) = BumpMeshSpec::new(nx, ny, p, 0.0625).generate();
    let fs = FreeStream::new(0.3);
    let bc = FlowBoundaryConditions::channel(&fs, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = fs.fill_state(disc.n_state());
    // additive perturbation: keeps every velocity component away from the
    // measure-zero kink manifolds of the upwind dissipation
    for v in u.iter_mut() {
        *v += GAMMA_SAFE_PERTURBATION * rng.gen_range(0.2..1.0) * rng.gen_range(-1.0f64..1.0).signum();
    }
    Setup { disc, x, u, bc }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-300)
}

fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn state_jacobian_matches_central_differences() {
    for (p, seed) in [(1usize, 3u64), (2, 4)] {
        let s = setup(p, 5, 2, seed);
        let ops = EulerDgOps::new(&s.disc, &s.bc);
        let jac = ops.jacobian_state(&s.u, &s.x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let du = random_direction(s.u.len(), &mut rng);
        let eps = 1e-6;
        let up: Vec<f64> = s.u.iter().zip(&du).map(|(u, d)| u + eps * d).collect();
        let um: Vec<f64> = s.u.iter().zip(&du).map(|(u, d)| u - eps * d).collect();
        let rp = ops.residual(&up, &s.x).unwrap();
        let rm = ops.residual(&um, &s.x).unwrap();
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let mut jv = vec![0.0; s.u.len()];
        jac.mul_vec(&du, &mut jv);
        let err = rel_err(&jv, &fd);
        assert!(err < 1e-6, "p={p}: R_u directional error {err:.3e}");
    }
}

#[test]
fn geometry_jacobian_matches_central_differences() {
    for (p, seed) in [(1usize, 5u64), (2, 6)] {
        let s = setup(p, 5, 2, seed);
        let ops = EulerDgOps::new(&s.disc, &s.bc);
        let jac = ops.jacobian_geometry(&s.u, &s.x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 200);
        let dx = random_direction(s.x.len(), &mut rng);
        let eps = 1e-7;
        let xp: Vec<f64> = s.x.iter().zip(&dx).map(|(x, d)| x + eps * d).collect();
        let xm: Vec<f64> = s.x.iter().zip(&dx).map(|(x, d)| x - eps * d).collect();
        let rp = ops.residual(&s.u, &xp).unwrap();
        let rm = ops.residual(&s.u, &xm).unwrap();
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let mut jv = vec![0.0; s.u.len()];
        jac.mul_vec(&dx, &mut jv);
        let err = rel_err(&jv, &fd);
        assert!(err < 1e-5, "p={p}: R_x directional error {err:.3e}");
    }
}

#[test]
fn jacobians_match_single_pass_directional_derivative() {
    let s = setup(1, 4, 2, 9);
    let ops = EulerDgOps::new(&s.disc, &s.bc);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let du = random_direction(s.u.len(), &mut rng);
    let dx = random_direction(s.x.len(), &mut rng);
    let direct = ops.residual_directional(&s.u, &s.x, &du, &dx).unwrap();
    let ju = ops.jacobian_state(&s.u, &s.x).unwrap();
    let jx = ops.jacobian_geometry(&s.u, &s.x).unwrap();
    let mut expect = vec![0.0; s.u.len()];
    let mut tmp = vec![0.0; s.u.len()];
    ju.mul_vec(&du, &mut expect);
    jx.mul_vec(&dx, &mut tmp);
    for (e, t) in expect.iter_mut().zip(&tmp) {
        *e += t;
    }
    let err = rel_err(&direct, &expect);
    assert!(err < 1e-13, "assembled vs single-pass dual: {err:.3e}");
}

#[test]
fn dual_weighted_hessians_match_fd_of_first_derivatives() {
    for (p, seed) in [(1usize, 7u64), (2, 8)] {
        let s = setup(p, 4, 2, seed);
        let ops = EulerDgOps::new(&s.disc, &s.bc);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 300);
        let lambda = random_direction(s.u.len(), &mut rng);
        let dv = random_direction(s.u.len(), &mut rng);
        let dxv = random_direction(s.x.len(), &mut rng);

        // lambda^T R_uu against FD of lambda^T R_u along dv
        let huu = ops
            .dual_weighted_hessian(&s.u, &s.x, &lambda, HessianBlock::StateState)
            .unwrap();
        let eps = 1e-6;
        let lam_ru = |u: &[f64]| {
            let j = ops.jacobian_state(u, &s.x).unwrap();
            let mut out = vec![0.0; s.u.len()];
            j.mul_transpose_vec(&lambda, &mut out);
            out
        };
        let up: Vec<f64> = s.u.iter().zip(&dv).map(|(u, d)| u + eps * d).collect();
        let um: Vec<f64> = s.u.iter().zip(&dv).map(|(u, d)| u - eps * d).collect();
        let (gp, gm) = (lam_ru(&up), lam_ru(&um));
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let mut hv = vec![0.0; s.u.len()];
        huu.mul_vec(&dv, &mut hv);
        let err = rel_err(&hv, &fd);
        assert!(err < 1e-5, "p={p}: lambda^T R_uu error {err:.3e}");

        // lambda^T R_ux against FD of lambda^T R_u along dxv (geometry move)
        let hux = ops
            .dual_weighted_hessian(&s.u, &s.x, &lambda, HessianBlock::StateGeometry)
            .unwrap();
        let lam_ru_at_x = |x: &[f64]| {
            let j = ops.jacobian_state(&s.u, x).unwrap();
            let mut out = vec![0.0; s.u.len()];
            j.mul_transpose_vec(&lambda, &mut out);
            out
        };
        let heps = 1e-6;
        let xp: Vec<f64> = s.x.iter().zip(&dxv).map(|(x, d)| x + heps * d).collect();
        let xm: Vec<f64> = s.x.iter().zip(&dxv).map(|(x, d)| x - heps * d).collect();
        let (gp, gm) = (lam_ru_at_x(&xp), lam_ru_at_x(&xm));
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * heps)).collect();
        let mut hv = vec![0.0; s.u.len()];
        hux.mul_vec(&dxv, &mut hv);
        let err = rel_err(&hv, &fd);
        assert!(err < 1e-5, "p={p}: lambda^T R_ux error {err:.3e}");

        // lambda^T R_xx against FD of lambda^T R_x along dxv
        let hxx = ops
            .dual_weighted_hessian(&s.u, &s.x, &lambda, HessianBlock::GeometryGeometry)
            .unwrap();
        let lam_rx = |x: &[f64]| {
            let j = ops.jacobian_geometry(&s.u, x).unwrap();
            let mut out = vec![0.0; s.x.len()];
            j.mul_transpose_vec(&lambda, &mut out);
            out
        };
        let (gp, gm) = (lam_rx(&xp), lam_rx(&xm));
        let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * heps)).collect();
        let mut hv = vec![0.0; s.x.len()];
        hxx.mul_vec(&dxv, &mut hv);
        let err = rel_err(&hv, &fd);
        assert!(err < 1e-5, "p={p}: lambda^T R_xx error {err:.3e}");
    }
}

#[test]
fn mixed_hessian_blocks_are_transposes() {
    let s = setup(1, 4, 2, 11);
    let ops = EulerDgOps::new(&s.disc, &s.bc);
    let mut rng = ChaCha8Rng::seed_from_u64(311);
    let lambda = random_direction(s.u.len(), &mut rng);
    let hux = ops
        .dual_weighted_hessian(&s.u, &s.x, &lambda, HessianBlock::StateGeometry)
        .unwrap();
    // apply both as an operator on random vectors: <H v, w> == <v, H^T w>
    let v = random_direction(s.x.len(), &mut rng);
    let w = random_direction(s.u.len(), &mut rng);
    let mut hv = vec![0.0; s.u.len()];
    hux.mul_vec(&v, &mut hv);
    let mut htw = vec![0.0; s.x.len()];
    hux.mul_transpose_vec(&w, &mut htw);
    let lhs: f64 = hv.iter().zip(&w).map(|(a, b)| a * b).sum();
    let rhs: f64 = v.iter().zip(&htw).map(|(a, b)| a * b).sum();
    assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs().max(1.0));

    // explicit transpose agrees entry-wise with the CSR transpose
    let t = hux.transpose();
    let mut htw2 = vec![0.0; s.x.len()];
    t.mul_vec(&w, &mut htw2);
    for (a, b) in htw.iter().zip(&htw2) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn row_sparsity_matches_stencil_bound() {
    // p=1, d=2: at most (1+2d)(d+2)(p+1)^d = 80 structural nonzeros per row
    let s = setup(1, 5, 3, 13);
    let ops = EulerDgOps::new(&s.disc, &s.bc);
    let jac = ops.jacobian_state(&s.u, &s.x).unwrap();
    let offsets = jac.row_offsets();
    let max_row = (0..jac.nrows())
        .map(|r| offsets[r + 1] - offsets[r])
        .max()
        .unwrap();
    assert!(max_row <= 80, "row nnz {max_row} exceeds stencil bound 80");
    // rows do couple beyond their own cell (entries that are exactly zero at
    // this state are dropped, so the count sits below the structural bound)
    assert!(max_row > 16, "row nnz {max_row} suspiciously small");
}

#[test]
fn objective_derivatives_match_finite_differences() {
    let s = setup(1, 5, 2, 17);
    let ops = EulerDgOps::new(&s.disc, &s.bc);
    let _ = ops;
    let target_state = {
        // target = trace of a slightly different smooth state
        let fs = FreeStream::new(0.3);
        let mut u = fs.fill_state(s.disc.n_state());
        for (i, v) in u.iter_mut().enumerate() {
            *v *= 1.0 + 0.01 * ((i % 7) as f64 - 3.0) / 3.0;
        }
        u
    };
    let target = WallTarget::from_solution(&s.disc, &target_state, &s.x);
    let obj = InverseDesignObjective::new(&s.disc, &target);
    let d = obj.derivatives(&s.u, &s.x).unwrap();
    assert!(d.value > 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let du = random_direction(s.u.len(), &mut rng);
    let dx: Vec<f64> = random_direction(s.x.len(), &mut rng);
    let eps = 1e-6;

    // gradient checks
    let up: Vec<f64> = s.u.iter().zip(&du).map(|(u, d)| u + eps * d).collect();
    let um: Vec<f64> = s.u.iter().zip(&du).map(|(u, d)| u - eps * d).collect();
    let fd_u = (obj.value(&up, &s.x).unwrap() - obj.value(&um, &s.x).unwrap()) / (2.0 * eps);
    let grad_dot: f64 = d.grad_state.iter().zip(&du).map(|(g, v)| g * v).sum();
    assert!(
        (fd_u - grad_dot).abs() / grad_dot.abs().max(1e-12) < 1e-6,
        "I_u: fd {fd_u:.6e} vs ad {grad_dot:.6e}"
    );

    let xp: Vec<f64> = s.x.iter().zip(&dx).map(|(x, d)| x + eps * d).collect();
    let xm: Vec<f64> = s.x.iter().zip(&dx).map(|(x, d)| x - eps * d).collect();
    let fd_x = (obj.value(&s.u, &xp).unwrap() - obj.value(&s.u, &xm).unwrap()) / (2.0 * eps);
    let grad_dot_x: f64 = d.grad_geometry.iter().zip(&dx).map(|(g, v)| g * v).sum();
    assert!(
        (fd_x - grad_dot_x).abs() / grad_dot_x.abs().max(1e-12) < 1e-6,
        "I_x: fd {fd_x:.6e} vs ad {grad_dot_x:.6e}"
    );

    // Hessian blocks against FD of gradients
    let grad_u_at = |u: &[f64], x: &[f64]| obj.derivatives(u, x).unwrap().grad_state;
    let gp = grad_u_at(&up, &s.x);
    let gm = grad_u_at(&um, &s.x);
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    let mut hv = vec![0.0; s.u.len()];
    d.hess_uu.mul_vec(&du, &mut hv);
    assert!(rel_err(&hv, &fd) < 1e-6, "I_uu");

    let gp = grad_u_at(&s.u, &xp);
    let gm = grad_u_at(&s.u, &xm);
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    let mut hv = vec![0.0; s.u.len()];
    d.hess_ux.mul_vec(&dx, &mut hv);
    assert!(rel_err(&hv, &fd) < 1e-6, "I_ux");

    let grad_x_at = |x: &[f64]| obj.derivatives(&s.u, x).unwrap().grad_geometry;
    let gp = grad_x_at(&xp);
    let gm = grad_x_at(&xm);
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    let mut hv = vec![0.0; s.x.len()];
    d.hess_xx.mul_vec(&dx, &mut hv);
    assert!(rel_err(&hv, &fd) < 5e-6, "I_xx");
}

#[test]
fn objective_vanishes_when_state_matches_target() {
    let s = setup(1, 4, 2, 23);
    let target = WallTarget::from_solution(&s.disc, &s.u, &s.x);
    let obj = InverseDesignObjective::new(&s.disc, &target);
    let d = obj.derivatives(&s.u, &s.x).unwrap();
    assert!(d.value.abs() < 1e-22);
    let gmax = d.grad_state.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(gmax < 1e-12, "I_u not zero at the target: {gmax:.3e}");
}
