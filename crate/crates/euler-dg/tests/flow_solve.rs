//! Steady-state solves on the Gaussian-bump channel: convergence behaviour and
//! the entropy-error accuracy benchmark.

use euler_dg::{
    entropy_error, solve_flow, BumpMeshSpec, FlowBoundaryConditions, FreeStream, PtcConfig,
};

fn solve_bump(nx: usize, ny: usize, p: usize) -> (f64, Vec<f64>) {
    let spec = BumpMeshSpec::new(nx, ny, p, 0.0625);
    let (disc, x) = spec.generate();
    let fs = FreeStream::new(0.3);
    let bc = FlowBoundaryConditions::channel(&fs, 1.0);
    let u0 = fs.fill_state(disc.n_state());
    let sol = solve_flow(&disc, &bc, &u0, &x, &PtcConfig::default(), None).unwrap();
    let err = entropy_error(&disc, &sol.state, &x, &fs);
    (err, sol.residual_history)
}

#[test]
fn entropy_error_64_cells_p1_matches_reference() {
    let (err, history) = solve_bump(16, 4, 1);
    let reference = 5.73e-3;
    assert!(
        (err - reference).abs() / reference < 0.15,
        "entropy error {err:.4e}, expected {reference:.3e} +- 15% (history: {history:?})"
    );
}

#[test]
fn terminal_convergence_is_superlinear() {
    let (_, history) = solve_bump(16, 4, 1);
    let n = history.len();
    assert!(n >= 3, "too few steps: {history:?}");
    let (r_prev, r_last) = (history[n - 2], history[n - 1]);
    assert!(r_last < 1e-11);
    // quadratic-rate tail: log r_{k+1} / log r_k well above 1 once dtau blows up
    let rate = r_last.ln() / r_prev.ln();
    assert!(
        rate >= 1.7,
        "terminal rate {rate:.2} (last residuals {r_prev:.3e} -> {r_last:.3e})"
    );
}

#[test]
fn converged_start_returns_immediately() {
    let spec = BumpMeshSpec::new(8, 2, 1, 0.0625);
    let (disc, x) = spec.generate();
    let fs = FreeStream::new(0.3);
    let bc = FlowBoundaryConditions::channel(&fs, 1.0);
    let u0 = fs.fill_state(disc.n_state());
    let sol = solve_flow(&disc, &bc, &u0, &x, &PtcConfig::default(), None).unwrap();
    let again = solve_flow(&disc, &bc, &sol.state, &x, &PtcConfig::default(), None).unwrap();
    assert_eq!(again.steps, 0);
    assert_eq!(again.state, sol.state);
}

#[test]
fn refinement_rate_p1_is_second_order() {
    let (coarse, _) = solve_bump(16, 4, 1);
    let (fine, _) = solve_bump(32, 8, 1);
    let rate = (coarse / fine).log2();
    assert!(
        (rate - 2.14).abs() < 0.4,
        "observed rate {rate:.2}, coarse {coarse:.3e}, fine {fine:.3e}"
    );
}
