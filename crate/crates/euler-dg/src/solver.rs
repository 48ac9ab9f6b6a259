//! Pseudo-transient continuation to the steady state.
//!
//! Backward-Euler steps `(M / dtau + R_u) du = -R` with the pseudo-time step
//! growing as `dtau = c / ||R||^2`, so the iteration turns into full Newton as
//! the residual vanishes. A step that fails to decrease the residual or leaves
//! the physical region shrinks the continuation coefficient and retries.

use cost_model::{CostLedger, WorkEvent};
use sparse_linalg::{IlutParams, IlutPreconditioner, KrylovConfig};

use crate::bc::FlowBoundaryConditions;
use crate::mesh::DgDiscretization;
use crate::residual::EulerDgOps;
use crate::EulerError;

#[derive(Debug, Clone, Copy)]
pub struct PtcConfig {
    /// Absolute 2-norm tolerance on the steady residual.
    pub flow_tol: f64,
    pub max_steps: usize,
    /// Relative tolerance of the inner linear solves.
    pub linear_tol: f64,
    pub linear_restart: usize,
    pub linear_max_iters: usize,
    /// First pseudo-time step; later steps follow `dtau = c / ||R||^2` with
    /// the coefficient adapted to step quality.
    pub initial_coefficient: f64,
    pub ilut: IlutParams,
}

impl Default for PtcConfig {
    fn default() -> Self {
        Self {
            flow_tol: 1e-11,
            max_steps: 200,
            linear_tol: 1e-8,
            linear_restart: 200,
            linear_max_iters: 600,
            initial_coefficient: 0.1,
            ilut: IlutParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub state: Vec<f64>,
    pub residual_norm: f64,
    pub steps: usize,
    pub residual_history: Vec<f64>,
}

/// Drive `R(u, x) = 0` from the initial state.
pub fn solve_flow(
    disc: &DgDiscretization,
    bc: &FlowBoundaryConditions,
    u0: &[f64],
    x: &[f64],
    cfg: &PtcConfig,
    ledger: Option<&CostLedger>,
) -> Result<FlowSolution, EulerError> {
    let ops = EulerDgOps::new(disc, bc);
    let record = |ev: WorkEvent, n: u64| {
        if let Some(l) = ledger {
            l.record_many(ev, n);
        }
    };

    let mut u = u0.to_vec();
    let mut residual = ops.residual(&u, x)?;
    record(WorkEvent::ResidualEval, 1);
    let mut rnorm = norm2(&residual);
    let mut history = vec![rnorm];
    if rnorm <= cfg.flow_tol {
        return Ok(FlowSolution {
            state: u,
            residual_norm: rnorm,
            steps: 0,
            residual_history: history,
        });
    }

    let mass = ops.mass_diagonal(x);
    // dtau = coefficient / ||R||^2: the quadratic growth recovers Newton as
    // the residual vanishes, the coefficient adapts to step quality
    let mut coefficient = cfg.initial_coefficient * rnorm * rnorm;
    let mut steps = 0usize;

    while steps < cfg.max_steps {
        steps += 1;
        let jac = ops.jacobian_state(&u, x)?;
        record(WorkEvent::JacobianAssembly, 1);

        // try decreasing pseudo-time steps until the residual drops
        let mut attempt = 0usize;
        loop {
            let mut shrink = true;
            let inv_dtau = if coefficient > 1e14 {
                0.0
            } else {
                rnorm * rnorm / coefficient
            };
            let mut shifted = jac.clone();
            let shift: Vec<f64> = mass.iter().map(|m| m * inv_dtau).collect();
            shifted
                .add_to_diagonal(&shift)
                .map_err(|e| EulerError::Linear(e.to_string()))?;
            let debug = std::env::var_os("PTC_DEBUG").is_some();
            if let Ok(precond) = IlutPreconditioner::factor(&shifted, cfg.ilut) {
                let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
                let apply_m = |v: &[f64], out: &mut [f64]| {
                    precond.apply(v, out);
                    record(WorkEvent::IlutApplication, 1);
                };
                let lin_cfg = KrylovConfig {
                    rel_tol: cfg.linear_tol,
                    abs_tol: 0.0,
                    max_iters: cfg.linear_max_iters,
                    restart: cfg.linear_restart,
                    flexible: true,
                };
                match sparse_linalg::fgmres(&shifted, &apply_m, &rhs, &lin_cfg) {
                    Ok(out) => {
                        record(WorkEvent::MatvecFlowJacobian, out.iterations as u64 + 1);
                        let trial: Vec<f64> =
                            u.iter().zip(&out.x).map(|(ui, di)| ui + di).collect();
                        match ops.residual(&trial, x) {
                            Ok(new_residual) => {
                                record(WorkEvent::ResidualEval, 1);
                                let new_norm = norm2(&new_residual);
                                if new_norm.is_finite() && new_norm <= rnorm * (1.0 + 1e-10) {
                                    u = trial;
                                    residual = new_residual;
                                    rnorm = new_norm;
                                    history.push(rnorm);
                                    coefficient *= 2.0;
                                    shrink = false;
                                } else if debug {
                                    eprintln!("ptc step {steps} attempt {attempt}: residual rose {rnorm:.3e} -> {new_norm:.3e} (lin iters {})", out.iterations);
                                }
                            }
                            Err(EulerError::NonPhysicalState { cell, point }) => {
                                if debug {
                                    eprintln!("ptc step {steps} attempt {attempt}: non-physical at cell {cell} q{point}");
                                }
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    Err(e) => {
                        if debug {
                            eprintln!("ptc step {steps} attempt {attempt}: linear failure {e}");
                        }
                    }
                }
            } else if debug {
                eprintln!("ptc step {steps} attempt {attempt}: ILUT factorization failed");
            }
            if !shrink {
                break;
            }
            attempt += 1;
            coefficient *= 0.25;
            if attempt > 60 || coefficient < 1e-20 {
                return Err(EulerError::FlowDivergence { history });
            }
        }
        record(WorkEvent::ForwardSolve, 1);

        if rnorm <= cfg.flow_tol {
            return Ok(FlowSolution {
                state: u,
                residual_norm: rnorm,
                steps,
                residual_history: history,
            });
        }
    }
    Err(EulerError::FlowDivergence { history })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
