//! Restarted flexible GMRES with right preconditioning.
//!
//! Right preconditioning keeps the reported residual equal to the true
//! residual `||b - A x||`, so a single relative tolerance means the same thing
//! regardless of which preconditioner is plugged in. The flexible variant
//! stores the preconditioned basis so the preconditioner may itself be an
//! inexact inner solve.

use crate::{axpy, dot, norm2, Result, SparseError, SparseMatrixCsr};

/// Abstract linear operator on contiguous vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrixCsr {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.1)(x, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    pub restart: usize,
    /// Store the preconditioned basis (flexible variant). Required whenever
    /// the preconditioner varies between applications.
    pub flexible: bool,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            max_iters: 2000,
            restart: 200,
            flexible: true,
        }
    }
}

impl KrylovConfig {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Residual-norm estimate after every Arnoldi step, monotone non-increasing.
    pub residual_history: Vec<f64>,
}

/// Solve `A x = b` with right-preconditioned (F)GMRES. `apply_m` maps a vector
/// through the preconditioner; pass the identity closure for no preconditioning.
/// The iteration count equals the number of Arnoldi steps, which equals the
/// number of preconditioner applications.
pub fn fgmres<A, M>(apply_a: &A, apply_m: &M, b: &[f64], cfg: &KrylovConfig) -> Result<KrylovOutcome>
where
    A: LinearOperator + ?Sized,
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    if apply_a.dim() != n {
        return Err(SparseError::DimensionMismatch(format!(
            "operator dim {} vs rhs {}",
            apply_a.dim(),
            n
        )));
    }
    assert!(cfg.restart >= 1, "restart must be at least 1");
    assert!(cfg.rel_tol > 0.0, "relative tolerance must be positive");

    let bnorm = norm2(b);
    let target = f64::max(cfg.rel_tol * bnorm, cfg.abs_tol);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();

    if bnorm <= target || bnorm == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            residual_norm: bnorm,
            converged: true,
            residual_history: history,
        });
    }

    let m = cfg.restart;
    let mut iterations = 0usize;
    let mut residual = vec![0.0; n];
    residual.copy_from_slice(b);
    let mut beta = bnorm;

    loop {
        // Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut precond_basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut v0 = residual.clone();
        for v in v0.iter_mut() {
            *v /= beta;
        }
        basis.push(v0);

        let mut inner_count = 0usize;
        let mut converged = false;
        for j in 0..m {
            let mut z = vec![0.0; n];
            apply_m(&basis[j], &mut z);
            let mut w = vec![0.0; n];
            apply_a.apply(&z, &mut w);
            // The preconditioned basis is always kept; with a fixed
            // preconditioner this reduces to ordinary right-preconditioned
            // GMRES at the cost of one extra stored vector per step.
            precond_basis.push(z);

            for i in 0..=j {
                let h = dot(&w, &basis[i]);
                hess[i][j] = h;
                axpy(-h, &basis[i], &mut w);
            }
            // second pass guards against loss of orthogonality
            for i in 0..=j {
                let h = dot(&w, &basis[i]);
                if h != 0.0 {
                    hess[i][j] += h;
                    axpy(-h, &basis[i], &mut w);
                }
            }
            let h_next = norm2(&w);
            hess[j + 1][j] = h_next;
            iterations += 1;
            inner_count = j + 1;

            // apply accumulated Givens rotations to the new column
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let denom = (hess[j][j] * hess[j][j] + h_next * h_next).sqrt();
            if denom == 0.0 {
                return Err(SparseError::Breakdown {
                    iteration: iterations,
                    norm: denom,
                });
            }
            cs[j] = hess[j][j] / denom;
            sn[j] = h_next / denom;
            hess[j][j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];

            let res_est = g[j + 1].abs();
            history.push(res_est);

            if res_est <= target {
                converged = true;
                break;
            }
            if h_next <= f64::EPSILON * denom {
                // exact breakdown without convergence
                return Err(SparseError::Breakdown {
                    iteration: iterations,
                    norm: h_next,
                });
            }
            if iterations >= cfg.max_iters {
                break;
            }
            let mut v_next = w;
            for v in v_next.iter_mut() {
                *v /= h_next;
            }
            basis.push(v_next);
        }

        // solve the triangular least-squares system and update x
        let k = inner_count;
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in (i + 1)..k {
                acc -= hess[i][l] * y[l];
            }
            y[i] = acc / hess[i][i];
        }
        for (l, yl) in y.iter().enumerate() {
            axpy(*yl, &precond_basis[l], &mut x);
        }

        // true residual for the restart / convergence decision
        let mut ax = vec![0.0; n];
        apply_a.apply(&x, &mut ax);
        for i in 0..n {
            residual[i] = b[i] - ax[i];
        }
        beta = norm2(&residual);

        if beta <= target * (1.0 + 1e-12) || converged {
            return Ok(KrylovOutcome {
                x,
                iterations,
                residual_norm: beta,
                converged: beta <= target * (1.0 + 1e-9),
                residual_history: history,
            });
        }
        if iterations >= cfg.max_iters {
            return Err(SparseError::Stalled {
                iterations,
                residual: beta,
                target,
            });
        }
    }
}

/// Convenience wrapper: GMRES on a CSR matrix with an optional fixed
/// preconditioner closure.
pub fn gmres_csr<M>(
    a: &SparseMatrixCsr,
    apply_m: &M,
    b: &[f64],
    cfg: &KrylovConfig,
) -> Result<KrylovOutcome>
where
    M: Fn(&[f64], &mut [f64]),
{
    fgmres(a, apply_m, b, cfg)
}
