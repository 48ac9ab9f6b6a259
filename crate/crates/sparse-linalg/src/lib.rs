//! Sparse and dense linear-algebra kernels: CSR storage, flexible GMRES,
//! threshold-based incomplete LU, and small dense eigen/LU utilities.

mod csr;
mod dense;
mod gmres;
mod ilut;
mod market;

pub use csr::{CsrBuilder, SparseMatrixCsr};
pub use dense::{dense_eig, dense_solve, DenseError};
pub use gmres::{fgmres, gmres_csr, KrylovConfig, KrylovOutcome, LinearOperator};
pub use ilut::{IlutParams, IlutPreconditioner};
pub use market::{read_matrix_market, write_matrix_market};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Arnoldi breakdown at iteration {iteration} (basis norm {norm:.3e})")]
    Breakdown { iteration: usize, norm: f64 },
    #[error("Krylov solver stalled after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    Stalled {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("structurally singular: row {0} has no diagonal entry")]
    MissingDiagonal(usize),
    #[error("eigen iteration failed to converge")]
    EigNonConvergence,
    #[error("matrix market parse error at line {line}: {message}")]
    MarketParse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SparseError>;

/// Euclidean norm of a slice.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product of two slices (lengths must match).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
