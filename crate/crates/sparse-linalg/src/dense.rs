//! Dense eigenvalue and solve utilities for verification-lab scale problems.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix larger than verification-lab scale ({0} > {1})")]
    TooLarge(usize, usize),
    #[error("eigenvalue iteration did not converge")]
    NonConvergence,
    #[error("singular system")]
    Singular,
}

const MAX_EIG_DIM: usize = 400;

/// All eigenvalues of a real square matrix, sorted by (real, imaginary) part.
/// Partial results are withheld on non-convergence.
pub fn dense_eig(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>, DenseError> {
    if a.nrows() != a.ncols() {
        return Err(DenseError::NotSquare(a.nrows(), a.ncols()));
    }
    if a.nrows() > MAX_EIG_DIM {
        return Err(DenseError::TooLarge(a.nrows(), MAX_EIG_DIM));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-14, 10_000)
        .ok_or(DenseError::NonConvergence)?;
    let mut eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(eig)
}

/// Solve a dense system by LU with partial pivoting.
pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, DenseError> {
    if a.nrows() != a.ncols() {
        return Err(DenseError::NotSquare(a.nrows(), a.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(DenseError::Singular)
}
