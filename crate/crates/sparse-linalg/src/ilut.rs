//! Threshold-based incomplete LU factorization (ILUT) with a per-row fill
//! budget, plus forward/backward and transposed triangular application.

use crate::{Result, SparseError, SparseMatrixCsr};

#[derive(Debug, Clone, Copy)]
pub struct IlutParams {
    /// Factor rows may hold up to `fill_ratio` times the nonzeros of the
    /// corresponding source row (per triangular part).
    pub fill_ratio: f64,
    /// Absolute diagonal perturbation: `a_ii <- rel_threshold * a_ii +
    /// sign(a_ii) * abs_threshold` before factorization.
    pub abs_threshold: f64,
    pub rel_threshold: f64,
    /// Entries below `drop_tolerance * ||row||_2` are discarded.
    pub drop_tolerance: f64,
}

impl Default for IlutParams {
    fn default() -> Self {
        Self {
            fill_ratio: 2.0,
            abs_threshold: 1e-4,
            rel_threshold: 1.0,
            drop_tolerance: 1e-10,
        }
    }
}

impl IlutParams {
    /// No diagonal shift and no dropping beyond the fill budget; the
    /// factorization is exact whenever the exact factors fit the budget.
    pub fn exact() -> Self {
        Self {
            fill_ratio: 1.0e9,
            abs_threshold: 0.0,
            rel_threshold: 1.0,
            drop_tolerance: 0.0,
        }
    }
}

/// Incomplete factors `A ~ L U` with unit-diagonal `L`. Transposed factors are
/// kept so the same object preconditions both `A` and `A^T` solves.
#[derive(Debug, Clone)]
pub struct IlutPreconditioner {
    lower: SparseMatrixCsr,
    upper: SparseMatrixCsr,
    lower_t: SparseMatrixCsr,
    upper_t: SparseMatrixCsr,
    /// Number of pivots that had to be perturbed away from zero.
    pivot_perturbations: usize,
    params: IlutParams,
}

impl IlutPreconditioner {
    /// Factor a square matrix with a structurally nonsingular diagonal.
    pub fn factor(a: &SparseMatrixCsr, params: IlutParams) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(SparseError::DimensionMismatch(format!(
                "ILUT needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }

        // U rows are stored densely per finished row for the update loop.
        let mut u_cols: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut u_vals: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut l_cols: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut l_vals: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut u_diag = vec![0.0; n];
        let mut pivot_perturbations = 0usize;

        let mut work = vec![0.0; n];
        let mut pattern: Vec<usize> = Vec::with_capacity(64);
        let mut in_pattern = vec![false; n];

        for i in 0..n {
            let (cols, vals) = a.row(i);
            if cols.is_empty() {
                return Err(SparseError::MissingDiagonal(i));
            }
            let mut row_norm_sq = 0.0;
            let mut nnz_lower_src = 0usize;
            let mut nnz_upper_src = 0usize;
            let mut has_diag = false;
            for (&c, &v) in cols.iter().zip(vals) {
                let v = if c == i {
                    has_diag = true;
                    params.rel_threshold * v + v.signum() * params.abs_threshold
                } else {
                    v
                };
                work[c] = v;
                if !in_pattern[c] {
                    in_pattern[c] = true;
                    pattern.push(c);
                }
                row_norm_sq += v * v;
                if c < i {
                    nnz_lower_src += 1;
                } else if c > i {
                    nnz_upper_src += 1;
                }
            }
            if !has_diag {
                return Err(SparseError::MissingDiagonal(i));
            }
            let drop_tol = params.drop_tolerance * row_norm_sq.sqrt();

            // eliminate below-diagonal entries in increasing column order
            pattern.sort_unstable();
            let mut k_idx = 0;
            while k_idx < pattern.len() {
                let k = pattern[k_idx];
                if k >= i {
                    break;
                }
                k_idx += 1;
                let factor = work[k] / u_diag[k];
                if factor.abs() < drop_tol {
                    work[k] = 0.0;
                    continue;
                }
                work[k] = factor;
                let (ucols, uvals) = (&u_cols[k], &u_vals[k]);
                for (&c, &v) in ucols.iter().zip(uvals) {
                    if c <= k {
                        continue;
                    }
                    let delta = factor * v;
                    if !in_pattern[c] {
                        if delta.abs() < drop_tol {
                            continue;
                        }
                        in_pattern[c] = true;
                        // keep the pattern sorted past the current position
                        let pos = pattern[k_idx..]
                            .binary_search(&c)
                            .unwrap_or_else(|e| e)
                            + k_idx;
                        pattern.insert(pos, c);
                        work[c] = 0.0;
                    }
                    work[c] -= delta;
                }
            }

            // split, drop small entries, enforce the fill budget
            let budget = |src_nnz: usize| -> usize {
                ((params.fill_ratio * src_nnz.max(1) as f64).ceil() as usize).max(1)
            };
            let mut lower_entries: Vec<(usize, f64)> = Vec::new();
            let mut upper_entries: Vec<(usize, f64)> = Vec::new();
            let mut diag = 0.0;
            for &c in pattern.iter() {
                let v = work[c];
                work[c] = 0.0;
                in_pattern[c] = false;
                if c == i {
                    diag = v;
                } else if v.abs() >= drop_tol && v != 0.0 {
                    if c < i {
                        lower_entries.push((c, v));
                    } else {
                        upper_entries.push((c, v));
                    }
                }
            }
            pattern.clear();

            keep_largest(&mut lower_entries, budget(nnz_lower_src));
            keep_largest(&mut upper_entries, budget(nnz_upper_src));

            if diag == 0.0 || diag.abs() < f64::MIN_POSITIVE {
                let magnitude = if params.abs_threshold > 0.0 {
                    params.abs_threshold
                } else {
                    drop_tol.max(f64::EPSILON)
                };
                diag = if diag.is_sign_negative() {
                    -magnitude
                } else {
                    magnitude
                };
                pivot_perturbations += 1;
            }
            u_diag[i] = diag;

            lower_entries.sort_unstable_by_key(|e| e.0);
            upper_entries.sort_unstable_by_key(|e| e.0);
            l_cols.push(lower_entries.iter().map(|e| e.0).collect());
            l_vals.push(lower_entries.iter().map(|e| e.1).collect());
            let mut ucol: Vec<usize> = vec![i];
            let mut uval: Vec<f64> = vec![diag];
            ucol.extend(upper_entries.iter().map(|e| e.0));
            uval.extend(upper_entries.iter().map(|e| e.1));
            u_cols.push(ucol);
            u_vals.push(uval);
        }

        let lower = rows_to_csr(n, &l_cols, &l_vals)?;
        let upper = rows_to_csr(n, &u_cols, &u_vals)?;
        let lower_t = lower.transpose();
        let upper_t = upper.transpose();
        Ok(Self {
            lower,
            upper,
            lower_t,
            upper_t,
            pivot_perturbations,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.lower.nnz() + self.upper.nnz()
    }

    pub fn pivot_perturbations(&self) -> usize {
        self.pivot_perturbations
    }

    pub fn params(&self) -> &IlutParams {
        &self.params
    }

    /// y = (L U)^{-1} x via one forward and one backward sweep.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        // forward: L z = x, unit diagonal
        for i in 0..n {
            let (cols, vals) = self.lower.row(i);
            let mut acc = x[i];
            for (&c, &v) in cols.iter().zip(vals) {
                acc -= v * y[c];
            }
            y[i] = acc;
        }
        // backward: U y = z, diagonal first in each row
        for i in (0..n).rev() {
            let (cols, vals) = self.upper.row(i);
            let mut acc = y[i];
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                } else {
                    acc -= v * y[c];
                }
            }
            y[i] = acc / diag;
        }
    }

    /// y = (L U)^{-T} x = L^{-T} U^{-T} x, preconditioning transposed systems.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        // forward: U^T z = x (U^T is lower triangular, diagonal included)
        for i in 0..n {
            let (cols, vals) = self.upper_t.row(i);
            let mut acc = x[i];
            let mut diag = 1.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i {
                    diag = v;
                } else {
                    acc -= v * y[c];
                }
            }
            y[i] = acc / diag;
        }
        // backward: L^T y = z (unit diagonal)
        for i in (0..n).rev() {
            let (cols, vals) = self.lower_t.row(i);
            let mut acc = y[i];
            for (&c, &v) in cols.iter().zip(vals) {
                if c != i {
                    acc -= v * y[c];
                }
            }
            y[i] = acc;
        }
    }
}

fn keep_largest(entries: &mut Vec<(usize, f64)>, budget: usize) {
    if entries.len() > budget {
        entries.sort_unstable_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        entries.truncate(budget);
    }
}

fn rows_to_csr(n: usize, cols: &[Vec<usize>], vals: &[Vec<f64>]) -> Result<SparseMatrixCsr> {
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0usize);
    let mut flat_cols = Vec::new();
    let mut flat_vals = Vec::new();
    for i in 0..n {
        let mut order: Vec<usize> = (0..cols[i].len()).collect();
        order.sort_unstable_by_key(|&k| cols[i][k]);
        for k in order {
            flat_cols.push(cols[i][k]);
            flat_vals.push(vals[i][k]);
        }
        row_offsets.push(flat_cols.len());
    }
    SparseMatrixCsr::from_parts(n, n, row_offsets, flat_cols, flat_vals)
}
