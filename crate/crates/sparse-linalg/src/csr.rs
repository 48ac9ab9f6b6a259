//! Compressed sparse row matrices.

use crate::{Result, SparseError};

/// CSR matrix with strictly increasing column indices within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsr {
    /// Build from raw parts, validating the CSR invariants.
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(SparseError::InvalidStructure(format!(
                "row_offsets length {} != nrows + 1 = {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(SparseError::InvalidStructure(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(SparseError::InvalidStructure(
                "col_indices and values length mismatch".into(),
            ));
        }
        for r in 0..nrows {
            if row_offsets[r] > row_offsets[r + 1] {
                return Err(SparseError::InvalidStructure(format!(
                    "row_offsets not monotone at row {r}"
                )));
            }
            let row = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(SparseError::InvalidStructure(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
            if let Some(&c) = row.last() {
                if c >= ncols {
                    return Err(SparseError::InvalidStructure(format!(
                        "column {c} out of bounds in row {r}"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[r];
        let hi = self.row_offsets[r + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let lo = self.row_offsets[r];
            let hi = self.row_offsets[r + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[r] = acc;
        }
    }

    /// y = A^T x without forming the transpose.
    pub fn mul_transpose_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            let lo = self.row_offsets[r];
            let hi = self.row_offsets[r + 1];
            for k in lo..hi {
                y[self.col_indices[k]] += self.values[k] * xr;
            }
        }
    }

    /// Explicit transpose.
    pub fn transpose(&self) -> SparseMatrixCsr {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut cursor = counts.clone();
        for r in 0..self.nrows {
            let lo = self.row_offsets[r];
            let hi = self.row_offsets[r + 1];
            for k in lo..hi {
                let c = self.col_indices[k];
                let dst = cursor[c];
                cols[dst] = r;
                vals[dst] = self.values[k];
                cursor[c] += 1;
            }
        }
        SparseMatrixCsr {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    /// Add `shift[i]` to the diagonal entry of row i. Every row must already
    /// carry a structural diagonal.
    pub fn add_to_diagonal(&mut self, shift: &[f64]) -> Result<()> {
        assert_eq!(shift.len(), self.nrows);
        for r in 0..self.nrows {
            let lo = self.row_offsets[r];
            let hi = self.row_offsets[r + 1];
            match self.col_indices[lo..hi].binary_search(&r) {
                Ok(k) => self.values[lo + k] += shift[r],
                Err(_) => return Err(SparseError::MissingDiagonal(r)),
            }
        }
        Ok(())
    }

    /// Dense copy, for small verification problems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c)] = *v;
            }
        }
        m
    }
}

/// Accumulating triplet builder: duplicate entries are summed.
#[derive(Debug, Clone)]
pub struct CsrBuilder {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl CsrBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.nrows && c < self.ncols);
        self.triplets.push((r, c, v));
    }

    pub fn build(mut self) -> SparseMatrixCsr {
        self.triplets
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; self.nrows + 1];
        let mut col_indices: Vec<usize> = Vec::with_capacity(self.triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] = col_indices.len();
                last = Some((r, c));
            }
            row_offsets[r + 1] = col_indices.len();
        }
        for r in 0..self.nrows {
            if row_offsets[r + 1] < row_offsets[r] {
                row_offsets[r + 1] = row_offsets[r];
            }
        }
        SparseMatrixCsr::from_parts(self.nrows, self.ncols, row_offsets, col_indices, values)
            .expect("builder produced invalid CSR")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_sums_duplicates_and_sorts() {
        let mut b = CsrBuilder::new(2, 3);
        b.push(1, 2, 1.0);
        b.push(0, 1, 2.0);
        b.push(1, 2, 3.0);
        b.push(1, 0, 1.5);
        let m = b.build();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(SparseMatrixCsr::from_parts(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 2.0]).is_err());
        assert!(SparseMatrixCsr::from_parts(1, 2, vec![0, 1], vec![5], vec![1.0]).is_err());
        assert!(SparseMatrixCsr::from_parts(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn matvec_and_transpose_agree_with_dense() {
        let mut b = CsrBuilder::new(3, 2);
        b.push(0, 0, 1.0);
        b.push(0, 1, -2.0);
        b.push(2, 1, 4.0);
        let m = b.build();
        let x = vec![3.0, 5.0];
        let mut y = vec![0.0; 3];
        m.mul_vec(&x, &mut y);
        assert_eq!(y, vec![-7.0, 0.0, 20.0]);
        let w = vec![1.0, 2.0, 3.0];
        let mut z = vec![0.0; 2];
        m.mul_transpose_vec(&w, &mut z);
        assert_eq!(z, vec![1.0, 10.0]);
        let t = m.transpose();
        let mut z2 = vec![0.0; 2];
        t.mul_vec(&w, &mut z2);
        assert_eq!(z, z2);
    }
}
