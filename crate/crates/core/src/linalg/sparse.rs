use rayon::prelude::*;

use crate::error::{dim_err, param_err, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Compressed sparse row storage.
///
/// `row_ptr` is nondecreasing with `row_ptr[rows] == nnz`, and column indices
/// are strictly increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn try_new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != rows + 1 || row_ptr[0] != 0 {
            return Err(param_err("row_ptr must have rows+1 entries starting at 0"));
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(param_err("row_ptr must be nondecreasing"));
        }
        if row_ptr[rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(param_err("row_ptr[rows] must equal nnz"));
        }
        for r in 0..rows {
            let idx = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(param_err(format!("row {r}: column indices not strictly increasing")));
            }
            if idx.last().is_some_and(|&c| c >= cols) {
                return Err(dim_err(format!("row {r}: column index out of bounds")));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(param_err("non-finite sparse value"));
        }
        Ok(CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, T)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(dim_err(format!("triplet ({r}, {c}) outside {rows}x{cols}")));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::try_new(rows, cols, row_ptr, col_idx, values)
    }

    pub fn from_dense(a: &DenseMatrix<T>) -> Self {
        let mut row_ptr = vec![0usize; a.rows() + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a[(i, j)];
                if v != T::zero() {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        CsrMatrix {
            rows: a.rows(),
            cols: a.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.iter().map(|&d| T::from_f64(d)).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&c) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                out[(r, c)] = v;
            }
        }
        out
    }

    /// Conjugate transpose, again in CSR form.
    pub fn adjoint(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                let p = next[c];
                col_idx[p] = r;
                values[p] = v.conj();
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let (idx, vals) = self.row(r);
                idx.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `self · x`
    pub fn mul_dense(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(x.rows(), self.cols, "sparse mul: inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, x.cols());
        if self.rows == 0 {
            return out;
        }
        out.data_mut().par_chunks_mut(self.rows).enumerate().for_each(|(j, oc)| {
            let xc = x.col(j);
            for (r, o) in oc.iter_mut().enumerate() {
                let (idx, vals) = self.row(r);
                let mut s = T::zero();
                for (&c, &v) in idx.iter().zip(vals) {
                    s += v * xc[c];
                }
                *o = s;
            }
        });
        out
    }

    /// `self* · y`
    pub fn adjoint_mul_dense(&self, y: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(y.rows(), self.rows, "sparse adjoint mul: inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.cols, y.cols());
        if self.cols == 0 {
            return out;
        }
        out.data_mut().par_chunks_mut(self.cols).enumerate().for_each(|(j, oc)| {
            let yc = y.col(j);
            for (r, &yr) in yc.iter().enumerate() {
                if yr == T::zero() {
                    continue;
                }
                let (idx, vals) = self.row(r);
                for (&c, &v) in idx.iter().zip(vals) {
                    oc[c] += v.conj() * yr;
                }
            }
        });
        out
    }

    /// `self · other` accumulated into a dense result.
    pub fn mul_sparse_to_dense(&self, other: &CsrMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.cols, other.rows, "sparse product: inner dimensions differ");
        let n = self.rows;
        let mut out = DenseMatrix::zeros(n, other.cols);
        let data = out.data_mut();
        for r in 0..n {
            let (idx, vals) = self.row(r);
            for (&i, &a) in idx.iter().zip(vals) {
                let (cj, cv) = other.row(i);
                for (&j, &w) in cj.iter().zip(cv) {
                    data[r + j * n] += a * w;
                }
            }
        }
        out
    }

    /// `x · self` for dense `x`.
    pub fn left_mul_dense(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(x.cols(), self.rows, "sparse left mul: inner dimensions differ");
        let mut out = DenseMatrix::zeros(x.rows(), self.cols);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            let xc = x.col(r);
            for (&c, &v) in idx.iter().zip(vals) {
                crate::linalg::dense::axpy(v, xc, out.col_mut(c));
            }
        }
        out
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.abs_sq()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (&c, v) in self.col_idx.iter().zip(&self.values) {
            sums[c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// `self + shift·I` (square only).
    pub fn shifted(&self, shift: f64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut trip: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz() + self.rows);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                trip.push((r, c, v));
            }
            trip.push((r, r, T::from_f64(shift)));
        }
        Self::from_triplets(self.rows, self.cols, &trip).expect("indices valid by construction")
    }
}
