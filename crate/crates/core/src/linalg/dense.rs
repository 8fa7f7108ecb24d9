use std::fmt;
use std::ops::{Index, IndexMut, Range};

use rayon::prelude::*;

use crate::error::{dim_err, Error, Result};
use crate::scalar::Scalar;

/// Column-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:?} ", self.data[i + j * self.rows])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dot product `Σ conj(a_i) b_i` with split accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dotc<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i].conj() * b[i];
        acc[1] += a[i + 1].conj() * b[i + 1];
        acc[2] += a[i + 2].conj() * b[i + 2];
        acc[3] += a[i + 3].conj() * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i].conj() * b[i];
    }
    s
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm_sq<T: Scalar>(x: &[T]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += x[i].abs_sq();
        acc[1] += x[i + 1].abs_sq();
        acc[2] += x[i + 2].abs_sq();
        acc[3] += x[i + 3].abs_sq();
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for v in &x[4 * chunks..] {
        s += v.abs_sq();
    }
    s
}

impl<T: Scalar> DenseMatrix<T> {
    /// Builds a matrix from column-major data, rejecting non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Row-major nested slices, mostly for tests and small fixtures.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(dim_err("ragged rows"));
        }
        let mut data = vec![T::zero(); nrows * ncols];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                data[i + j * nrows] = v;
            }
        }
        Self::from_col_major(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = T::from_f64(d);
        }
        m
    }

    pub fn column_vector(v: &[T]) -> Self {
        DenseMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
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

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Both columns mutably; `a != b`.
    pub(crate) fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [T], &mut [T]) {
        assert!(a != b);
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            (&mut hi[..r], &mut lo[b * r..(b + 1) * r])
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::NonFinite {
                row: pos % self.rows.max(1),
                col: pos / self.rows.max(1),
            }),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                out.data[j + i * self.cols] = v.conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                out.data[j + i * self.cols] = v;
            }
        }
        out
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `self · other`
    pub fn matmul(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let n = self.rows;
        let mut out = Self::zeros(n, other.cols);
        if n == 0 {
            return out;
        }
        // Blocks of output columns share each pass over a column of `self`.
        const BLOCK: usize = 8;
        out.data.par_chunks_mut(BLOCK * n).enumerate().for_each(|(blk, chunk)| {
            let j0 = blk * BLOCK;
            let width = chunk.len() / n;
            for l in 0..self.cols {
                let acol = self.col(l);
                for jj in 0..width {
                    let b = other.data[l + (j0 + jj) * other.rows];
                    if b != T::zero() {
                        axpy(b, acol, &mut chunk[jj * n..(jj + 1) * n]);
                    }
                }
            }
        });
        out
    }

    /// `self* · other`
    pub fn adjoint_mul(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(
            self.rows, other.rows,
            "adjoint_mul: ({}x{})* times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let k = self.cols;
        let mut out = Self::zeros(k, other.cols);
        if k == 0 {
            return out;
        }
        out.data.par_chunks_mut(k).enumerate().for_each(|(j, ocol)| {
            let b = other.col(j);
            for (i, o) in ocol.iter_mut().enumerate() {
                *o = dotc(self.col(i), b);
            }
        });
        out
    }

    /// `self · other*`
    pub fn mul_adjoint(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.cols, other.cols, "mul_adjoint: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.rows);
        for l in 0..self.cols {
            let a = self.col(l);
            let b = other.col(l);
            for (j, &bj) in b.iter().enumerate() {
                let coef = bj.conj();
                if coef != T::zero() {
                    axpy(coef, a, &mut out.data[j * self.rows..(j + 1) * self.rows]);
                }
            }
        }
        out
    }

    /// Hermitian Gram matrix `self* · self`, computed on one triangle.
    pub fn gram(&self) -> DenseMatrix<T> {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dotc(self.col(i), self.col(j));
                out.data[i + j * n] = v;
                out.data[j + i * n] = v.conj();
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![T::zero(); self.rows];
        for (l, &xl) in x.iter().enumerate() {
            if xl != T::zero() {
                axpy(xl, self.col(l), &mut y);
            }
        }
        y
    }

    pub fn fro_norm_sq(&self) -> f64 {
        norm_sq(&self.data)
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Multiplies column `j` by `s[j]`.
    pub fn scale_columns(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.cols);
        for (j, &sj) in s.iter().enumerate() {
            for v in self.col_mut(j) {
                *v = v.scale(sj);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        assert_eq!(self.shape(), other.shape());
        axpy(alpha, &other.data, &mut self.data);
    }

    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols);
        DenseMatrix {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    pub fn rows_range(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.rows);
        let r = range.len();
        let mut out = Self::zeros(r, self.cols);
        for j in 0..self.cols {
            out.col_mut(j).copy_from_slice(&self.col(j)[range.clone()]);
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for (jj, &j) in idx.iter().enumerate() {
            out.col_mut(jj).copy_from_slice(self.col(j));
        }
        out
    }

    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        DenseMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    /// `‖self* self − I‖_F`
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.gram();
        let mut s = 0.0;
        for j in 0..g.cols {
            for i in 0..g.rows {
                let target = if i == j { T::one() } else { T::zero() };
                s += (g[(i, j)] - target).abs_sq();
            }
        }
        s.sqrt()
    }

    /// `max |self_ij − self_ji*|`
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0f64;
        for j in 0..self.cols {
            for i in 0..j {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).abs());
            }
            m = m.max(self[(j, j)].im().abs());
        }
        m
    }

    /// `(self + self*) / 2`
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(0.5))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

/// Relative Frobenius distance `‖a − b‖_F / max(‖b‖_F, tiny)`.
pub fn rel_fro_diff<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> f64 {
    let d = a.sub(b).fro_norm();
    let n = b.fro_norm();
    if n == 0.0 {
        d
    } else {
        d / n
    }
}
