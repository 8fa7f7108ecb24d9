//! Random test matrices `Ω ∈ F^{d×k}` and their fast apply paths.

use std::fmt;

use crate::error::{dim_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;

pub mod dist;
pub mod family;
pub mod gaussian;
pub mod khatri_rao;
pub mod rtt;
pub mod sparse;
pub mod transforms;

pub use dist::{BaseDist, SignDist};
pub use family::Family;
pub use gaussian::GaussianTM;
pub use khatri_rao::{kron_expand, kron_inner, KhatriRaoTM};
pub use rtt::SparseRttTM;
pub use sparse::{SparseColTM, SparseIidTM, SparseStackTM, SparseUniformTM};
pub use transforms::{dct2_ortho, dft_unitary, wht, Transform, TransformKind};

/// A random sketching operator `Ω ∈ F^{d×k}`.
///
/// Every apply path agrees with the dense product against [`materialize`](TestMatrix::materialize).
pub trait TestMatrix<T: Scalar>: Send + Sync + fmt::Debug {
    /// Ambient dimension (rows of `Ω`).
    fn d(&self) -> usize;

    /// Embedding dimension (columns of `Ω`).
    fn k(&self) -> usize;

    fn label(&self) -> String;

    /// `Ω* B` for `B ∈ F^{d×m}`.
    fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    /// `Ω C` for `C ∈ F^{k×m}`.
    fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    /// `A Ω` for dense `A ∈ F^{n×d}`.
    fn apply_right(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d(), a.cols())?;
        Ok(self.apply_adjoint(&a.adjoint())?.adjoint())
    }

    /// `A Ω` for sparse `A ∈ F^{n×d}`.
    fn apply_right_sparse(&self, a: &CsrMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d(), a.cols())?;
        self.apply_right(&a.to_dense())
    }

    /// Explicit `Ω`; intended for diagnostics and oracles.
    fn materialize(&self) -> DenseMatrix<T> {
        self.apply(&DenseMatrix::identity(self.k())).expect("identity has matching shape")
    }

    /// The CSR form of `Ω` when the family stores one.
    fn as_sparse(&self) -> Option<&CsrMatrix<T>> {
        None
    }
}

pub(crate) fn check_right(d: usize, cols: usize) -> Result<()> {
    if cols != d {
        return Err(dim_err(format!("A has {cols} columns but the test matrix has d = {d}")));
    }
    Ok(())
}

pub(crate) fn check_adjoint(d: usize, rows: usize) -> Result<()> {
    if rows != d {
        return Err(dim_err(format!("B has {rows} rows but the test matrix has d = {d}")));
    }
    Ok(())
}

pub(crate) fn check_apply(k: usize, rows: usize) -> Result<()> {
    if rows != k {
        return Err(dim_err(format!("C has {rows} rows but the test matrix has k = {k}")));
    }
    Ok(())
}

/// `Ω* x` for a single vector.
pub fn apply_adjoint_vec<T: Scalar>(tm: &dyn TestMatrix<T>, x: &[T]) -> Result<Vec<T>> {
    Ok(tm.apply_adjoint(&DenseMatrix::column_vector(x))?.into_data())
}

impl<T: Scalar, M: TestMatrix<T> + ?Sized> TestMatrix<T> for Box<M> {
    fn d(&self) -> usize {
        (**self).d()
    }
    fn k(&self) -> usize {
        (**self).k()
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply_adjoint(b)
    }
    fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply(c)
    }
    fn apply_right(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply_right(a)
    }
    fn apply_right_sparse(&self, a: &CsrMatrix<T>) -> Result<DenseMatrix<T>> {
        (**self).apply_right_sparse(a)
    }
    fn materialize(&self) -> DenseMatrix<T> {
        (**self).materialize()
    }
    fn as_sparse(&self) -> Option<&CsrMatrix<T>> {
        (**self).as_sparse()
    }
}
