//! Sketching algorithms: randomized SVD, Nyström, generalized Nyström,
//! sketch-and-solve, and matrix recovery from bilinear queries.

use crate::error::{dim_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;
use crate::sketch::TestMatrix;

pub mod lowrank;
pub mod lsq;
pub mod orthogonality;
pub mod recovery;

pub use lowrank::{gen_nystrom_outer, gen_nystrom_outer_sketched, gen_nystrom_svd, nystrom_psd, rsvd, NystromOptions};
pub use lsq::sketch_and_solve;
pub use orthogonality::{osi_orthogonality_statistic, OrthogonalityStat};
pub use recovery::{matrix_recovery, toeplitz, toeplitz_basis, Recovery};

/// An input matrix, dense or sparse.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a, T> {
    Dense(&'a DenseMatrix<T>),
    Sparse(&'a CsrMatrix<T>),
}

impl<'a, T> From<&'a DenseMatrix<T>> for Operand<'a, T> {
    fn from(a: &'a DenseMatrix<T>) -> Self {
        Operand::Dense(a)
    }
}

impl<'a, T> From<&'a CsrMatrix<T>> for Operand<'a, T> {
    fn from(a: &'a CsrMatrix<T>) -> Self {
        Operand::Sparse(a)
    }
}

impl<T: Scalar> Operand<'_, T> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Operand::Dense(a) => a.shape(),
            Operand::Sparse(a) => (a.rows(), a.cols()),
        }
    }

    pub fn fro_norm(&self) -> f64 {
        match self {
            Operand::Dense(a) => a.fro_norm(),
            Operand::Sparse(a) => a.fro_norm(),
        }
    }

    /// `A Ω`
    pub fn sketch(&self, tm: &dyn TestMatrix<T>) -> Result<DenseMatrix<T>> {
        match self {
            Operand::Dense(a) => tm.apply_right(a),
            Operand::Sparse(a) => tm.apply_right_sparse(a),
        }
    }

    /// `A* Ψ`
    pub fn sketch_adjoint(&self, tm: &dyn TestMatrix<T>) -> Result<DenseMatrix<T>> {
        match self {
            Operand::Dense(a) => tm.apply_right(&a.adjoint()),
            Operand::Sparse(a) => tm.apply_right_sparse(&a.adjoint()),
        }
    }

    /// `Ψ* A`
    pub fn sketch_left(&self, tm: &dyn TestMatrix<T>) -> Result<DenseMatrix<T>> {
        match self {
            Operand::Dense(a) => tm.apply_adjoint(a),
            Operand::Sparse(a) => Ok(tm.apply_right_sparse(&a.adjoint())?.adjoint()),
        }
    }

    /// `A X`
    pub fn mul(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.shape().1 != x.rows() {
            return Err(dim_err(format!("A is {:?} but X has {} rows", self.shape(), x.rows())));
        }
        Ok(match self {
            Operand::Dense(a) => a.matmul(x),
            Operand::Sparse(a) => a.mul_dense(x),
        })
    }

    /// `Q* A`
    pub fn adjoint_mul_left(&self, q: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if self.shape().0 != q.rows() {
            return Err(dim_err(format!("A is {:?} but Q has {} rows", self.shape(), q.rows())));
        }
        Ok(match self {
            Operand::Dense(a) => q.adjoint_mul(a),
            Operand::Sparse(a) => a.adjoint_mul_dense(q).adjoint(),
        })
    }
}

/// Power-iteration estimate of `‖Y‖₂`.
pub fn spectral_norm_est<T: Scalar>(y: &DenseMatrix<T>, iters: usize, stream: &RngStream) -> f64 {
    let k = y.cols();
    if k == 0 || y.rows() == 0 {
        return 0.0;
    }
    let mut rng = stream.rng();
    let mut v: Vec<T> = (0..k).map(|_| normal(&mut rng)).collect();
    let mut est = 0.0;
    for _ in 0..iters.max(1) {
        let nv = v.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
        if nv == 0.0 {
            return est;
        }
        v.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
        let w = y.matvec(&v);
        est = w.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
        v = y.adjoint_mul(&DenseMatrix::column_vector(&w)).into_data();
    }
    est
}
