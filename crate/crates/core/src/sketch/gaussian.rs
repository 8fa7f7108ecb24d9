use rayon::prelude::*;

use crate::error::{param_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;
use crate::sketch::{check_adjoint, check_apply, check_right, TestMatrix};

/// Dense Gaussian test matrix with iid `N(0, 1/k)` entries (complex: circular).
#[derive(Debug, Clone)]
pub struct GaussianTM<T> {
    omega: DenseMatrix<T>,
}

impl<T: Scalar> GaussianTM<T> {
    /// Column `j` is drawn from the sub-stream `stream.child(j)`.
    pub fn new(d: usize, k: usize, stream: &RngStream) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(param_err("Gaussian test matrix needs d, k >= 1"));
        }
        let scale = 1.0 / (k as f64).sqrt();
        let mut data = vec![T::zero(); d * k];
        data.par_chunks_mut(d).enumerate().for_each(|(j, col)| {
            let mut rng = stream.child(j as u64).rng();
            for x in col.iter_mut() {
                *x = normal::<T, _>(&mut rng).scale(scale);
            }
        });
        Ok(GaussianTM {
            omega: DenseMatrix::from_col_major(d, k, data)?,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.omega
    }
}

impl<T: Scalar> TestMatrix<T> for GaussianTM<T> {
    fn d(&self) -> usize {
        self.omega.rows()
    }

    fn k(&self) -> usize {
        self.omega.cols()
    }

    fn label(&self) -> String {
        "gaussian".into()
    }

    fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_adjoint(self.d(), b.rows())?;
        Ok(self.omega.adjoint_mul(b))
    }

    fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_apply(self.k(), c.rows())?;
        Ok(self.omega.matmul(c))
    }

    fn apply_right(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d(), a.cols())?;
        Ok(a.matmul(&self.omega))
    }

    fn apply_right_sparse(&self, a: &CsrMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d(), a.cols())?;
        Ok(a.mul_dense(&self.omega))
    }

    fn materialize(&self) -> DenseMatrix<T> {
        self.omega.clone()
    }
}
