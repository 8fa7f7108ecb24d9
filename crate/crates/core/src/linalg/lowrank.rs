use crate::error::{dim_err, Result};
use crate::linalg::{eigvalsh, CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;

/// Low-rank approximation `Â` in one of three factored forms.
#[derive(Debug, Clone)]
pub enum LowRank<T> {
    /// `Â = F G*`
    OuterProduct { f: DenseMatrix<T>, g: DenseMatrix<T> },
    /// `Â = U diag(σ) V*`
    Svd { u: DenseMatrix<T>, sigma: Vec<f64>, v: DenseMatrix<T> },
    /// `Â = U diag(λ) U*`
    Eig { u: DenseMatrix<T>, lambda: Vec<f64> },
}

impl<T: Scalar> LowRank<T> {
    pub fn rank(&self) -> usize {
        match self {
            LowRank::OuterProduct { f, .. } => f.cols(),
            LowRank::Svd { sigma, .. } => sigma.len(),
            LowRank::Eig { lambda, .. } => lambda.len(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            LowRank::OuterProduct { f, g } => (f.rows(), g.rows()),
            LowRank::Svd { u, v, .. } => (u.rows(), v.rows()),
            LowRank::Eig { u, .. } => (u.rows(), u.rows()),
        }
    }

    /// Left and right factors `(L, R)` with `Â = L R*`.
    pub fn factors(&self) -> (DenseMatrix<T>, DenseMatrix<T>) {
        match self {
            LowRank::OuterProduct { f, g } => (f.clone(), g.clone()),
            LowRank::Svd { u, sigma, v } => {
                let mut us = u.clone();
                us.scale_columns(sigma);
                (us, v.clone())
            }
            LowRank::Eig { u, lambda } => {
                let mut ul = u.clone();
                ul.scale_columns(lambda);
                (ul, u.clone())
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let (l, r) = self.factors();
        l.mul_adjoint(&r)
    }

    /// `Â X`
    pub fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let (l, r) = self.factors();
        l.matmul(&r.adjoint_mul(x))
    }

    /// `Â* X`
    pub fn apply_adjoint(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let (l, r) = self.factors();
        r.matmul(&l.adjoint_mul(x))
    }

    /// `tr Â` for square `Â`, computed as `tr(R* L)` without forming `Â`.
    pub fn trace(&self) -> T {
        match self {
            LowRank::Eig { lambda, .. } => T::from_f64(lambda.iter().sum()),
            _ => {
                let (l, r) = self.factors();
                r.adjoint_mul(&l).trace()
            }
        }
    }

    /// Orthonormality defect of the declared orthonormal factors (0 for outer-product form).
    pub fn orthonormality_error(&self) -> f64 {
        match self {
            LowRank::OuterProduct { .. } => 0.0,
            LowRank::Svd { u, v, .. } => u.orthonormality_error().max(v.orthonormality_error()),
            LowRank::Eig { u, .. } => u.orthonormality_error(),
        }
    }

    /// `‖A − Â‖_F` against a dense target.
    pub fn residual_fro(&self, a: &DenseMatrix<T>) -> Result<f64> {
        if a.shape() != self.shape() {
            return Err(dim_err(format!("target {:?} vs approximation {:?}", a.shape(), self.shape())));
        }
        Ok(a.sub(&self.to_dense()).fro_norm())
    }

    /// `‖A − Â‖_F` against a sparse target.
    pub fn residual_fro_sparse(&self, a: &CsrMatrix<T>) -> Result<f64> {
        if (a.rows(), a.cols()) != self.shape() {
            return Err(dim_err("sparse target shape differs from approximation"));
        }
        let mut d = self.to_dense().scaled(-T::one());
        for r in 0..a.rows() {
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.col_mut(c)[r] += v;
            }
        }
        Ok(d.fro_norm())
    }

    /// Nuclear norm `‖A − Â‖_*` for a self-adjoint target and approximation.
    pub fn residual_nuclear_hermitian(&self, a: &DenseMatrix<T>) -> Result<f64> {
        if a.shape() != self.shape() {
            return Err(dim_err("target shape differs from approximation"));
        }
        let diff = a.sub(&self.to_dense()).hermitian_part();
        Ok(eigvalsh(&diff)?.iter().map(|l| l.abs()).sum())
    }
}

/// `‖(I − UU*) diag(δ)‖_F` for orthonormal `U`.
///
/// Columns whose row of `U` carries most of the mass are formed explicitly so
/// that residuals far below `‖δ‖·ε` stay accurate.
pub fn projection_residual_diag<T: Scalar>(u: &DenseMatrix<T>, diag: &[f64]) -> Result<f64> {
    let (n, k) = u.shape();
    if diag.len() != n {
        return Err(dim_err(format!("U has {n} rows, diagonal has {}", diag.len())));
    }
    let mut total = 0.0;
    let mut col = vec![T::zero(); n];
    for (j, &dj) in diag.iter().enumerate() {
        if dj == 0.0 {
            continue;
        }
        let row: Vec<T> = (0..k).map(|c| u.col(c)[j]).collect();
        let mass: f64 = row.iter().map(|x| x.abs_sq()).sum();
        let s = if mass < 0.5 {
            1.0 - mass
        } else {
            // (I − UU*) e_j = e_j − U conj(u_j)
            col.iter_mut().for_each(|x| *x = T::zero());
            col[j] = T::one();
            for (c, &x) in row.iter().enumerate() {
                let coef = x.conj();
                for (ci, &uc) in col.iter_mut().zip(u.col(c)) {
                    *ci -= uc * coef;
                }
            }
            col.iter().map(|x| x.abs_sq()).sum()
        };
        total += dj * dj * s;
    }
    Ok(total.sqrt())
}
