use crate::error::{dim_err, Result};
use crate::linalg::{svd_econ, DenseMatrix, Svd};
use crate::scalar::{Scalar, EPS_MACH};

/// Default relative cut for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 5.0 * EPS_MACH;

/// `V_r Σ_r⁻¹ U_r* B` from a precomputed SVD, keeping `σᵢ > rel_tol · σ₁`.
pub fn pinv_apply_svd<T: Scalar>(svd: &Svd<T>, b: &DenseMatrix<T>, rel_tol: f64) -> Result<DenseMatrix<T>> {
    if svd.u.rows() != b.rows() {
        return Err(dim_err(format!(
            "pseudoinverse of a {}-row matrix applied to {} rows",
            svd.u.rows(),
            b.rows()
        )));
    }
    let r = svd.numerical_rank(rel_tol);
    if r == 0 {
        return Ok(DenseMatrix::zeros(svd.v.rows(), b.cols()));
    }
    let ur = svd.u.columns(0..r);
    let mut core = ur.adjoint_mul(b);
    for j in 0..core.cols() {
        for (i, x) in core.col_mut(j).iter_mut().enumerate() {
            *x = x.scale(1.0 / svd.sigma[i]);
        }
    }
    Ok(svd.v.columns(0..r).matmul(&core))
}

/// Truncated pseudoinverse solve `M† B` discarding `σᵢ ≤ rel_tol · σ₁`.
pub fn truncated_pinv_apply<T: Scalar>(m: &DenseMatrix<T>, b: &DenseMatrix<T>, rel_tol: f64) -> Result<DenseMatrix<T>> {
    if m.rows() != b.rows() {
        return Err(dim_err(format!("M is {}x{} but B has {} rows", m.rows(), m.cols(), b.rows())));
    }
    let svd = svd_econ(m)?;
    pinv_apply_svd(&svd, b, rel_tol)
}
