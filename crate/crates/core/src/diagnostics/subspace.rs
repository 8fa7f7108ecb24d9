use std::fmt;

use crate::error::{dim_err, param_err, Result};
use crate::linalg::{qr_econ, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;
use crate::sketch::kron_expand;

/// Tolerance on `‖Q*Q − I‖_F` for inputs declared orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

pub(crate) fn check_orthonormal<T: Scalar>(q: &DenseMatrix<T>) -> Result<()> {
    if q.cols() > q.rows() {
        return Err(dim_err(format!("{}x{} matrix cannot have orthonormal columns", q.rows(), q.cols())));
    }
    let err = q.orthonormality_error();
    if !(err <= ORTHONORMAL_TOL) {
        return Err(param_err(format!("Q is not orthonormal: ‖Q*Q − I‖_F = {err:e}")));
    }
    Ok(())
}

/// `[e₁ ⋯ e_r] ∈ F^{d×r}`.
pub fn adversarial_q<T: Scalar>(d: usize, r: usize) -> Result<DenseMatrix<T>> {
    if r > d {
        return Err(param_err(format!("adversarial Q needs r <= d, got r = {r}, d = {d}")));
    }
    Ok(DenseMatrix::eye(d, r))
}

/// `μ(Q) = maxᵢ ‖eᵢ* Q‖²`.
pub fn coherence<T: Scalar>(q: &DenseMatrix<T>) -> Result<f64> {
    check_orthonormal(q)?;
    let mut rows = vec![0.0f64; q.rows()];
    for j in 0..q.cols() {
        for (acc, x) in rows.iter_mut().zip(q.col(j)) {
            *acc += x.abs_sq();
        }
    }
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Orthonormalized span of `r` Kronecker products `g₁ ⊗ ⋯ ⊗ g_ℓ` of iid Gaussian
/// vectors in `F^{d₀}`. Vector `j` uses `stream.child(j)`.
pub fn kronecker_gaussian_subspace<T: Scalar>(d0: usize, ell: usize, r: usize, stream: &RngStream) -> Result<DenseMatrix<T>> {
    if d0 < 1 || ell < 1 {
        return Err(param_err("Kronecker subspace needs d0, ell >= 1"));
    }
    let d = d0
        .checked_pow(ell as u32)
        .ok_or_else(|| param_err(format!("d0^ell overflows for d0 = {d0}, ell = {ell}")))?;
    if r == 0 || r > d {
        return Err(param_err(format!("Kronecker subspace needs 1 <= r <= {d}, got {r}")));
    }
    let mut data = Vec::with_capacity(d * r);
    for j in 0..r {
        let mut rng = stream.child(j as u64).rng();
        let factors: Vec<Vec<T>> = (0..ell).map(|_| (0..d0).map(|_| normal::<T, _>(&mut rng)).collect()).collect();
        let refs: Vec<&[T]> = factors.iter().map(|f| f.as_slice()).collect();
        data.extend(kron_expand(&refs));
    }
    let g = DenseMatrix::from_col_major(d, r, data)?;
    Ok(qr_econ(&g)?.0)
}

/// First `r` columns of the unitary Walsh–Hadamard matrix of order `2^ℓ`
/// (Sylvester ordering, `H[i, j] = (−1)^{popcount(i ∧ j)} / √d`).
pub fn wht_column_subspace<T: Scalar>(ell: usize, r: usize) -> Result<DenseMatrix<T>> {
    if !(1..=24).contains(&ell) {
        return Err(param_err(format!("WHT subspace needs 1 <= ell <= 24, got {ell}")));
    }
    let d = 1usize << ell;
    if r == 0 || r > d {
        return Err(param_err(format!("WHT subspace needs 1 <= r <= {d}, got {r}")));
    }
    let s = 1.0 / (d as f64).sqrt();
    Ok(DenseMatrix::from_fn(d, r, |i, j| {
        T::from_f64(if (i & j).count_ones() % 2 == 0 { s } else { -s })
    }))
}

/// The protected subspace of an OSI measurement.
#[derive(Debug, Clone)]
pub enum Subspace<T> {
    /// `[e₁ ⋯ e_r]` in dimension `d`; never materialized for sparse test matrices.
    Coordinate { d: usize, r: usize },
    /// Redrawn per trial from the trial stream.
    KroneckerGaussian { d0: usize, ell: usize, r: usize },
    WhtColumns { ell: usize, r: usize },
    /// Must be orthonormal.
    User(DenseMatrix<T>),
}

impl<T: Scalar> Subspace<T> {
    pub fn dim(&self) -> usize {
        match self {
            Subspace::Coordinate { d, .. } => *d,
            Subspace::KroneckerGaussian { d0, ell, .. } => d0.saturating_pow(*ell as u32),
            Subspace::WhtColumns { ell, .. } => 1usize << ell,
            Subspace::User(q) => q.rows(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Subspace::Coordinate { r, .. } | Subspace::KroneckerGaussian { r, .. } | Subspace::WhtColumns { r, .. } => *r,
            Subspace::User(q) => q.cols(),
        }
    }

    pub fn materialize(&self, stream: &RngStream) -> Result<DenseMatrix<T>> {
        match self {
            Subspace::Coordinate { d, r } => adversarial_q(*d, *r),
            Subspace::KroneckerGaussian { d0, ell, r } => kronecker_gaussian_subspace(*d0, *ell, *r, stream),
            Subspace::WhtColumns { ell, r } => wht_column_subspace(*ell, *r),
            Subspace::User(q) => {
                check_orthonormal(q)?;
                Ok(q.clone())
            }
        }
    }
}

impl<T> fmt::Display for Subspace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subspace::Coordinate { .. } => f.write_str("adversarial"),
            Subspace::KroneckerGaussian { d0, .. } => write!(f, "kronecker-gaussian(d0={d0})"),
            Subspace::WhtColumns { .. } => f.write_str("wht-columns"),
            Subspace::User(_) => f.write_str("user"),
        }
    }
}
