use rayon::prelude::*;

use crate::error::{param_err, Error, Result};
use crate::linalg::{eigh, CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;
use crate::trace::{check_square_block, LinearOperator};

/// Per-step norm target for the scaling: `‖β(H − μI)‖₁ / s ≤ THETA`.
const THETA: f64 = 3.5;
const MAX_DEGREE: usize = 2000;
const TOL: f64 = f64::EPSILON / 2.0;

fn max_col_norm<T: Scalar>(x: &[T], n: usize) -> f64 {
    x.chunks(n)
        .map(|c| c.iter().map(|v| v.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// `exp(−β(H + bI)) V` by truncated Taylor series with scaling.
///
/// `H` is centered at its mean diagonal, the norm `‖β(H − μI)‖₁` fixes the
/// number of steps `s`, and each step sums Taylor terms of `exp(−β(H − μI)/s)`
/// until two consecutive terms fall below unit roundoff relative to the sum.
pub fn expm_matvec<T: Scalar>(h: &CsrMatrix<T>, beta: f64, shift: f64, v: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !(beta > 0.0 && beta.is_finite()) || !shift.is_finite() {
        return Err(param_err(format!("expm_matvec needs finite beta > 0 and a finite shift (beta = {beta})")));
    }
    let n = h.rows();
    check_square_block(n, h.cols(), v)?;
    if n == 0 || v.cols() == 0 {
        return Ok(v.clone());
    }
    let mu = (0..n).map(|i| h.get(i, i).re()).sum::<f64>() / n as f64;
    let centered = h.shifted(-mu);
    let norm = beta * centered.norm_one();
    let steps = ((norm / THETA).ceil() as usize).max(1);
    let eta = (-beta * (shift + mu) / steps as f64).exp();
    let a = centered.scaled(T::from_f64(-beta / steps as f64));
    // Columns are independent; chunk them across workers.
    let chunk = v.cols().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let mut out = v.clone();
    out.data_mut().par_chunks_mut(n * chunk).try_for_each(|block| -> Result<()> {
        let m = block.len() / n;
        let mut f = DenseMatrix::from_col_major(n, m, block.to_vec())?;
        for _ in 0..steps {
            let mut b = f.clone();
            let mut prev = f64::INFINITY;
            let mut converged = false;
            for j in 1..=MAX_DEGREE {
                b = a.mul_dense(&b).scaled(T::from_f64(1.0 / j as f64));
                f.add_scaled(T::one(), &b);
                let cur = max_col_norm(b.data(), n);
                if cur + prev <= TOL * max_col_norm(f.data(), n) {
                    converged = true;
                    break;
                }
                prev = cur;
            }
            if !converged {
                return Err(Error::NoConvergence(format!("Taylor series did not converge within degree {MAX_DEGREE}")));
            }
            f.scale_in_place(T::from_f64(eta));
        }
        block.copy_from_slice(f.data());
        Ok(())
    })?;
    Ok(out)
}

/// `exp(−β(H + bI))` for a dense Hermitian `H` via its eigendecomposition.
pub fn expm_dense_hermitian<T: Scalar>(h: &DenseMatrix<T>, beta: f64, shift: f64) -> Result<DenseMatrix<T>> {
    let e = eigh(h)?;
    Ok(e.apply_fn(|l| (-beta * (l + shift)).exp()))
}

/// The operator `exp(−β(H + bI))` for Hermitian `H`.
#[derive(Debug, Clone)]
pub enum ExpmOperator<T> {
    /// Each product runs [`expm_matvec`].
    Taylor { h: CsrMatrix<T>, beta: f64, shift: f64 },
    /// The exponential formed once from a full eigendecomposition.
    Dense(DenseMatrix<T>),
}

impl<T: Scalar> ExpmOperator<T> {
    pub fn taylor(h: CsrMatrix<T>, beta: f64, shift: f64) -> Result<Self> {
        if h.rows() != h.cols() {
            return Err(param_err("exponential needs a square H"));
        }
        Ok(ExpmOperator::Taylor { h, beta, shift })
    }

    /// Dense mode; intended for `n` up to a few thousand.
    pub fn dense(h: &CsrMatrix<T>, beta: f64, shift: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(param_err("beta must be positive and finite"));
        }
        Ok(ExpmOperator::Dense(expm_dense_hermitian(&h.to_dense(), beta, shift)?))
    }
}

impl<T: Scalar> LinearOperator<T> for ExpmOperator<T> {
    fn dim(&self) -> usize {
        match self {
            ExpmOperator::Taylor { h, .. } => h.rows(),
            ExpmOperator::Dense(m) => m.rows(),
        }
    }

    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        match self {
            ExpmOperator::Taylor { h, beta, shift } => expm_matvec(h, *beta, *shift, x),
            ExpmOperator::Dense(m) => m.apply(x),
        }
    }

    // exp of a Hermitian matrix with real β is Hermitian.
    fn apply_adjoint(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.apply(x)
    }
}
