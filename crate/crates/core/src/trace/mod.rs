//! Stochastic trace estimation and the partition-function driver.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{dim_err, param_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::nla::gen_nystrom_outer_sketched;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{Family, TestMatrix};

pub mod experiment;
pub mod expm;
pub mod tfim;

pub use experiment::{partition_function_experiment, trace_rows_table, ExpmMode, PartitionConfig, TraceEstimator, TraceRow, TRACE_SCHEMA};
pub use expm::{expm_dense_hermitian, expm_matvec, ExpmOperator};
pub use tfim::{tfim_hamiltonian, TfimHamiltonian};

/// Square linear operator accessed through block products.
pub trait LinearOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// `A X`
    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;

    /// `A* X`
    fn apply_adjoint(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>>;
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_square_block(self.rows(), self.cols(), x)?;
        Ok(self.matmul(x))
    }
    fn apply_adjoint(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_square_block(self.rows(), self.cols(), x)?;
        Ok(self.adjoint_mul(x))
    }
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_square_block(self.rows(), self.cols(), x)?;
        Ok(self.mul_dense(x))
    }
    fn apply_adjoint(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_square_block(self.rows(), self.cols(), x)?;
        Ok(self.adjoint_mul_dense(x))
    }
}

pub(crate) fn check_square_block<T: Scalar>(rows: usize, cols: usize, x: &DenseMatrix<T>) -> Result<()> {
    if rows != cols {
        return Err(dim_err(format!("operator is {rows}x{cols}, not square")));
    }
    if x.rows() != cols {
        return Err(dim_err(format!("operator of size {cols} applied to a block with {} rows", x.rows())));
    }
    Ok(())
}

/// Wraps an operator and counts every matrix-vector product (one per block column).
pub struct MatvecOracle<'a, T: Scalar> {
    op: &'a dyn LinearOperator<T>,
    count: AtomicUsize,
}

impl<'a, T: Scalar> MatvecOracle<'a, T> {
    pub fn new(op: &'a dyn LinearOperator<T>) -> Self {
        MatvecOracle {
            op,
            count: AtomicUsize::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matvecs(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    pub fn apply(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let y = self.op.apply(x)?;
        self.count.fetch_add(x.cols(), Ordering::Relaxed);
        Ok(y)
    }

    pub fn apply_adjoint(&self, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let y = self.op.apply_adjoint(x)?;
        self.count.fetch_add(x.cols(), Ordering::Relaxed);
        Ok(y)
    }
}

/// `Σⱼ ⟨ωⱼ, yⱼ⟩ = tr(Ω* Y)`
fn trace_of_pairing<T: Scalar>(omega: &DenseMatrix<T>, y: &DenseMatrix<T>) -> T {
    (0..omega.cols())
        .map(|j| omega.col(j).iter().zip(y.col(j)).map(|(a, b)| a.conj() * *b).sum::<T>())
        .sum()
}

/// Girard–Hutchinson `H_t(A) = tr(Ω* A Ω)` with `Ω ∈ F^{n×t}` drawn from `family`.
pub fn girard_hutchinson<T: Scalar>(oracle: &MatvecOracle<'_, T>, t: usize, family: &Family, stream: &RngStream) -> Result<T> {
    if t == 0 {
        return Err(param_err("Girard-Hutchinson needs t >= 1"));
    }
    let tm = family.build::<T>(oracle.dim(), t, stream)?;
    let omega = tm.materialize();
    let y = oracle.apply(&omega)?;
    Ok(trace_of_pairing(&omega, &y))
}

/// Matvec split `(k, p, m)` of NA-Hutch++ for budget `t`.
///
/// `k = ⌊t/6⌋`, `p = ⌊t/3⌋` and the residual estimator gets the remaining `t − k − p`.
/// Below `t = 6` there is no low-rank part and all `t` products go to the residual.
pub fn na_hutch_split(t: usize) -> (usize, usize, usize) {
    let (k, p) = (t / 6, t / 3);
    if k == 0 {
        return (0, 0, t);
    }
    (k, p, t - k - p)
}

/// NA-Hutch++: `tr(Â) + H_{t/2}(A − Â)` with `Â` a rank-`t/6` generalized Nyström
/// approximation built from `Ω ∈ F^{n×t/6}` and `Ψ ∈ F^{n×t/3}`. Uses exactly `t` products.
///
/// When `t` is not a multiple of 6 the sketch sizes round down and the leftover
/// products go to the residual estimator.
pub fn na_hutch_pp<T: Scalar>(oracle: &MatvecOracle<'_, T>, t: usize, family: &Family, stream: &RngStream) -> Result<T> {
    if t == 0 {
        return Err(param_err("NA-Hutch++ needs t >= 1"));
    }
    if t % 6 != 0 {
        log::warn!("NA-Hutch++ budget t = {t} is not a multiple of 6; rounding the sketch sizes down");
    }
    let n = oracle.dim();
    let (k, p, m) = na_hutch_split(t);
    let mut estimate = T::zero();
    let mut factors = None;
    if k > 0 {
        let tm_omega = family.build::<T>(n, k, &stream.child(0))?;
        let tm_psi = family.build::<T>(n, p, &stream.child(1))?;
        let y = oracle.apply(&tm_omega.materialize())?;
        let x = oracle.apply_adjoint(&tm_psi.materialize())?;
        let approx = gen_nystrom_outer_sketched(y, &x, tm_omega.as_ref())?;
        estimate += approx.trace();
        factors = Some(approx.factors());
    }
    let tm_phi = family.build::<T>(n, m, &stream.child(2))?;
    let phi = tm_phi.materialize();
    let mut z = oracle.apply(&phi)?;
    if let Some((f, g)) = &factors {
        z.add_scaled(-T::one(), &f.matmul(&g.adjoint_mul(&phi)));
    }
    estimate += trace_of_pairing(&phi, &z);
    Ok(estimate)
}
