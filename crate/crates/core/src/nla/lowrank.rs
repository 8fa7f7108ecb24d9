use crate::error::{dim_err, param_err, Error, Result};
use crate::linalg::{cholesky_upper, orth, qr_econ, solve_upper_right, svd_econ, DenseMatrix, LowRank, DEFAULT_RANK_TOL};
use crate::nla::{spectral_norm_est, Operand};
use crate::rng::RngStream;
use crate::scalar::{Scalar, EPS_MACH};
use crate::sketch::dist::normal;
use crate::sketch::TestMatrix;

fn check_rank_param(k: usize, n: usize, d: usize) -> Result<()> {
    if k == 0 || k > n.min(d) {
        return Err(param_err(format!("sketch size k = {k} must lie in 1..=min(n, d) = {}", n.min(d))));
    }
    Ok(())
}

/// Randomized SVD `Â = U Σ V*` with `range(U) = range(AΩ)`.
///
/// Dependent sketch columns are dropped, so the returned rank can be below `k`.
pub fn rsvd<'a, T: Scalar>(a: impl Into<Operand<'a, T>>, tm: &dyn TestMatrix<T>) -> Result<LowRank<T>> {
    let a = a.into();
    let (n, d) = a.shape();
    if tm.d() != d {
        return Err(dim_err(format!("test matrix has d = {} but A has {d} columns", tm.d())));
    }
    check_rank_param(tm.k(), n, d)?;
    let y = a.sketch(tm)?;
    let q = orth(&y, DEFAULT_RANK_TOL)?;
    let b = a.adjoint_mul_left(&q)?;
    let svd = svd_econ(&b)?;
    Ok(LowRank::Svd {
        u: q.matmul(&svd.u),
        sigma: svd.sigma,
        v: svd.v,
    })
}

/// Knobs for [`nystrom_psd`].
#[derive(Debug, Clone)]
pub struct NystromOptions {
    /// Power iterations for the `‖Y‖₂` estimate in the shift.
    pub power_iters: usize,
    /// Times the shift is multiplied by 10 after a failed Cholesky.
    pub max_retries: usize,
    /// Sampled quadratic forms for the psd check (0 skips it).
    pub psd_checks: usize,
    pub psd_tol: f64,
    pub seed: u64,
}

impl Default for NystromOptions {
    fn default() -> Self {
        NystromOptions {
            power_iters: 20,
            max_retries: 3,
            psd_checks: 4,
            psd_tol: 1e-8,
            seed: 0x6e79_7374,
        }
    }
}

fn check_psd<T: Scalar>(a: &Operand<'_, T>, opts: &NystromOptions) -> Result<()> {
    let n = a.shape().0;
    let scale = a.fro_norm();
    let mut rng = RngStream::new(opts.seed).child(1).rng();
    for _ in 0..opts.psd_checks {
        let x: Vec<T> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<T> = (0..n).map(|_| normal(&mut rng)).collect();
        let xy = DenseMatrix::from_col_major(n, 2, x.iter().chain(&y).copied().collect())?;
        let ay = a.mul(&xy)?;
        let nx = x.iter().map(|v| v.abs_sq()).sum::<f64>();
        let ny = y.iter().map(|v| v.abs_sq()).sum::<f64>();
        let dot = |u: &[T], w: &[T]| u.iter().zip(w).map(|(p, q)| p.conj() * *q).sum::<T>();
        let xax = dot(&x, ay.col(0));
        let xay = dot(&x, ay.col(1));
        let yax = dot(&y, ay.col(0));
        let tol = opts.psd_tol * scale;
        if (xay - yax.conj()).abs() > tol * (nx * ny).sqrt() {
            return Err(param_err("Nyström input is not self-adjoint"));
        }
        if xax.re() < -tol * nx {
            return Err(param_err(format!("Nyström input is not psd: x*Ax/‖x‖² = {}", xax.re() / nx)));
        }
    }
    Ok(())
}

/// Shifted Nyström approximation `Â = U Λ U*` of a psd matrix.
///
/// The shift `ν = √n ε ‖AΩ‖₂` is multiplied by 10 when the Cholesky factorization
/// of `Ω*(AΩ + νΩ)` fails, up to `max_retries` times.
pub fn nystrom_psd<'a, T: Scalar>(a: impl Into<Operand<'a, T>>, tm: &dyn TestMatrix<T>, opts: &NystromOptions) -> Result<LowRank<T>> {
    let a = a.into();
    let (n, d) = a.shape();
    if n != d || tm.d() != n {
        return Err(dim_err(format!("Nyström needs a square A matching the test matrix: A {n}x{d}, d = {}", tm.d())));
    }
    let k = tm.k();
    check_rank_param(k, n, d)?;
    check_psd(&a, opts)?;
    let y = a.sketch(tm)?;
    let omega = tm.materialize();
    if y.max_abs() == 0.0 {
        // Y (Ω*Y)† Y* = 0.
        return Ok(LowRank::Eig {
            u: DenseMatrix::zeros(n, 0),
            lambda: Vec::new(),
        });
    }
    let mut nu = (n as f64).sqrt() * EPS_MACH * spectral_norm_est(&y, opts.power_iters, &RngStream::new(opts.seed));
    let mut attempt = 0;
    let (y_nu, c) = loop {
        let mut y_nu = y.clone();
        y_nu.add_scaled(T::from_f64(nu), &omega);
        let core = tm.apply_adjoint(&y_nu)?.hermitian_part();
        match cholesky_upper(&core) {
            Ok(c) => break (y_nu, c),
            Err(Error::PositiveDefiniteness { .. }) if attempt < opts.max_retries => {
                attempt += 1;
                nu *= 10.0;
            }
            Err(e) => return Err(e),
        }
    };
    let b = solve_upper_right(&y_nu, &c)?;
    let svd = svd_econ(&b)?.truncate(k);
    let lambda = svd.sigma.iter().map(|s| (s * s - nu).max(0.0)).collect();
    Ok(LowRank::Eig { u: svd.u, lambda })
}

fn check_gen<T: Scalar>(a: &Operand<'_, T>, tm_omega: &dyn TestMatrix<T>, tm_psi: &dyn TestMatrix<T>) -> Result<()> {
    let (n, d) = a.shape();
    if tm_omega.d() != d || tm_psi.d() != n {
        return Err(dim_err(format!(
            "A is {n}x{d} but Ω has d = {} and Ψ has d = {}",
            tm_omega.d(),
            tm_psi.d()
        )));
    }
    let (k, p) = (tm_omega.k(), tm_psi.k());
    if k == 0 || k > p || p > n.min(d) {
        return Err(param_err(format!("generalized Nyström needs 1 <= k <= p <= min(n, d); got k = {k}, p = {p}")));
    }
    Ok(())
}

/// Generalized Nyström `Â = F G* = AΩ (Ψ*AΩ)† Ψ*A` in outer-product form.
pub fn gen_nystrom_outer<'a, T: Scalar>(
    a: impl Into<Operand<'a, T>>,
    tm_omega: &dyn TestMatrix<T>,
    tm_psi: &dyn TestMatrix<T>,
) -> Result<LowRank<T>> {
    let a = a.into();
    check_gen(&a, tm_omega, tm_psi)?;
    let y = a.sketch(tm_omega)?;
    let x = a.sketch_adjoint(tm_psi)?;
    gen_nystrom_outer_sketched(y, &x, tm_omega)
}

/// Outer-product generalized Nyström from precomputed sketches `Y = AΩ`, `X = A*Ψ`.
pub fn gen_nystrom_outer_sketched<T: Scalar>(y: DenseMatrix<T>, x: &DenseMatrix<T>, tm_omega: &dyn TestMatrix<T>) -> Result<LowRank<T>> {
    if y.cols() != tm_omega.k() || x.rows() != tm_omega.d() {
        return Err(dim_err("sketch shapes do not match the test matrix"));
    }
    let svd = svd_econ(&tm_omega.apply_adjoint(x)?.adjoint())?;
    let r = svd.numerical_rank(DEFAULT_RANK_TOL);
    let svd = svd.truncate(r);
    let mut vs = svd.v.clone();
    vs.scale_columns(&svd.sigma.iter().map(|s| 1.0 / s).collect::<Vec<_>>());
    Ok(LowRank::OuterProduct {
        f: y.matmul(&vs),
        g: x.matmul(&svd.u),
    })
}

/// Generalized Nyström in SVD form; same approximation as [`gen_nystrom_outer`].
pub fn gen_nystrom_svd<'a, T: Scalar>(
    a: impl Into<Operand<'a, T>>,
    tm_omega: &dyn TestMatrix<T>,
    tm_psi: &dyn TestMatrix<T>,
) -> Result<LowRank<T>> {
    let a = a.into();
    check_gen(&a, tm_omega, tm_psi)?;
    let y = a.sketch(tm_omega)?;
    let x = a.sketch_adjoint(tm_psi)?;
    let (q, _) = qr_econ(&y)?;
    let (p, t) = qr_econ(&x)?;
    let s1 = svd_econ(&tm_psi.apply_adjoint(&q)?)?;
    let r = s1.numerical_rank(DEFAULT_RANK_TOL);
    let s1 = s1.truncate(r);
    // C = V₁ Σ₁⁻¹ U₁* T*
    let mut core = s1.u.adjoint_mul(&t.adjoint());
    for j in 0..core.cols() {
        for (i, v) in core.col_mut(j).iter_mut().enumerate() {
            *v = v.scale(1.0 / s1.sigma[i]);
        }
    }
    let c = s1.v.matmul(&core);
    let inner = svd_econ(&c)?;
    Ok(LowRank::Svd {
        u: q.matmul(&inner.u),
        sigma: inner.sigma,
        v: p.matmul(&inner.v),
    })
}
