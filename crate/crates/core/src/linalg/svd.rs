use crate::error::{Error, Result};
use crate::linalg::dense::{dotc, norm_sq};
use crate::linalg::{qr_econ, DenseMatrix};
use crate::scalar::Scalar;

/// Thin SVD `M = U diag(sigma) V*` with `sigma` nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix<T>,
}

impl<T: Scalar> Svd<T> {
    /// Number of singular values above `rel_tol · σ₁`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.sigma, rel_tol)
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(mut self, r: usize) -> Self {
        let r = r.min(self.sigma.len());
        self.sigma.truncate(r);
        self.u = self.u.columns(0..r);
        self.v = self.v.columns(0..r);
        self
    }

    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let mut us = self.u.clone();
        us.scale_columns(&self.sigma);
        us.mul_adjoint(&self.v)
    }
}

/// Count of `σᵢ > rel_tol · σ₁`.
pub fn numerical_rank(sigma: &[f64], rel_tol: f64) -> usize {
    match sigma.first() {
        None => 0,
        Some(&s1) if s1 <= 0.0 => 0,
        Some(&s1) => sigma.iter().take_while(|&&s| s > rel_tol * s1).count(),
    }
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi on a square matrix; returns `(U, σ, V)` unsorted.
fn jacobi<T: Scalar>(mut g: DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<f64>, DenseMatrix<T>)> {
    let n = g.cols();
    let mut v = DenseMatrix::<T>::identity(n);
    let tol = 4.0 * f64::EPSILON;
    let mut norms: Vec<f64> = (0..n).map(|j| norm_sq(g.col(j))).collect();
    // Columns this far below the largest are roundoff; rotating them only churns subnormals.
    let negligible = norms.iter().fold(0.0f64, |m, &x| m.max(x)) * (f64::MIN_POSITIVE / f64::EPSILON);
    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dotc(g.col(p), g.col(q));
                let gabs = gamma.abs();
                // Separate square roots: `alpha * beta` underflows for tiny columns.
                if gabs < f64::MIN_POSITIVE || gabs <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of γ so the 2×2 problem is real.
                let phase = gamma.phase();
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                {
                    let (gp, gq) = g.two_cols_mut(p, q);
                    for (a, b) in gp.iter_mut().zip(gq.iter_mut()) {
                        let bq = *b * phase.conj();
                        let ap = *a;
                        *a = ap.scale(c) - bq.scale(s);
                        *b = (ap.scale(s) + bq.scale(c)) * phase;
                    }
                }
                {
                    let (vp, vq) = v.two_cols_mut(p, q);
                    for (a, b) in vp.iter_mut().zip(vq.iter_mut()) {
                        let bq = *b * phase.conj();
                        let ap = *a;
                        *a = ap.scale(c) - bq.scale(s);
                        *b = (ap.scale(s) + bq.scale(c)) * phase;
                    }
                }
                norms[p] = norm_sq(g.col(p));
                norms[q] = norm_sq(g.col(q));
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("one-sided Jacobi SVD".into()));
    }
    let sigma: Vec<f64> = norms.iter().map(|s| s.sqrt()).collect();
    Ok((g, sigma, v))
}

/// Orthonormalizes the columns of `u` in the given order, replacing columns
/// that are (numerically) zero by vectors completing the basis.
fn fix_left_vectors<T: Scalar>(u: &mut DenseMatrix<T>, keep: &[bool]) {
    let (n, k) = u.shape();
    let mut next_basis = 0usize;
    for j in 0..k {
        if keep[j] {
            for _pass in 0..2 {
                for i in 0..j {
                    let (ui, uj) = u.two_cols_mut(i, j);
                    let h = dotc(ui, uj);
                    for (a, &b) in uj.iter_mut().zip(ui.iter()) {
                        *a -= b * h;
                    }
                }
            }
            let nrm = norm_sq(u.col(j)).sqrt();
            if nrm > 0.5 {
                for a in u.col_mut(j) {
                    *a = a.scale(1.0 / nrm);
                }
                continue;
            }
        }
        // Complete with the first standard basis vector not yet spanned.
        loop {
            assert!(next_basis < n, "cannot complete an orthonormal basis");
            let col = u.col_mut(j);
            col.iter_mut().for_each(|x| *x = T::zero());
            col[next_basis] = T::one();
            next_basis += 1;
            for _pass in 0..2 {
                for i in 0..j {
                    let (ui, uj) = u.two_cols_mut(i, j);
                    let h = dotc(ui, uj);
                    for (a, &b) in uj.iter_mut().zip(ui.iter()) {
                        *a -= b * h;
                    }
                }
            }
            let nrm = norm_sq(u.col(j)).sqrt();
            if nrm > 1e-3 {
                for a in u.col_mut(j) {
                    *a = a.scale(1.0 / nrm);
                }
                break;
            }
        }
    }
}

fn svd_square<T: Scalar>(r: DenseMatrix<T>) -> Result<Svd<T>> {
    let k = r.cols();
    let (g, sigma, v) = jacobi(r)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let sigma_sorted: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    let smax = sigma_sorted.first().copied().unwrap_or(0.0);
    let mut u = g.select_columns(&order);
    let v = v.select_columns(&order);
    let floor = smax * f64::EPSILON * (k.max(1) as f64);
    let keep: Vec<bool> = sigma_sorted.iter().map(|&s| s > floor && s > 0.0).collect();
    for (j, &s) in sigma_sorted.iter().enumerate() {
        if keep[j] {
            for a in u.col_mut(j) {
                *a = a.scale(1.0 / s);
            }
        }
    }
    fix_left_vectors(&mut u, &keep);
    Ok(Svd {
        u,
        sigma: sigma_sorted,
        v,
    })
}

/// Economy SVD with `min(n, k)` triplets.
///
/// Tall inputs are first reduced by Householder QR; the triangular factor is
/// diagonalized by one-sided Jacobi rotations.
pub fn svd_econ<T: Scalar>(m: &DenseMatrix<T>) -> Result<Svd<T>> {
    m.check_finite()?;
    let (n, k) = m.shape();
    if n < k {
        let t = svd_econ(&m.adjoint())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    if k == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(n, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
        });
    }
    // Bring the largest entry near 1 by a power of two so squared norms stay normal.
    let amax = m.max_abs();
    if amax > 0.0 && !(1e-100..=1e100).contains(&amax) {
        let e = amax.log2().round() as i32;
        let mut w = m.clone();
        w.scale_columns(&vec![2f64.powi(-e); k]);
        let mut s = svd_econ(&w)?;
        s.sigma.iter_mut().for_each(|x| *x *= 2f64.powi(e));
        return Ok(s);
    }
    let (q, r) = qr_econ(m)?;
    let inner = svd_square(r)?;
    Ok(Svd {
        u: q.matmul(&inner.u),
        sigma: inner.sigma,
        v: inner.v,
    })
}

/// Orthonormal basis for `range(Y)`: left singular vectors above `rel_tol · σ₁`.
pub fn orth<T: Scalar>(y: &DenseMatrix<T>, rel_tol: f64) -> Result<DenseMatrix<T>> {
    let svd = svd_econ(y)?;
    let r = svd.numerical_rank(rel_tol);
    Ok(svd.u.columns(0..r))
}
