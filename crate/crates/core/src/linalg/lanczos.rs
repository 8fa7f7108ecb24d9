use crate::error::{dim_err, Error, Result};
use crate::linalg::dense::{axpy, dotc, norm_sq};
use crate::linalg::eig::tridiagonal_eigh;
use crate::scalar::Scalar;

/// Extreme eigenvalues of a self-adjoint operator with residual bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremeEigs {
    pub min: f64,
    pub max: f64,
    /// Some eigenvalue lies within this distance of `min` (resp. `max`).
    pub min_residual: f64,
    pub max_residual: f64,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization for `λ_min` and `λ_max`.
///
/// `op(x, y)` must write `A x` into `y`. Iterates until both Ritz residuals
/// fall below `rel_tol · max|θ|` or the Krylov space is exhausted.
pub fn lanczos_extremes<T: Scalar>(
    n: usize,
    mut op: impl FnMut(&[T], &mut [T]),
    start: &[T],
    rel_tol: f64,
    max_iter: usize,
) -> Result<ExtremeEigs> {
    if start.len() != n {
        return Err(dim_err(format!("start vector has length {}, operator dimension {n}", start.len())));
    }
    if n == 0 {
        return Ok(ExtremeEigs {
            min: 0.0,
            max: 0.0,
            min_residual: 0.0,
            max_residual: 0.0,
            iterations: 0,
        });
    }
    let nrm = norm_sq(start).sqrt();
    if nrm == 0.0 {
        return Err(dim_err("zero Lanczos start vector"));
    }
    let max_iter = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<T>> = vec![start.iter().map(|x| x.scale(1.0 / nrm)).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![T::zero(); n];
    let mut next_check = 16usize;
    loop {
        let m = basis.len();
        op(&basis[m - 1], &mut w);
        let a = dotc(&basis[m - 1], &w).re();
        alpha.push(a);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let h = dotc(q, &w);
                axpy(-h, q, &mut w);
            }
        }
        let b = norm_sq(&w).sqrt();
        let exhausted = m >= max_iter || b <= f64::EPSILON * alpha.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
        if exhausted || m >= next_check {
            let eig = tridiagonal_eigh(&alpha, &beta)?;
            let z = &eig.vectors;
            let last = m - 1;
            let theta_min = eig.values[0];
            let theta_max = eig.values[m - 1];
            let res_min = b * z[(last, 0)].abs();
            let res_max = b * z[(last, m - 1)].abs();
            let scale = theta_min.abs().max(theta_max.abs());
            let done = res_min <= rel_tol * scale && res_max <= rel_tol * scale;
            if done || exhausted {
                if !done && m < n && b > f64::EPSILON * scale {
                    return Err(Error::NoConvergence(format!(
                        "Lanczos after {m} steps: residuals {res_min:e}, {res_max:e}"
                    )));
                }
                return Ok(ExtremeEigs {
                    min: theta_min,
                    max: theta_max,
                    min_residual: res_min,
                    max_residual: res_max,
                    iterations: m,
                });
            }
            next_check = (m + m / 5).max(m + 8);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x.scale(1.0 / b)).collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = DenseMatrix::from_fn(300, 150, |_, _| rng.random::<f64>() - 0.5);
        let a = g.gram();
        let exact = eigvalsh(&a).unwrap();
        let start: Vec<f64> = (0..150).map(|_| rng.random::<f64>() - 0.5).collect();
        let r = lanczos_extremes(150, |x, y| y.copy_from_slice(&a.matvec(x)), &start, 1e-10, 150).unwrap();
        assert!((r.min - exact[0]).abs() <= 1e-8 * exact[149]);
        assert!((r.max - exact[149]).abs() <= 1e-8 * exact[149]);
        assert!(r.min_residual <= 1e-10 * exact[149]);
    }

    #[test]
    fn exhausts_small_space() {
        let d = [1.0, 5.0, -2.0];
        let r = lanczos_extremes(3, |x: &[f64], y: &mut [f64]| {
            for i in 0..3 {
                y[i] = d[i] * x[i];
            }
        }, &[1.0, 1.0, 1.0], 1e-14, 100)
        .unwrap();
        assert!((r.min + 2.0).abs() < 1e-13 && (r.max - 5.0).abs() < 1e-13);
    }
}
