use crate::error::{dim_err, Result};
use crate::linalg::dense::{dotc, norm_sq};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Householder reflector `H = I − τ v v*` with `H x = β e₁`.
///
/// `x` is first rescaled by a power of two so that `‖v‖²` neither under- nor overflows;
/// the reflector does not depend on the scale of `v`.
fn householder<T: Scalar>(x: &mut [T]) -> (f64, T) {
    let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amax == 0.0 {
        return (0.0, T::zero());
    }
    let e = amax.log2().floor().max(-1020.0) as i32;
    let down = 2f64.powi(-e);
    x.iter_mut().for_each(|v| *v = v.scale(down));
    let alpha = norm_sq(x).sqrt();
    let x0 = x[0];
    let beta = -(x0.phase().scale(alpha));
    x[0] = x0 - beta;
    let vnorm = norm_sq(x);
    (2.0 / vnorm, beta.scale(2f64.powi(e)))
}

/// Applies `I − τ v v*` to `col` in place.
#[inline]
fn reflect<T: Scalar>(v: &[T], tau: f64, col: &mut [T]) {
    let w = dotc(v, col).scale(tau);
    if w != T::zero() {
        for (c, &vi) in col.iter_mut().zip(v) {
            *c -= vi * w;
        }
    }
}

/// Economy QR by Householder reflections.
///
/// `M = Q R` with `Q` n×k orthonormal and `R` k×k upper triangular with a
/// nonnegative real diagonal. Requires `n ≥ k`.
pub fn qr_econ<T: Scalar>(m: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let (n, k) = m.shape();
    if n < k {
        return Err(dim_err(format!("qr_econ needs rows >= cols, got {n}x{k}")));
    }
    m.check_finite()?;
    let mut a = m.clone();
    let mut taus = Vec::with_capacity(k);
    let mut betas = Vec::with_capacity(k);
    for j in 0..k {
        let (tau, beta) = {
            let col = &mut a.col_mut(j)[j..];
            householder(col)
        };
        taus.push(tau);
        betas.push(beta);
        if tau != 0.0 {
            for c in j + 1..k {
                let (vcol, ccol) = a.two_cols_mut(j, c);
                reflect(&vcol[j..], tau, &mut ccol[j..]);
            }
        }
    }

    let mut r = DenseMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..j {
            r[(i, j)] = a[(i, j)];
        }
        r[(j, j)] = betas[j];
    }

    let mut q = DenseMatrix::eye(n, k);
    for j in (0..k).rev() {
        if taus[j] == 0.0 {
            continue;
        }
        let v = a.col(j)[j..].to_vec();
        for c in j..k {
            reflect(&v, taus[j], &mut q.col_mut(c)[j..]);
        }
    }

    // Rotate so that diag(R) is real and nonnegative.
    for j in 0..k {
        let d = r[(j, j)];
        let mag = d.abs();
        if mag == 0.0 {
            continue;
        }
        let phase = d.phase();
        for v in q.col_mut(j) {
            *v *= phase;
        }
        let pc = phase.conj();
        for c in j + 1..k {
            r[(j, c)] = pc * r[(j, c)];
        }
        r[(j, j)] = T::from_f64(mag);
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real(n: usize, k: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, k, |_, _| rng.random::<f64>() - 0.5)
    }

    #[test]
    fn identity_is_fixed() {
        let (q, r) = qr_econ(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(q, DenseMatrix::identity(3));
        assert_eq!(r, DenseMatrix::identity(3));
    }

    #[test]
    fn hand_example() {
        let m = DenseMatrix::from_rows(&[&[3.0], &[4.0]]).unwrap();
        let (q, r) = qr_econ(&m).unwrap();
        assert!((q[(0, 0)].abs() - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)].abs() - 0.8).abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-15);
        assert!(q[(0, 0)] * r[(0, 0)] - 3.0 < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        let m = random_real(50, 10, 3);
        let (q, r) = qr_econ(&m).unwrap();
        let err = q.matmul(&r).sub(&m).fro_norm() / m.fro_norm();
        assert!(err <= 1e-12, "{err}");
        assert!(q.orthonormality_error() <= 1e-12 * (10f64).sqrt());
        for j in 0..10 {
            for i in j + 1..10 {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn complex_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DenseMatrix::from_fn(40, 12, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()));
        let (q, r) = qr_econ(&m).unwrap();
        assert!(q.matmul(&r).sub(&m).fro_norm() <= 1e-12 * m.fro_norm());
        assert!(q.orthonormality_error() <= 1e-12 * (12f64).sqrt());
        assert!((0..12).all(|j| r[(j, j)].im == 0.0 && r[(j, j)].re >= 0.0));
    }

    #[test]
    fn wide_rejected() {
        assert!(qr_econ(&DenseMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_matrix_still_orthonormal_q() {
        let (q, r) = qr_econ(&DenseMatrix::<f64>::zeros(5, 3)).unwrap();
        assert!(q.orthonormality_error() < 1e-15);
        assert_eq!(r.fro_norm(), 0.0);
    }

    #[test]
    fn subnormal_columns() {
        let m = DenseMatrix::from_rows(&[&[1.0, 1e-300, 3e-320], &[0.0, 2e-310, 0.0], &[0.0, 0.0, 5e-322], &[2.0, 0.0, 1e-321]]).unwrap();
        let (q, r) = qr_econ(&m).unwrap();
        assert!(r.data().iter().all(|x| x.is_finite()));
        assert!(q.orthonormality_error() < 1e-14);
        assert!((r[(1, 1)].abs() - 1e-300 * (0.8f64 + 2e-20).sqrt()).abs() < 1e-312);
        let e = q.matmul(&r).sub(&m);
        for j in 0..3 {
            let scale = m.col(j).iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(e.col(j).iter().all(|x| x.abs() <= 4.0 * f64::EPSILON * scale + 1e-323), "column {j}");
        }
    }
}
