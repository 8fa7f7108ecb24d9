use crate::error::{dim_err, Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Upper Cholesky factor `R` with `M = R* R`.
///
/// Only the upper triangle of `m` is read. Fails with
/// [`Error::PositiveDefiniteness`] at the first nonpositive pivot.
pub fn cholesky_upper<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(dim_err(format!("cholesky needs a square matrix, got {n}x{}", m.cols())));
    }
    m.check_finite()?;
    let mut r = DenseMatrix::<T>::zeros(n, n);
    for j in 0..n {
        // r[.., j] from column j of the upper triangle.
        for i in 0..=j {
            let mut s = m[(i, j)];
            let (ri, rj) = (r.col(i), r.col(j));
            for p in 0..i {
                s -= ri[p].conj() * rj[p];
            }
            if i == j {
                let d = s.re();
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::PositiveDefiniteness { pivot: j, value: d });
                }
                r[(j, j)] = T::from_f64(d.sqrt());
            } else {
                let rii = r[(i, i)].re();
                r[(i, j)] = s.scale(1.0 / rii);
            }
        }
    }
    Ok(r)
}

/// Solves `X R = B` for upper-triangular `R`, i.e. returns `B R⁻¹`.
pub fn solve_upper_right<T: Scalar>(b: &DenseMatrix<T>, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let k = r.rows();
    if r.cols() != k || b.cols() != k {
        return Err(dim_err(format!(
            "B R^-1 with B {}x{} and R {}x{}",
            b.rows(),
            b.cols(),
            r.rows(),
            r.cols()
        )));
    }
    let mut x = b.clone();
    for j in 0..k {
        for p in 0..j {
            let rpj = r[(p, j)];
            if rpj == T::zero() {
                continue;
            }
            let (xp, xj) = x.two_cols_mut(p, j);
            for (a, &c) in xj.iter_mut().zip(xp.iter()) {
                *a -= c * rpj;
            }
        }
        let inv = T::one() / r[(j, j)];
        for a in x.col_mut(j) {
            *a *= inv;
        }
    }
    Ok(x)
}

/// Solves `R x = b` for upper-triangular `R`.
pub fn solve_upper<T: Scalar>(r: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let k = r.rows();
    if r.cols() != k || b.len() != k {
        return Err(dim_err("upper-triangular solve shape"));
    }
    let mut x = b.to_vec();
    for j in (0..k).rev() {
        x[j] = x[j] / r[(j, j)];
        let xj = x[j];
        for (i, xi) in x.iter_mut().enumerate().take(j) {
            *xi -= r[(i, j)] * xj;
        }
    }
    Ok(x)
}

/// Solves `R* x = b` for upper-triangular `R`.
pub fn solve_upper_adjoint<T: Scalar>(r: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let k = r.rows();
    if r.cols() != k || b.len() != k {
        return Err(dim_err("lower-triangular solve shape"));
    }
    let mut x = b.to_vec();
    for j in 0..k {
        let col = r.col(j);
        let mut s = x[j];
        for i in 0..j {
            s -= col[i].conj() * x[i];
        }
        x[j] = s / col[j].conj();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_example() {
        let m = DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]).unwrap();
        let r = cholesky_upper(&m).unwrap();
        assert_eq!(r[(0, 0)], 2.0);
        assert_eq!(r[(0, 1)], 1.0);
        assert_eq!(r[(1, 1)], 2.0);
        assert_eq!(r[(1, 0)], 0.0);
    }

    #[test]
    fn indefinite_reports_pivot() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        match cholesky_upper(&m) {
            Err(Error::PositiveDefiniteness { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_round_trip_and_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = DenseMatrix::from_fn(30, 8, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = g.adjoint_mul(&g);
        let r = cholesky_upper(&m).unwrap();
        assert!(r.adjoint_mul(&r).sub(&m).fro_norm() <= 1e-13 * m.fro_norm());
        let b = DenseMatrix::from_fn(5, 8, |i, j| Complex64::new(i as f64, j as f64));
        let x = solve_upper_right(&b, &r).unwrap();
        assert!(x.matmul(&r).sub(&b).fro_norm() <= 1e-11 * b.fro_norm());
        let rhs: Vec<Complex64> = (0..8).map(|i| Complex64::new(1.0, i as f64)).collect();
        let y = solve_upper(&r, &rhs).unwrap();
        let back = r.matvec(&y);
        assert!(back.iter().zip(&rhs).all(|(a, b)| (a - b).norm() < 1e-11));
        let z = solve_upper_adjoint(&r, &rhs).unwrap();
        let back = r.adjoint().matvec(&z);
        assert!(back.iter().zip(&rhs).all(|(a, b)| (a - b).norm() < 1e-11));
    }
}
