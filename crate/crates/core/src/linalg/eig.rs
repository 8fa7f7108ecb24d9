use crate::error::{dim_err, Error, Result};
use crate::linalg::dense::dotc;
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Eigendecomposition `A = V diag(values) V*` of a self-adjoint matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> HermitianEig<T> {
    /// `V f(Λ) V*`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DenseMatrix<T> {
        let mut vf = self.vectors.clone();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        vf.scale_columns(&fl);
        vf.mul_adjoint(&self.vectors)
    }
}

struct Tridiagonal<T> {
    diag: Vec<f64>,
    off: Vec<f64>,
    // Householder vectors (stored from row k+1) and scalings, plus phases.
    reflectors: Vec<(Vec<T>, f64)>,
    phases: Vec<T>,
}

/// Householder reduction of the lower triangle to real symmetric tridiagonal form.
fn tridiagonalize<T: Scalar>(m: &DenseMatrix<T>, keep_reflectors: bool) -> Tridiagonal<T> {
    let n = m.rows();
    let mut a = m.clone();
    let mut diag = vec![0.0; n];
    let mut sub: Vec<T> = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors = Vec::new();
    let mut p = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        diag[k] = a[(k, k)].re();
        let len = n - k - 1;
        let mut v: Vec<T> = a.col(k)[k + 1..].to_vec();
        let alpha = v.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
        if len == 1 || alpha == 0.0 {
            sub[k] = v[0];
            if keep_reflectors {
                reflectors.push((Vec::new(), 0.0));
            }
            continue;
        }
        let x0 = v[0];
        let phase = x0.phase();
        let beta = -(phase.scale(alpha));
        v[0] = x0 - beta;
        let tau = 2.0 / v.iter().map(|x| x.abs_sq()).sum::<f64>();
        sub[k] = beta;

        // p = τ A22 v, using the full (Hermitian) trailing block.
        let p = &mut p[..len];
        p.iter_mut().for_each(|x| *x = T::zero());
        for (jj, &vj) in v.iter().enumerate() {
            if vj == T::zero() {
                continue;
            }
            let col = &a.col(k + 1 + jj)[k + 1..];
            for (pi, &aij) in p.iter_mut().zip(col) {
                *pi += aij * vj;
            }
        }
        p.iter_mut().for_each(|x| *x = x.scale(tau));
        let kk = dotc(&v, p).re() * (tau / 2.0);
        let w: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - vi.scale(kk)).collect();
        // A22 -= v w* + w v*
        for jj in 0..len {
            let wj = w[jj].conj();
            let vj = v[jj].conj();
            let col = &mut a.col_mut(k + 1 + jj)[k + 1..];
            for ii in 0..len {
                col[ii] -= v[ii] * wj + w[ii] * vj;
            }
        }
        if keep_reflectors {
            reflectors.push((v, tau));
        }
    }
    if n > 0 {
        diag[n - 1] = a[(n - 1, n - 1)].re();
    }
    // Diagonal unitary making the subdiagonal real nonnegative.
    let mut phases = vec![T::one(); n];
    let mut off = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let e = sub[k];
        let mag = e.abs();
        off[k] = mag;
        phases[k + 1] = if mag == 0.0 { phases[k] } else { phases[k] * e.phase() };
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
        phases,
    }
}

/// Implicit QL on a symmetric tridiagonal matrix (`e[i]` couples `i` and `i+1`).
/// Rotations are accumulated into the columns of `z` when given.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DenseMatrix<f64>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NoConvergence("tridiagonal QL".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (zi, zi1) = z.two_cols_mut(i, i + 1);
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hh = *b;
                            *b = s * *a + c * hh;
                            *a = c * *a - s * hh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn check_square<T: Scalar>(m: &DenseMatrix<T>) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(dim_err(format!("eigensolver needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    m.check_finite()
}

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigvals(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(d.len(), 0.0);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenpairs of a symmetric tridiagonal matrix, ascending.
pub fn tridiagonal_eigh(diag: &[f64], off: &[f64]) -> Result<HermitianEig<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    let mut z = DenseMatrix::<f64>::identity(n);
    tql2(&mut d, &mut e, Some(&mut z))?;
    Ok(sorted(d, z))
}

fn sorted<T: Scalar>(d: Vec<f64>, z: DenseMatrix<T>) -> HermitianEig<T> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    HermitianEig {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors: z.select_columns(&order),
    }
}

/// Eigenvalues (ascending) of a self-adjoint matrix; reads the lower triangle.
pub fn eigvalsh<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<f64>> {
    check_square(m)?;
    let t = tridiagonalize(m, false);
    tridiagonal_eigvals(&t.diag, &t.off)
}

/// Full eigendecomposition of a self-adjoint matrix; reads the lower triangle.
pub fn eigh<T: Scalar>(m: &DenseMatrix<T>) -> Result<HermitianEig<T>> {
    check_square(m)?;
    let n = m.rows();
    let t = tridiagonalize(m, true);
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    let mut z = DenseMatrix::<f64>::identity(n);
    tql2(&mut d, &mut e, Some(&mut z))?;
    // vectors = Q · diag(phases) · Z
    let mut x = DenseMatrix::<T>::from_fn(n, n, |i, j| t.phases[i].scale(z[(i, j)]));
    for (k, (v, tau)) in t.reflectors.iter().enumerate().rev() {
        if *tau == 0.0 {
            continue;
        }
        for c in 0..n {
            let col = &mut x.col_mut(c)[k + 1..];
            let w = dotc(v, col).scale(*tau);
            for (ci, &vi) in col.iter_mut().zip(v) {
                *ci -= vi * w;
            }
        }
    }
    Ok(sorted(d, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check<T: Scalar>(a: &DenseMatrix<T>) {
        let e = eigh(a).unwrap();
        let n = a.rows();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.vectors.orthonormality_error() <= 1e-12 * (n as f64).sqrt().max(1.0));
        let rec = e.apply_fn(|l| l);
        assert!(rec.sub(a).fro_norm() <= 1e-12 * a.fro_norm().max(1.0), "{}", rec.sub(a).fro_norm());
        let vals = eigvalsh(a).unwrap();
        for (x, y) in vals.iter().zip(&e.values) {
            assert!((x - y).abs() <= 1e-12 * a.fro_norm().max(1.0));
        }
    }

    #[test]
    fn diagonal_and_small() {
        let a = DenseMatrix::<f64>::from_diag(&[3.0, -1.0, 2.0]);
        assert_eq!(eigvalsh(&a).unwrap(), vec![-1.0, 2.0, 3.0]);
        let b = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let v = eigvalsh(&b).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 3.0).abs() < 1e-15);
        check(&b);
        check(&DenseMatrix::<f64>::zeros(4, 4));
        check(&DenseMatrix::<f64>::identity(1));
    }

    #[test]
    fn random_real_and_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &n in &[2usize, 3, 17, 60] {
            let g = DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            check(&g.hermitian_part());
            let c = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            check(&c.hermitian_part());
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DenseMatrix::from_fn(20, 3, |_, _| rng.random::<f64>() - 0.5);
        let p = g.mul_adjoint(&g);
        check(&p);
        let v = eigvalsh(&p).unwrap();
        assert!(v[..17].iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn tridiagonal_laplacian() {
        // Path Laplacian eigenvalues 2 − 2cos(πj/(n+1)).
        let n = 30;
        let vals = tridiagonal_eigvals(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }
}
