use crate::error::{dim_err, param_err, Result};
use crate::linalg::{numerical_rank, svd_econ, truncated_pinv_apply, CsrMatrix, DenseMatrix, DEFAULT_RANK_TOL};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;

/// Output of [`matrix_recovery`].
#[derive(Debug, Clone)]
pub struct Recovery<T> {
    pub coeffs: Vec<T>,
    pub matrix: DenseMatrix<T>,
    pub queries: usize,
    /// Numerical rank of the basis Gram matrix.
    pub basis_rank: usize,
}

/// Frobenius inner product `Σ conj(aᵢⱼ) bᵢⱼ` of two CSR matrices.
fn frob_inner<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> T {
    let mut acc = T::zero();
    for r in 0..a.rows() {
        let (ca, va) = a.row(r);
        let (cb, vb) = b.row(r);
        let (mut i, mut j) = (0, 0);
        while i < ca.len() && j < cb.len() {
            match ca[i].cmp(&cb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va[i].conj() * vb[j];
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    acc
}

fn bilinear<T: Scalar>(y: &[T], mx: &[T]) -> T {
    y.iter().zip(mx).map(|(&a, &b)| a * b).sum()
}

/// Recovers `B̃ = Σ x̃ⱼ Mⱼ` from `p` bilinear queries `(x, y) ↦ yᵀ B x`.
///
/// Query `i` draws `xᵢ` then `yᵢ` from `stream.child(i)`. A rank-deficient
/// basis is reported through `basis_rank` and a log warning; the truncated
/// pseudoinverse still returns a minimum-norm coefficient vector.
pub fn matrix_recovery<T: Scalar>(
    mut query: impl FnMut(&[T], &[T]) -> T,
    basis: &[CsrMatrix<T>],
    p: usize,
    stream: &RngStream,
) -> Result<Recovery<T>> {
    let d = basis.len();
    if d == 0 {
        return Err(param_err("matrix recovery needs a nonempty basis"));
    }
    let n = basis[0].rows();
    if basis.iter().any(|m| m.rows() != n || m.cols() != n) {
        return Err(dim_err(format!("every basis matrix must be {n}x{n}")));
    }
    if p < d {
        return Err(param_err(format!("need p >= d bilinear queries (p = {p}, d = {d})")));
    }
    let gram = DenseMatrix::from_fn(d, d, |i, j| frob_inner(&basis[i], &basis[j]));
    let basis_rank = numerical_rank(&svd_econ(&gram)?.sigma, DEFAULT_RANK_TOL);
    if basis_rank < d {
        log::warn!("basis Gram matrix has numerical rank {basis_rank} < {d}");
    }
    let mut f = DenseMatrix::zeros(p, d);
    let mut g = DenseMatrix::zeros(p, 1);
    for i in 0..p {
        let mut rng = stream.child(i as u64).rng();
        let x: Vec<T> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<T> = (0..n).map(|_| normal(&mut rng)).collect();
        for (j, m) in basis.iter().enumerate() {
            f[(i, j)] = bilinear(&y, &m.matvec(&x));
        }
        g[(i, 0)] = query(&x, &y);
    }
    let coeffs = truncated_pinv_apply(&f, &g, DEFAULT_RANK_TOL)?.into_data();
    let mut matrix = DenseMatrix::zeros(n, n);
    for (m, &c) in basis.iter().zip(&coeffs) {
        for r in 0..n {
            let (cols, vals) = m.row(r);
            for (&col, &v) in cols.iter().zip(vals) {
                matrix[(r, col)] += c * v;
            }
        }
    }
    Ok(Recovery {
        coeffs,
        matrix,
        queries: p,
        basis_rank,
    })
}

/// The `2n − 1` Toeplitz generators; generator `j` is the diagonal `a − b = j − (n − 1)`.
pub fn toeplitz_basis<T: Scalar>(n: usize) -> Vec<CsrMatrix<T>> {
    (0..2 * n - 1)
        .map(|j| {
            let off = j as isize - (n as isize - 1);
            let trip: Vec<(usize, usize, T)> = (0..n as isize)
                .filter_map(|a| {
                    let b = a - off;
                    (0..n as isize).contains(&b).then(|| (a as usize, b as usize, T::one()))
                })
                .collect();
            CsrMatrix::from_triplets(n, n, &trip).expect("valid Toeplitz pattern")
        })
        .collect()
}

/// Toeplitz matrix with `T[a, b] = c[a − b + n − 1]`.
pub fn toeplitz<T: Scalar>(c: &[T]) -> Result<DenseMatrix<T>> {
    if c.is_empty() || c.len() % 2 == 0 {
        return Err(param_err("Toeplitz coefficient vector must have odd length 2n - 1"));
    }
    let n = c.len().div_ceil(2);
    Ok(DenseMatrix::from_fn(n, n, |a, b| c[a + n - 1 - b]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(b: &DenseMatrix<f64>) -> impl FnMut(&[f64], &[f64]) -> f64 + '_ {
        |x, y| bilinear(y, &b.matvec(x))
    }

    #[test]
    fn scalar_identity_family() {
        let b = DenseMatrix::identity(5).scaled(3.0);
        let rec = matrix_recovery(oracle(&b), &[CsrMatrix::identity(5)], 4, &RngStream::new(1)).unwrap();
        assert!((rec.coeffs[0] - 3.0).abs() < 1e-10);
        assert!(rec.matrix.sub(&b).fro_norm() <= 1e-10);
        assert_eq!(rec.queries, 4);
    }

    #[test]
    fn toeplitz_membership_is_exact() {
        let n = 16;
        let mut rng = RngStream::new(3).rng();
        let c: Vec<f64> = (0..2 * n - 1).map(|_| normal(&mut rng)).collect();
        let b = toeplitz(&c).unwrap();
        let basis = toeplitz_basis::<f64>(n);
        assert_eq!(basis.len(), 2 * n - 1);
        let mut count = 0;
        let rec = matrix_recovery(
            |x: &[f64], y: &[f64]| {
                count += 1;
                bilinear(y, &b.matvec(x))
            },
            &basis,
            3 * (2 * n - 1),
            &RngStream::new(4),
        )
        .unwrap();
        assert_eq!(count, 3 * (2 * n - 1));
        assert_eq!(rec.basis_rank, 2 * n - 1);
        assert!(rec.matrix.sub(&b).fro_norm() <= 1e-8 * b.fro_norm());
        for (a, e) in rec.coeffs.iter().zip(&c) {
            assert!((a - e).abs() < 1e-8);
        }
    }

    #[test]
    fn dependent_basis_reports_rank() {
        let basis = vec![CsrMatrix::identity(3), CsrMatrix::identity(3).scaled(2.0)];
        let b = DenseMatrix::identity(3);
        let rec = matrix_recovery(oracle(&b), &basis, 4, &RngStream::new(0)).unwrap();
        assert_eq!(rec.basis_rank, 1);
        assert!(rec.matrix.sub(&b).fro_norm() < 1e-10);
        assert!(matrix_recovery(oracle(&b), &basis, 1, &RngStream::new(0)).is_err());
    }
}
