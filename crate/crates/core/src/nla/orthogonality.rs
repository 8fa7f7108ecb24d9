use crate::error::{dim_err, param_err, Result};
use crate::linalg::{svd_econ, DenseMatrix, DEFAULT_RANK_TOL};
use crate::scalar::Scalar;
use crate::sketch::TestMatrix;

/// `‖B (Q⊥*Ω)(Q*Ω)†‖_F²`, or `+∞` with `rank_deficient` set when `Q*Ω` loses rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityStat {
    pub value: f64,
    pub rank_deficient: bool,
}

pub fn osi_orthogonality_statistic<T: Scalar>(
    b: &DenseMatrix<T>,
    q: &DenseMatrix<T>,
    q_perp: &DenseMatrix<T>,
    tm: &dyn TestMatrix<T>,
) -> Result<OrthogonalityStat> {
    let n = q.rows();
    if q_perp.rows() != n || tm.d() != n || b.cols() != q_perp.cols() {
        return Err(dim_err(format!(
            "Q {:?}, Q⊥ {:?}, B {:?}, test matrix d = {}",
            q.shape(),
            q_perp.shape(),
            b.shape(),
            tm.d()
        )));
    }
    if q.adjoint_mul(q_perp).max_abs() > 1e-10 {
        return Err(param_err("Q and Q⊥ are not orthogonal"));
    }
    let r = q.cols();
    // Ω*Q is k×r; its pseudoinverse transposed gives (Q*Ω)†.
    let omq = tm.apply_adjoint(q)?;
    let svd = svd_econ(&omq)?;
    if svd.numerical_rank(DEFAULT_RANK_TOL) < r {
        return Ok(OrthogonalityStat {
            value: f64::INFINITY,
            rank_deficient: true,
        });
    }
    let m = b.matmul(&tm.apply_adjoint(q_perp)?.adjoint());
    // X = M (Q*Ω)† = ((Ω*Q)† M*)*
    let mut core = svd.u.adjoint_mul(&m.adjoint());
    for j in 0..core.cols() {
        for (i, v) in core.col_mut(j).iter_mut().enumerate() {
            *v = v.scale(1.0 / svd.sigma[i]);
        }
    }
    Ok(OrthogonalityStat {
        value: svd.v.matmul(&core).fro_norm_sq(),
        rank_deficient: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr_econ;
    use crate::rng::RngStream;
    use crate::sketch::dist::normal;
    use crate::sketch::GaussianTM;

    fn split_basis(n: usize, r: usize, s: usize, seed: u64) -> (DenseMatrix<f64>, DenseMatrix<f64>) {
        let mut rng = RngStream::new(seed).rng();
        let g = DenseMatrix::from_fn(n, r + s, |_, _| normal(&mut rng));
        let (q, _) = qr_econ(&g).unwrap();
        (q.columns(0..r), q.columns(r..r + s))
    }

    #[test]
    fn zero_b_and_identity_core() {
        let (q, qp) = split_basis(20, 3, 4, 1);
        let tm = GaussianTM::new(20, 6, &RngStream::new(2)).unwrap();
        let z = osi_orthogonality_statistic(&DenseMatrix::zeros(2, 4), &q, &qp, &tm).unwrap();
        assert_eq!(z.value, 0.0);
        // Ω = Q exactly: Q*Ω = I.
        #[derive(Debug)]
        struct Fixed(DenseMatrix<f64>);
        impl TestMatrix<f64> for Fixed {
            fn d(&self) -> usize {
                self.0.rows()
            }
            fn k(&self) -> usize {
                self.0.cols()
            }
            fn label(&self) -> String {
                "fixed".into()
            }
            fn apply_adjoint(&self, b: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
                Ok(self.0.adjoint_mul(b))
            }
            fn apply(&self, c: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
                Ok(self.0.matmul(c))
            }
        }
        let fixed = Fixed(q.clone());
        let b = DenseMatrix::from_fn(2, 4, |i, j| (i + j) as f64);
        let got = osi_orthogonality_statistic(&b, &q, &qp, &fixed).unwrap();
        let want = b.matmul(&qp.adjoint_mul(&q)).fro_norm_sq();
        assert!((got.value - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn rank_deficient_sentinel() {
        let (q, qp) = split_basis(10, 4, 2, 3);
        let tm = GaussianTM::new(10, 3, &RngStream::new(4)).unwrap();
        let s = osi_orthogonality_statistic(&DenseMatrix::identity(2), &q, &qp, &tm).unwrap();
        assert!(s.rank_deficient && s.value.is_infinite());
        assert!(osi_orthogonality_statistic(&DenseMatrix::identity(2), &q, &q.columns(0..2), &tm).is_err());
    }

    #[test]
    fn gaussian_median_bound() {
        let (r, k, n, s) = (10, 30, 80, 10);
        let mut vals: Vec<f64> = (0..500u64)
            .map(|t| {
                let (q, qp) = split_basis(n, r, s, 100 + t);
                let tm = GaussianTM::new(n, k, &RngStream::new(t)).unwrap();
                osi_orthogonality_statistic(&DenseMatrix::identity(s), &q, &qp, &tm).unwrap().value
            })
            .collect();
        vals.sort_by(f64::total_cmp);
        assert!(vals[250] <= 10.0 * s as f64, "median {}", vals[250]);
    }
}
