use crate::error::{dim_err, Result};
use crate::linalg::{truncated_pinv_apply, DenseMatrix, DEFAULT_RANK_TOL};
use crate::nla::Operand;
use crate::scalar::Scalar;
use crate::sketch::TestMatrix;

/// Sketch-and-solve least squares: `X̃ = (Ψ*A)† (Ψ*B)` with a truncated pseudoinverse.
pub fn sketch_and_solve<'a, T: Scalar>(
    a: impl Into<Operand<'a, T>>,
    b: &DenseMatrix<T>,
    tm_psi: &dyn TestMatrix<T>,
) -> Result<DenseMatrix<T>> {
    let a = a.into();
    let (n, _) = a.shape();
    if b.rows() != n || tm_psi.d() != n {
        return Err(dim_err(format!("A has {n} rows, B has {}, Ψ has d = {}", b.rows(), tm_psi.d())));
    }
    let sa = a.sketch_left(tm_psi)?;
    let sb = tm_psi.apply_adjoint(b)?;
    truncated_pinv_apply(&sa, &sb, DEFAULT_RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr_econ;
    use crate::rng::RngStream;
    use crate::sketch::dist::normal;
    use crate::sketch::GaussianTM;

    fn random(n: usize, m: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = RngStream::new(seed).rng();
        DenseMatrix::from_fn(n, m, |_, _| normal(&mut rng))
    }

    #[test]
    fn consistent_system() {
        let a = random(100, 8, 1);
        let x0 = random(8, 2, 2);
        let b = a.matmul(&x0);
        let psi = GaussianTM::new(100, 16, &RngStream::new(3)).unwrap();
        let x = sketch_and_solve(&a, &b, &psi).unwrap();
        assert!(x.sub(&x0).fro_norm() <= 1e-8 * x0.fro_norm());
    }

    #[test]
    fn identity_design() {
        let b = random(6, 3, 4);
        let psi = GaussianTM::new(6, 6, &RngStream::new(5)).unwrap();
        let x = sketch_and_solve(&DenseMatrix::identity(6), &b, &psi).unwrap();
        assert!(x.sub(&b).fro_norm() < 1e-12 * b.fro_norm());
    }

    #[test]
    fn residual_within_constant() {
        let (n, d) = (500, 20);
        let mut ok = 0;
        for t in 0..200u64 {
            let a = random(n, d, 10 + t);
            let (q, _) = qr_econ(&a).unwrap();
            let mut e = random(n, 1, 1000 + t);
            e.add_scaled(-1.0, &q.matmul(&q.adjoint_mul(&e)));
            let rho = 0.7;
            let e = e.scaled(rho / e.fro_norm());
            let b = a.matmul(&random(d, 1, 2000 + t)).add(&e);
            let psi = GaussianTM::new(n, 4 * d, &RngStream::new(3000 + t)).unwrap();
            let x = sketch_and_solve(&a, &b, &psi).unwrap();
            if a.matmul(&x).sub(&b).fro_norm() <= 10f64.sqrt() * rho {
                ok += 1;
            }
        }
        assert!(ok >= 190, "{ok}/200");
    }
}
