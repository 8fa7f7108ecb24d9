use rayon::prelude::*;

use crate::error::{param_err, Result};
use crate::linalg::DenseMatrix;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{check_adjoint, check_apply, SignDist, SparseColTM, TestMatrix, Transform, TransformKind};

/// Randomized trigonometric transform `Ω = D F S`: random diagonal, unitary
/// transform, then a sparse column sampler.
#[derive(Debug, Clone)]
pub struct SparseRttTM<T> {
    diag: Vec<T>,
    transform: Transform,
    diag_dist: SignDist,
    s: SparseColTM<T>,
}

/// `⌈1.5 ln k⌉`, at least 1 and at most `d`.
pub fn default_xi(d: usize, k: usize) -> usize {
    ((1.5 * (k.max(1) as f64).ln()).ceil() as usize).clamp(1, d.max(1))
}

impl<T: Scalar> SparseRttTM<T> {
    /// `D` comes from `stream.child(0)` and `S` from `stream.child(1)`.
    pub fn new(d: usize, k: usize, xi: usize, kind: TransformKind, diag_dist: SignDist, stream: &RngStream) -> Result<Self> {
        if diag_dist == SignDist::ComplexRademacher {
            return Err(param_err("SparseRTT diagonals are rademacher, uniform or steinhaus"));
        }
        diag_dist.check_field::<T>()?;
        if kind == TransformKind::Dft && !T::is_complex() {
            return Err(param_err("the DFT transform needs the complex field"));
        }
        let transform = Transform::new(kind, d)?;
        let s = SparseColTM::new(d, k, xi, SignDist::default_for(T::FIELD), &stream.child(1))?;
        let mut rng = stream.child(0).rng();
        let diag = (0..d).map(|_| diag_dist.sample::<T, _>(&mut rng)).collect();
        Ok(SparseRttTM { diag, transform, diag_dist, s })
    }

    pub fn xi(&self) -> usize {
        self.s.xi()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// `(D F)* x`
    pub fn rotate_adjoint(&self, x: &mut [T]) -> Result<()> {
        for (v, g) in x.iter_mut().zip(&self.diag) {
            *v = g.conj() * *v;
        }
        self.transform.adjoint(x)
    }

    /// `D F x`
    pub fn rotate(&self, x: &mut [T]) -> Result<()> {
        self.transform.forward(x)?;
        for (v, g) in x.iter_mut().zip(&self.diag) {
            *v = *g * *v;
        }
        Ok(())
    }
}

impl<T: Scalar> TestMatrix<T> for SparseRttTM<T> {
    fn d(&self) -> usize {
        self.diag.len()
    }

    fn k(&self) -> usize {
        self.s.k()
    }

    fn label(&self) -> String {
        format!("sparsertt(xi={},{},{})", self.xi(), self.transform.kind(), self.diag_dist)
    }

    fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_adjoint(self.d(), b.rows())?;
        let mut w = b.clone();
        let d = self.d();
        w.data_mut().par_chunks_mut(d).try_for_each(|col| self.rotate_adjoint(col))?;
        self.s.apply_adjoint(&w)
    }

    fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_apply(self.k(), c.rows())?;
        let mut w = self.s.apply(c)?;
        let d = self.d();
        w.data_mut().par_chunks_mut(d).try_for_each(|col| self.rotate(col))?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;

    #[test]
    fn xi_default() {
        assert_eq!(default_xi(1000, 100), 7);
        assert_eq!(default_xi(3, 100), 3);
        assert_eq!(default_xi(10, 1), 1);
    }

    #[test]
    fn apply_paths_agree() {
        let tm = SparseRttTM::<Complex64>::new(16, 6, 3, TransformKind::Dft, SignDist::Steinhaus, &RngStream::new(7)).unwrap();
        let om = tm.materialize();
        let a = DenseMatrix::from_fn(5, 16, |i, j| Complex64::new((i * 3 + j) as f64 % 7.0 - 3.0, (j as f64).cos()));
        let fast = tm.apply_right(&a).unwrap();
        assert!(fast.sub(&a.matmul(&om)).fro_norm() < 1e-12 * fast.fro_norm());
        let b = a.adjoint();
        assert!(tm.apply_adjoint(&b).unwrap().sub(&om.adjoint_mul(&b)).fro_norm() < 1e-12 * b.fro_norm());
    }

    #[test]
    fn rotation_is_unitary() {
        for kind in [TransformKind::Wht, TransformKind::Dct] {
            let tm = SparseRttTM::<f64>::new(32, 8, 2, kind, SignDist::RealRademacher, &RngStream::new(1)).unwrap();
            let x: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).sin()).collect();
            let mut y = x.clone();
            tm.rotate_adjoint(&mut y).unwrap();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nx - ny).abs() < 1e-12);
        }
        assert!(SparseRttTM::<f64>::new(12, 4, 2, TransformKind::Wht, SignDist::RealRademacher, &RngStream::new(1)).is_err());
        assert!(SparseRttTM::<f64>::new(12, 4, 2, TransformKind::Dft, SignDist::RealRademacher, &RngStream::new(1)).is_err());
    }
}
