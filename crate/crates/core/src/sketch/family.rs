use std::fmt;

use crate::error::Result;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::rtt::default_xi;
use crate::sketch::{
    BaseDist, GaussianTM, KhatriRaoTM, SignDist, SparseColTM, SparseIidTM, SparseRttTM, SparseStackTM, SparseUniformTM,
    TestMatrix, TransformKind,
};

/// A test-matrix family with its parameters; `None` means the field default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gaussian,
    SparseStack { zeta: usize, dist: Option<SignDist> },
    SparseUniform { zeta: usize, dist: Option<SignDist> },
    SparseIid { zeta: f64, dist: Option<SignDist> },
    SparseCol { xi: usize, dist: Option<SignDist> },
    SparseRtt { xi: Option<usize>, transform: Option<TransformKind>, diag: Option<SignDist> },
    /// Order chosen as the smallest `ℓ` with `d₀^ℓ ≥ d`.
    KhatriRao { d0: usize, base: BaseDist },
}

impl Family {
    pub fn sparse_stack(zeta: usize) -> Self {
        Family::SparseStack { zeta, dist: None }
    }

    pub fn sparse_rtt() -> Self {
        Family::SparseRtt {
            xi: None,
            transform: None,
            diag: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::SparseStack { .. } => "sparsestack",
            Family::SparseUniform { .. } => "sparseuniform",
            Family::SparseIid { .. } => "sparseiid",
            Family::SparseCol { .. } => "sparsecol",
            Family::SparseRtt { .. } => "sparsertt",
            Family::KhatriRao { .. } => "khatrirao",
        }
    }

    /// Draws `Ω ∈ F^{d×k}`.
    pub fn build<T: Scalar>(&self, d: usize, k: usize, stream: &RngStream) -> Result<Box<dyn TestMatrix<T>>> {
        let sign = |s: Option<SignDist>| s.unwrap_or(SignDist::default_for(T::FIELD));
        Ok(match *self {
            Family::Gaussian => Box::new(GaussianTM::<T>::new(d, k, stream)?),
            Family::SparseStack { zeta, dist } => Box::new(SparseStackTM::<T>::with_k(d, k, zeta, sign(dist), stream)?),
            Family::SparseUniform { zeta, dist } => Box::new(SparseUniformTM::<T>::new(d, k, zeta, sign(dist), stream)?),
            Family::SparseIid { zeta, dist } => Box::new(SparseIidTM::<T>::new(d, k, zeta, sign(dist), stream)?),
            Family::SparseCol { xi, dist } => Box::new(SparseColTM::<T>::new(d, k, xi, sign(dist), stream)?),
            Family::SparseRtt { xi, transform, diag } => {
                let kind = transform.unwrap_or(TransformKind::default_for(T::FIELD));
                Box::new(SparseRttTM::<T>::new(d, k, xi.unwrap_or(default_xi(d, k)), kind, sign(diag), stream)?)
            }
            Family::KhatriRao { d0, base } => Box::new(KhatriRaoTM::<T>::covering(d, d0, k, base, stream)?),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::SparseStack { zeta, .. } | Family::SparseUniform { zeta, .. } => write!(f, "{}(zeta={zeta})", self.name()),
            Family::SparseIid { zeta, .. } => write!(f, "{}(zeta={zeta})", self.name()),
            Family::SparseCol { xi, .. } => write!(f, "{}(xi={xi})", self.name()),
            Family::KhatriRao { d0, base } => write!(f, "{}(d0={d0},{base})", self.name()),
            _ => f.write_str(self.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::scalar::Complex64;

    fn all() -> Vec<Family> {
        vec![
            Family::Gaussian,
            Family::sparse_stack(4),
            Family::SparseUniform { zeta: 3, dist: None },
            Family::SparseIid { zeta: 3.0, dist: None },
            Family::SparseCol { xi: 4, dist: None },
            Family::sparse_rtt(),
            Family::KhatriRao {
                d0: 2,
                base: BaseDist::ComplexSpherical,
            },
        ]
    }

    #[test]
    fn every_family_apply_matches_materialize() {
        let a = DenseMatrix::from_fn(3, 40, |i, j| Complex64::new((i * j % 7) as f64 - 2.0, (j as f64 * 0.3).sin()));
        for fam in all() {
            let tm = fam.build::<Complex64>(40, 12, &RngStream::new(5)).unwrap();
            assert_eq!((tm.d(), tm.k()), (40, 12), "{fam}");
            let om = tm.materialize();
            let err = tm.apply_right(&a).unwrap().sub(&a.matmul(&om)).fro_norm();
            assert!(err < 1e-10 * a.fro_norm() * om.fro_norm().max(1.0), "{fam}: {err}");
        }
    }

    #[test]
    fn real_defaults_build() {
        for fam in all().into_iter().filter(|f| !matches!(f, Family::KhatriRao { .. })) {
            assert!(fam.build::<f64>(64, 8, &RngStream::new(1)).is_ok(), "{fam}");
        }
    }
}
