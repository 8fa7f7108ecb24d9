//! Scalar distributions used to fill test matrices.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param_err, Error, Result};
use crate::scalar::{Field, Scalar};

/// Unit-modulus (or unit-variance) random signs for sparse entries and diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignDist {
    /// ±1
    RealRademacher,
    /// (ϱ₁ + iϱ₂)/√2
    ComplexRademacher,
    /// uniform on the unit circle
    Steinhaus,
    /// Uniform on [−√3, √3]; unit variance but not unit modulus.
    UniformSymmetric,
}

impl SignDist {
    pub fn field(self) -> Field {
        match self {
            SignDist::RealRademacher | SignDist::UniformSymmetric => Field::Real,
            SignDist::ComplexRademacher | SignDist::Steinhaus => Field::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignDist::RealRademacher => "rademacher",
            SignDist::ComplexRademacher => "complex-rademacher",
            SignDist::Steinhaus => "steinhaus",
            SignDist::UniformSymmetric => "uniform",
        }
    }

    /// Default for the field: real Rademacher, or Steinhaus for complex.
    pub fn default_for(field: Field) -> Self {
        match field {
            Field::Real => SignDist::RealRademacher,
            Field::Complex => SignDist::Steinhaus,
        }
    }

    pub(crate) fn check_field<T: Scalar>(self) -> Result<()> {
        if self.field() == Field::Complex && T::FIELD == Field::Real {
            return Err(param_err(format!("{} entries need the complex field", self.name())));
        }
        Ok(())
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(self, rng: &mut R) -> T {
        match self {
            SignDist::RealRademacher => rademacher(rng),
            SignDist::ComplexRademacher => {
                T::from_parts(rademacher::<f64, R>(rng) * FRAC_1_SQRT_2, rademacher::<f64, R>(rng) * FRAC_1_SQRT_2)
            }
            SignDist::Steinhaus => {
                let theta = rng.random::<f64>() * TAU;
                T::from_parts(theta.cos(), theta.sin())
            }
            SignDist::UniformSymmetric => T::from_f64(rng.random_range(-1.0..1.0) * 3f64.sqrt()),
        }
    }
}

impl fmt::Display for SignDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rademacher" | "real-rademacher" => Ok(SignDist::RealRademacher),
            "complex-rademacher" => Ok(SignDist::ComplexRademacher),
            "steinhaus" => Ok(SignDist::Steinhaus),
            "uniform" => Ok(SignDist::UniformSymmetric),
            other => Err(param_err(format!("unknown sign distribution `{other}`"))),
        }
    }
}

#[inline]
pub(crate) fn rademacher<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    if rng.random::<bool>() {
        T::one()
    } else {
        -T::one()
    }
}

/// Standard normal in the field: `N(0,1)` real, or `(Z₁ + iZ₂)/√2` complex.
#[inline]
pub(crate) fn normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    if T::is_complex() {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        T::from_parts(a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2)
    } else {
        T::from_f64(rng.sample(StandardNormal))
    }
}

/// Base distributions for Khatri–Rao factors; each has `E[ωω*] = I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseDist {
    RealGaussian,
    RealRademacher,
    RealSpherical,
    ComplexGaussian,
    ComplexRademacher,
    Steinhaus,
    ComplexSpherical,
}

impl BaseDist {
    pub const ALL: [BaseDist; 7] = [
        BaseDist::RealGaussian,
        BaseDist::RealRademacher,
        BaseDist::RealSpherical,
        BaseDist::ComplexGaussian,
        BaseDist::ComplexRademacher,
        BaseDist::Steinhaus,
        BaseDist::ComplexSpherical,
    ];

    pub fn field(self) -> Field {
        match self {
            BaseDist::RealGaussian | BaseDist::RealRademacher | BaseDist::RealSpherical => Field::Real,
            _ => Field::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseDist::RealGaussian => "real-gaussian",
            BaseDist::RealRademacher => "real-rademacher",
            BaseDist::RealSpherical => "real-spherical",
            BaseDist::ComplexGaussian => "complex-gaussian",
            BaseDist::ComplexRademacher => "complex-rademacher",
            BaseDist::Steinhaus => "steinhaus",
            BaseDist::ComplexSpherical => "complex-spherical",
        }
    }

    /// Smallest `C` with `E|⟨ω, a⟩|⁴ ≤ C` for every unit `a ∈ F^{d₀}`.
    pub fn fourth_moment(self, d0: usize) -> f64 {
        let d = d0 as f64;
        match self {
            BaseDist::RealGaussian => 3.0,
            BaseDist::RealRademacher => 3.0 - 2.0 / d,
            BaseDist::RealSpherical => 3.0 - 6.0 / (d + 2.0),
            BaseDist::ComplexGaussian => 2.0,
            BaseDist::ComplexRademacher => 2.0 - 1.0 / d,
            BaseDist::Steinhaus => 2.0 - 1.0 / d,
            BaseDist::ComplexSpherical => 2.0 - 2.0 / (d + 1.0),
        }
    }

    pub(crate) fn check_field<T: Scalar>(self) -> Result<()> {
        if self.field() == Field::Complex && T::FIELD == Field::Real {
            return Err(param_err(format!("{} factors need the complex field", self.name())));
        }
        Ok(())
    }

    /// Fills `out` with one factor vector.
    pub fn fill<T: Scalar, R: Rng + ?Sized>(self, rng: &mut R, out: &mut [T]) {
        match self {
            BaseDist::RealGaussian => out.iter_mut().for_each(|x| *x = T::from_f64(rng.sample(StandardNormal))),
            BaseDist::RealRademacher => out.iter_mut().for_each(|x| *x = rademacher(rng)),
            BaseDist::ComplexGaussian => out.iter_mut().for_each(|x| *x = normal(rng)),
            BaseDist::ComplexRademacher => out.iter_mut().for_each(|x| *x = SignDist::ComplexRademacher.sample(rng)),
            BaseDist::Steinhaus => out.iter_mut().for_each(|x| *x = SignDist::Steinhaus.sample(rng)),
            BaseDist::RealSpherical | BaseDist::ComplexSpherical => loop {
                if self == BaseDist::RealSpherical {
                    out.iter_mut().for_each(|x| *x = T::from_f64(rng.sample(StandardNormal)));
                } else {
                    out.iter_mut().for_each(|x| *x = normal(rng));
                }
                let nrm = out.iter().map(|x| x.abs_sq()).sum::<f64>().sqrt();
                if nrm > 0.0 {
                    let s = (out.len() as f64).sqrt() / nrm;
                    out.iter_mut().for_each(|x| *x = x.scale(s));
                    break;
                }
            },
        }
    }
}

impl fmt::Display for BaseDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        BaseDist::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .or(match s.as_str() {
                "gaussian" => Some(BaseDist::RealGaussian),
                "rademacher" => Some(BaseDist::RealRademacher),
                "spherical" => Some(BaseDist::RealSpherical),
                _ => None,
            })
            .ok_or_else(|| param_err(format!("unknown base distribution `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spherical_norm_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d0 in [1usize, 2, 5] {
            let mut v = vec![Complex64::default(); d0];
            BaseDist::ComplexSpherical.fill(&mut rng, &mut v);
            let n2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!((n2 - d0 as f64).abs() < 1e-12);
            let mut w = vec![0.0f64; d0];
            BaseDist::RealSpherical.fill(&mut rng, &mut w);
            assert!((w.iter().map(|x| x * x).sum::<f64>() - d0 as f64).abs() < 1e-12);
        }
        let mut one = [0.0f64];
        BaseDist::RealSpherical.fill(&mut rng, &mut one);
        assert_eq!(one[0].abs(), 1.0);
    }

    #[test]
    fn unit_second_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 200_000;
        for dist in [SignDist::RealRademacher, SignDist::ComplexRademacher, SignDist::Steinhaus, SignDist::UniformSymmetric] {
            let m: f64 = (0..n).map(|_| dist.sample::<Complex64, _>(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
            assert!((m - 1.0).abs() < 0.01, "{dist}: {m}");
        }
        for base in BaseDist::ALL {
            let mut v = [Complex64::default(); 3];
            let mut acc = 0.0;
            for _ in 0..n / 3 {
                base.fill(&mut rng, &mut v);
                acc += v[0].norm_sqr();
            }
            let m = acc / (n / 3) as f64;
            assert!((m - 1.0).abs() < 0.03, "{base}: {m}");
        }
    }

    #[test]
    fn parse_names() {
        for b in BaseDist::ALL {
            assert_eq!(b.name().parse::<BaseDist>().unwrap(), b);
        }
        assert!("bogus".parse::<SignDist>().is_err());
        assert!(SignDist::Steinhaus.check_field::<f64>().is_err());
        assert!(SignDist::Steinhaus.check_field::<Complex64>().is_ok());
    }
}
