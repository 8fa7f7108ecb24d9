use std::fmt;
use std::str::FromStr;

use crate::error::{param_err, Error, Result};
use crate::io::{CsvTable, CsvValue};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Diagonal synthetic spectrum; the leading `r` values are 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    /// `ε` after the head.
    LowRankPlusNoise { r: usize, eps: f64 },
    /// `(i − R + 1)^{−p}` after the head.
    PolyDecay { r: usize, p: f64 },
    /// `10^{−q(i − R)}` after the head.
    ExpDecay { r: usize, q: f64 },
}

impl SpectrumKind {
    pub fn head(&self) -> usize {
        match *self {
            SpectrumKind::LowRankPlusNoise { r, .. } | SpectrumKind::PolyDecay { r, .. } | SpectrumKind::ExpDecay { r, .. } => r,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpectrumKind::LowRankPlusNoise { eps, .. } => eps > 0.0 && eps <= 1.0,
            SpectrumKind::PolyDecay { p, .. } => p > 0.0 && p.is_finite(),
            SpectrumKind::ExpDecay { q, .. } => q > 0.0 && q.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(param_err(format!("invalid spectrum parameters: {self}")))
        }
    }

    /// The diagonal `d₁ ≥ ⋯ ≥ d_n > 0` (1-based formulas, 0-based storage).
    pub fn diagonal(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let r = self.head();
        if n == 0 || n < r {
            return Err(param_err(format!("testbed needs n >= R and n >= 1, got n = {n}, R = {r}")));
        }
        Ok((1..=n)
            .map(|i| {
                if i <= r {
                    return 1.0;
                }
                let v = match *self {
                    SpectrumKind::LowRankPlusNoise { eps, .. } => eps,
                    SpectrumKind::PolyDecay { p, .. } => ((i - r + 1) as f64).powf(-p),
                    SpectrumKind::ExpDecay { q, .. } => 10f64.powf(-q * (i - r) as f64),
                };
                // Fast exponential tails underflow; keep them positive.
                v.max(f64::MIN_POSITIVE)
            })
            .collect())
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpectrumKind::LowRankPlusNoise { r, eps } => write!(f, "lowrank-noise(R={r},eps={eps})"),
            SpectrumKind::PolyDecay { r, p } => write!(f, "poly(R={r},p={p})"),
            SpectrumKind::ExpDecay { r, q } => write!(f, "exp(R={r},q={q})"),
        }
    }
}

/// `name` or `name:R:param`, e.g. `poly:10:2`; the name alone takes the first default.
impl FromStr for SpectrumKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || param_err(format!("cannot parse spectrum `{s}` (expected name[:R:param])"));
        let (r, x) = match parts.len() {
            1 => (DEFAULT_R, None),
            3 => (parts[1].parse().map_err(|_| bad())?, Some(parts[2].parse::<f64>().map_err(|_| bad())?)),
            _ => return Err(bad()),
        };
        let kind = match parts[0] {
            "lowrank-noise" | "lownoise" => SpectrumKind::LowRankPlusNoise { r, eps: x.unwrap_or(1e-1) },
            "poly" => SpectrumKind::PolyDecay { r, p: x.unwrap_or(0.5) },
            "exp" => SpectrumKind::ExpDecay { r, q: x.unwrap_or(0.1) },
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

pub const DEFAULT_R: usize = 10;

/// Twelve spectra: four noise levels, four polynomial and four exponential rates.
pub fn default_testbed() -> Vec<SpectrumKind> {
    let r = DEFAULT_R;
    let mut out = Vec::with_capacity(12);
    out.extend([1e-1, 1e-2, 1e-3, 1e-4].map(|eps| SpectrumKind::LowRankPlusNoise { r, eps }));
    out.extend([0.5, 1.0, 1.5, 2.0].map(|p| SpectrumKind::PolyDecay { r, p }));
    out.extend([0.1, 0.25, 0.5, 1.0].map(|q| SpectrumKind::ExpDecay { r, q }));
    out
}

/// `diag(d₁, …, d_n)` as a dense matrix.
pub fn testbed_generate(kind: SpectrumKind, n: usize) -> Result<DenseMatrix<f64>> {
    Ok(DenseMatrix::from_diag(&kind.diagonal(n)?))
}

pub fn testbed_sparse(kind: SpectrumKind, n: usize) -> Result<CsrMatrix<f64>> {
    Ok(CsrMatrix::from_diag(&kind.diagonal(n)?))
}

pub const TESTBED_SCHEMA: [&str; 4] = ["spectrum", "n", "index", "value"];

pub fn testbed_table(kinds: &[SpectrumKind], n: usize) -> Result<CsvTable> {
    let mut t = CsvTable::new(&TESTBED_SCHEMA);
    for kind in kinds {
        for (i, v) in kind.diagonal(n)?.into_iter().enumerate() {
            t.push(vec![CsvValue::from(kind.to_string()), n.into(), i.into(), v.into()])?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        let p = testbed_generate(SpectrumKind::PolyDecay { r: 5, p: 1.0 }, 8).unwrap();
        assert_eq!(p, DenseMatrix::from_diag(&[1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0 / 3.0, 0.25]));
        let e = SpectrumKind::ExpDecay { r: 1, q: 1.0 }.diagonal(3).unwrap();
        assert!((e[1] - 0.1).abs() < 1e-15 && (e[2] - 0.01).abs() < 1e-15 && e[0] == 1.0);
        let id = testbed_generate(SpectrumKind::LowRankPlusNoise { r: 6, eps: 1e-2 }, 6).unwrap();
        assert_eq!(id, DenseMatrix::identity(6));
    }

    #[test]
    fn invariants_and_errors() {
        for kind in default_testbed() {
            let d = kind.diagonal(200).unwrap();
            assert!(d.windows(2).all(|w| w[0] >= w[1]) && d.iter().all(|&x| x > 0.0));
        }
        assert_eq!(default_testbed().len(), 12);
        assert!(SpectrumKind::PolyDecay { r: 5, p: 1.0 }.diagonal(4).is_err());
        assert!(SpectrumKind::ExpDecay { r: 1, q: -1.0 }.diagonal(4).is_err());
        assert!(SpectrumKind::LowRankPlusNoise { r: 1, eps: 0.0 }.diagonal(4).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!("poly:5:2".parse::<SpectrumKind>().unwrap(), SpectrumKind::PolyDecay { r: 5, p: 2.0 });
        assert_eq!("exp".parse::<SpectrumKind>().unwrap(), SpectrumKind::ExpDecay { r: 10, q: 0.1 });
        assert!("exp:3".parse::<SpectrumKind>().is_err());
        assert!("wave".parse::<SpectrumKind>().is_err());
        let t = testbed_table(&[SpectrumKind::ExpDecay { r: 1, q: 1.0 }], 3).unwrap();
        assert_eq!(t.len(), 3);
    }
}
