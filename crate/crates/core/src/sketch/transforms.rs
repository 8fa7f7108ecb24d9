//! Unitary trigonometric transforms: Walsh–Hadamard, orthonormal DCT-II, DFT.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{param_err, Error, Result};
use crate::scalar::{Complex64, Field, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Wht,
    Dct,
    Dft,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Wht => "wht",
            TransformKind::Dct => "dct",
            TransformKind::Dft => "dft",
        }
    }

    /// DCT for real data, DFT for complex, WHT only when asked for.
    pub fn default_for(field: Field) -> Self {
        match field {
            Field::Real => TransformKind::Dct,
            Field::Complex => TransformKind::Dft,
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wht" | "hadamard" => Ok(TransformKind::Wht),
            "dct" => Ok(TransformKind::Dct),
            "dft" | "fft" => Ok(TransformKind::Dft),
            other => Err(param_err(format!("unknown transform `{other}`"))),
        }
    }
}

/// In-place normalized Walsh–Hadamard transform (its own inverse).
pub fn wht_in_place<T: Scalar>(x: &mut [T]) -> Result<()> {
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(param_err(format!("WHT length {n} is not a power of two")));
    }
    let mut h = 1;
    while h < n {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    x.iter_mut().for_each(|v| *v = v.scale(s));
    Ok(())
}

pub fn wht<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    let mut y = x.to_vec();
    wht_in_place(&mut y)?;
    Ok(y)
}

/// A planned unitary transform of fixed length.
#[derive(Clone)]
pub struct Transform {
    kind: TransformKind,
    n: usize,
    fwd: Option<Arc<dyn Fft<f64>>>,
    inv: Option<Arc<dyn Fft<f64>>>,
    // e^{-iπk/(2n)} for the DCT.
    twiddle: Vec<Complex64>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transform({}, n = {})", self.kind, self.n)
    }
}

impl Transform {
    pub fn new(kind: TransformKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(param_err("transform length must be positive"));
        }
        if kind == TransformKind::Wht && !n.is_power_of_two() {
            return Err(param_err(format!("WHT length {n} is not a power of two")));
        }
        let (fwd, inv, twiddle) = match kind {
            TransformKind::Wht => (None, None, Vec::new()),
            _ => {
                let mut planner = FftPlanner::new();
                let tw = if kind == TransformKind::Dct {
                    (0..n)
                        .map(|k| Complex64::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2 * n) as f64))
                        .collect()
                } else {
                    Vec::new()
                };
                (Some(planner.plan_fft_forward(n)), Some(planner.plan_fft_inverse(n)), tw)
            }
        };
        Ok(Transform { kind, n, fwd, inv, twiddle })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn dct_forward_real(&self, x: &mut [f64], buf: &mut [Complex64]) {
        let n = self.n;
        // Even-odd permutation, FFT, then a quarter-sample twiddle.
        for i in 0..n.div_ceil(2) {
            buf[i] = Complex64::new(x[2 * i], 0.0);
        }
        for i in 0..n / 2 {
            buf[n - 1 - i] = Complex64::new(x[2 * i + 1], 0.0);
        }
        self.fwd.as_ref().expect("planned").process(buf);
        let s0 = (1.0 / n as f64).sqrt();
        let s = (2.0 / n as f64).sqrt();
        for k in 0..n {
            let y = (self.twiddle[k] * buf[k]).re;
            x[k] = y * if k == 0 { s0 } else { s };
        }
    }

    fn dct_adjoint_real(&self, x: &mut [f64], buf: &mut [Complex64]) {
        let n = self.n;
        let s0 = (1.0 / n as f64).sqrt();
        let s = (2.0 / n as f64).sqrt();
        let y = |k: usize| -> f64 {
            if k == n {
                0.0
            } else {
                x[k] / if k == 0 { s0 } else { s }
            }
        };
        for (k, b) in buf.iter_mut().enumerate() {
            *b = self.twiddle[k].conj() * Complex64::new(y(k), -y(n - k));
        }
        self.inv.as_ref().expect("planned").process(buf);
        let inv_n = 1.0 / n as f64;
        for i in 0..n.div_ceil(2) {
            x[2 * i] = buf[i].re * inv_n;
        }
        for i in 0..n / 2 {
            x[2 * i + 1] = buf[n - 1 - i].re * inv_n;
        }
    }

    fn apply<T: Scalar>(&self, x: &mut [T], adjoint: bool) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!("transform of length {} applied to {}", self.n, x.len())));
        }
        match self.kind {
            TransformKind::Wht => wht_in_place(x),
            TransformKind::Dct => {
                let mut buf = vec![Complex64::default(); self.n];
                let mut re: Vec<f64> = x.iter().map(|v| v.re()).collect();
                if adjoint {
                    self.dct_adjoint_real(&mut re, &mut buf);
                } else {
                    self.dct_forward_real(&mut re, &mut buf);
                }
                if T::is_complex() {
                    let mut im: Vec<f64> = x.iter().map(|v| v.im()).collect();
                    if adjoint {
                        self.dct_adjoint_real(&mut im, &mut buf);
                    } else {
                        self.dct_forward_real(&mut im, &mut buf);
                    }
                    for (v, (&a, &b)) in x.iter_mut().zip(re.iter().zip(&im)) {
                        *v = T::from_parts(a, b);
                    }
                } else {
                    for (v, &a) in x.iter_mut().zip(&re) {
                        *v = T::from_f64(a);
                    }
                }
                Ok(())
            }
            TransformKind::Dft => {
                if !T::is_complex() {
                    return Err(param_err("the DFT needs the complex field"));
                }
                let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(v.re(), v.im())).collect();
                let plan = if adjoint { &self.inv } else { &self.fwd };
                plan.as_ref().expect("planned").process(&mut buf);
                let s = 1.0 / (self.n as f64).sqrt();
                for (v, b) in x.iter_mut().zip(&buf) {
                    *v = T::from_parts(b.re * s, b.im * s);
                }
                Ok(())
            }
        }
    }

    /// `x ← F x`
    pub fn forward<T: Scalar>(&self, x: &mut [T]) -> Result<()> {
        self.apply(x, false)
    }

    /// `x ← F* x`
    pub fn adjoint<T: Scalar>(&self, x: &mut [T]) -> Result<()> {
        self.apply(x, true)
    }
}

/// Orthonormal DCT-II.
pub fn dct2_ortho(x: &[f64]) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    Transform::new(TransformKind::Dct, x.len())?.forward(&mut y)?;
    Ok(y)
}

/// DFT scaled by `1/√n`.
pub fn dft_unitary(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut y = x.to_vec();
    Transform::new(TransformKind::Dft, x.len())?.forward(&mut y)?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dct(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let s: f64 = (0..n).map(|i| x[i] * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos()).sum();
                s * if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() }
            })
            .collect()
    }

    #[test]
    fn wht_base_cases() {
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(wht(&[1.0, 0.0]).unwrap(), vec![h, h]);
        assert_eq!(wht(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.5; 4]);
        assert!(wht(&[1.0, 2.0, 3.0]).is_err());
        assert!(Transform::new(TransformKind::Wht, 6).is_err());
    }

    #[test]
    fn dft_of_constant() {
        let c = Complex64::new(0.3, -1.0);
        let y = dft_unitary(&vec![c; 8]).unwrap();
        assert!((y[0] - c * 8f64.sqrt()).norm() < 1e-14);
        assert!(y[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn dct_matches_definition() {
        for n in [1usize, 2, 3, 5, 8, 13] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 5) as f64 - 1.7).collect();
            let fast = dct2_ortho(&x).unwrap();
            let slow = naive_dct(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unitary_and_adjoint_inverts() {
        for kind in [TransformKind::Wht, TransformKind::Dct, TransformKind::Dft] {
            for n in [1usize, 4, 16, 64] {
                let t = Transform::new(kind, n).unwrap();
                let x: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
                let mut y = x.clone();
                t.forward(&mut y).unwrap();
                let nx: f64 = x.iter().map(|v| v.norm_sqr()).sum();
                let ny: f64 = y.iter().map(|v| v.norm_sqr()).sum();
                assert!((nx.sqrt() - ny.sqrt()).abs() < 1e-12 * nx.sqrt().max(1.0));
                t.adjoint(&mut y).unwrap();
                assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-12), "{kind} n={n}");
            }
        }
        // Odd length DCT adjoint.
        let t = Transform::new(TransformKind::Dct, 7).unwrap();
        let x: Vec<f64> = (0..7).map(|i| i as f64 * 0.5 - 1.0).collect();
        let mut y = x.clone();
        t.forward(&mut y).unwrap();
        t.adjoint(&mut y).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn dft_rejects_real() {
        let t = Transform::new(TransformKind::Dft, 4).unwrap();
        assert!(t.forward(&mut [1.0f64; 4]).is_err());
    }
}
