use crate::error::{dim_err, param_err, Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Largest number of outcomes either oracle will enumerate.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

fn check_self_adjoint<T: Scalar>(m: &DenseMatrix<T>, d: usize) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(dim_err(format!("M is {:?}, expected {d}x{d}", m.shape())));
    }
    m.check_finite()?;
    if m.hermitian_defect() > 1e-12 * m.max_abs().max(1.0) {
        return Err(param_err("M must be self-adjoint"));
    }
    Ok(())
}

fn check_budget(needed: Option<u128>) -> Result<u128> {
    match needed {
        Some(n) if n <= ENUMERATION_BUDGET => Ok(n),
        n => Err(Error::BudgetExceeded {
            needed: n.unwrap_or(u128::MAX),
            budget: ENUMERATION_BUDGET,
        }),
    }
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `Σ_{i≠j} (|mᵢⱼ|² + Re mᵢⱼ²)` and `Σ mᵢᵢ²`, `tr M`.
fn pieces<T: Scalar>(m: &DenseMatrix<T>) -> (f64, f64, f64) {
    let d = m.rows();
    let mut off = 0.0;
    let mut diag_sq = 0.0;
    let mut tr = 0.0;
    for j in 0..d {
        for i in 0..d {
            let x = m[(i, j)];
            if i == j {
                diag_sq += x.re() * x.re();
                tr += x.re();
            } else {
                off += x.abs_sq() + (x * x).re();
            }
        }
    }
    (off, diag_sq, tr)
}

fn identity_defect(acc: &[f64], d: usize, outcomes: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc[i * d + j] / outcomes - want).abs());
        }
    }
    worst
}

/// Exact second moment of a `d × b` CountSketch block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSketchMoments {
    /// `E[(tr(M ΦΦ*))²]` by enumeration.
    pub mom: f64,
    /// `(tr M)² + (1/b) Σ_{i≠j} (|mᵢⱼ|² + Re mᵢⱼ²)`
    pub exact: f64,
    /// `(tr M)² + (2/b) ‖M‖_F²`
    pub bound: f64,
    /// `max |E[ΦΦ*] − I|` over entries.
    pub first_moment_error: f64,
    pub outcomes: u128,
}

impl CountSketchMoments {
    pub fn within_bound(&self) -> bool {
        self.mom <= self.bound + 1e-12 * self.bound.abs().max(1.0)
    }
}

pub fn countsketch_moment_exact<T: Scalar>(b: usize, m: &DenseMatrix<T>) -> f64 {
    let (off, _, tr) = pieces(m);
    tr * tr + off / b as f64
}

/// Enumerates all `(2b)^d` sign and bucket assignments of the rows of `Φ`.
pub fn countsketch_moment_oracle<T: Scalar>(d: usize, b: usize, m: &DenseMatrix<T>) -> Result<CountSketchMoments> {
    if d == 0 || b == 0 {
        return Err(param_err("CountSketch oracle needs d, b >= 1"));
    }
    check_self_adjoint(m, d)?;
    let outcomes = check_budget((2 * b as u128).checked_pow(d as u32))?;
    let mut sign = vec![1.0f64; d];
    let mut bucket = vec![0usize; d];
    let mut first = vec![0.0f64; d * d];
    let mut mom = 0.0;
    for code in 0..outcomes {
        let mut c = code;
        for i in 0..d {
            let digit = (c % (2 * b as u128)) as usize;
            c /= 2 * b as u128;
            sign[i] = if digit % 2 == 0 { 1.0 } else { -1.0 };
            bucket[i] = digit / 2;
        }
        let mut t = T::zero();
        for i in 0..d {
            for j in 0..d {
                if bucket[i] == bucket[j] {
                    let s = sign[i] * sign[j];
                    first[i * d + j] += s;
                    t += m[(j, i)].scale(s);
                }
            }
        }
        mom += t.abs_sq();
    }
    let n = outcomes as f64;
    let (off, _, tr) = pieces(m);
    let fro_sq = m.fro_norm_sq();
    Ok(CountSketchMoments {
        mom: mom / n,
        exact: tr * tr + off / b as f64,
        bound: tr * tr + 2.0 / b as f64 * fro_sq,
        first_moment_error: identity_defect(&first, d, n),
        outcomes,
    })
}

/// Exact second moment of one SparseCol column (`k = 1`, `W = ωω*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseColMoments {
    /// `E[(ω* M ω)²]` by enumeration.
    pub mom: f64,
    pub exact: f64,
    /// `(d/ξ) Σ mᵢᵢ² + 2((ξ−1)/ξ)(tr M)² + 4((ξ−1)/ξ)‖M‖_F²`
    pub printed: f64,
    pub first_moment_error: f64,
    pub outcomes: u128,
}

/// `(d/ξ) Σ mᵢᵢ² + d(ξ−1)/(ξ(d−1)) · [(tr M)² − Σ mᵢᵢ² + Σ_{i≠j}(|mᵢⱼ|² + Re mᵢⱼ²)]`
pub fn sparsecol_moment_exact<T: Scalar>(d: usize, xi: usize, m: &DenseMatrix<T>) -> f64 {
    let (off, diag_sq, tr) = pieces(m);
    let (d, x) = (d as f64, xi as f64);
    let pair = if xi > 1 { d * (x - 1.0) / (x * (d - 1.0)) } else { 0.0 };
    d / x * diag_sq + pair * (tr * tr - diag_sq + off)
}

pub fn sparsecol_moment_printed<T: Scalar>(d: usize, xi: usize, m: &DenseMatrix<T>) -> f64 {
    let (_, diag_sq, tr) = pieces(m);
    let (d, x) = (d as f64, xi as f64);
    let c = (x - 1.0) / x;
    d / x * diag_sq + 2.0 * c * tr * tr + 4.0 * c * m.fro_norm_sq()
}

/// Enumerates all `C(d, ξ) · 2^ξ` supports and sign patterns of `ω`.
pub fn sparsecol_moment_oracle<T: Scalar>(d: usize, xi: usize, m: &DenseMatrix<T>) -> Result<SparseColMoments> {
    if xi == 0 || xi > d {
        return Err(param_err(format!("SparseCol oracle needs 1 <= xi <= d, got xi = {xi}, d = {d}")));
    }
    check_self_adjoint(m, d)?;
    let supports = binomial(d, xi);
    let outcomes = check_budget(supports.and_then(|s| s.checked_mul(1u128.checked_shl(xi as u32)?)))?;
    let scale = d as f64 / xi as f64;
    let mut first = vec![0.0f64; d * d];
    let mut mom = 0.0;
    let mut support: Vec<usize> = (0..xi).collect();
    loop {
        for pattern in 0u64..(1u64 << xi) {
            let sign = |a: usize| if pattern >> a & 1 == 0 { 1.0 } else { -1.0 };
            let mut q = T::zero();
            for (a, &i) in support.iter().enumerate() {
                for (b, &j) in support.iter().enumerate() {
                    let s = scale * sign(a) * sign(b);
                    first[i * d + j] += s;
                    q += m[(i, j)].scale(s);
                }
            }
            mom += q.abs_sq();
        }
        // Next combination in lexicographic order.
        let Some(pos) = (0..xi).rev().find(|&p| support[p] < d - xi + p) else {
            break;
        };
        support[pos] += 1;
        for p in pos + 1..xi {
            support[p] = support[p - 1] + 1;
        }
    }
    let n = outcomes as f64;
    Ok(SparseColMoments {
        mom: mom / n,
        exact: sparsecol_moment_exact(d, xi, m),
        printed: sparsecol_moment_printed(d, xi, m),
        first_moment_error: identity_defect(&first, d, n),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::scalar::Complex64;
    use crate::sketch::dist::normal;

    fn random_hermitian<T: Scalar>(d: usize, seed: u64) -> DenseMatrix<T> {
        let mut rng = RngStream::new(seed).rng();
        let g = DenseMatrix::<T>::from_fn(d, d, |_, _| normal(&mut rng));
        g.hermitian_part()
    }

    #[test]
    fn countsketch_small_cases() {
        let id = DenseMatrix::<f64>::identity(2);
        let one = countsketch_moment_oracle(2, 1, &id).unwrap();
        assert_eq!(one.first_moment_error, 0.0);
        let two = countsketch_moment_oracle(2, 2, &id).unwrap();
        assert_eq!(two.first_moment_error, 0.0);
        assert!(two.mom <= 6.0 && two.within_bound());
        assert_eq!(two.mom, 4.0);
        let zero = countsketch_moment_oracle(2, 2, &DenseMatrix::<f64>::zeros(2, 2)).unwrap();
        assert_eq!(zero.mom, 0.0);
    }

    #[test]
    fn countsketch_matches_closed_form() {
        for d in 1..=4 {
            for b in 1..=3 {
                for s in 0..3 {
                    let m = random_hermitian::<f64>(d, 100 * d as u64 + 10 * b as u64 + s);
                    let r = countsketch_moment_oracle(d, b, &m).unwrap();
                    assert!((r.mom - r.exact).abs() <= 1e-12 * r.exact.max(1.0), "{d} {b}");
                    assert!(r.within_bound());
                    let c = random_hermitian::<Complex64>(d, s);
                    let rc = countsketch_moment_oracle(d, b, &c).unwrap();
                    assert!((rc.mom - rc.exact).abs() <= 1e-12 * rc.exact.max(1.0));
                    assert!(rc.within_bound());
                }
            }
        }
    }

    #[test]
    fn sparsecol_small_cases() {
        let id = DenseMatrix::<f64>::identity(2);
        let a = sparsecol_moment_oracle(2, 1, &id).unwrap();
        assert_eq!((a.mom, a.printed, a.exact), (4.0, 4.0, 4.0));
        let b = sparsecol_moment_oracle(2, 2, &id).unwrap();
        assert_eq!(b.printed, 10.0);
        // ω = (±1, ±1) so ω*ω = 2 surely.
        assert_eq!(b.mom, 4.0);
        assert_eq!(b.exact, 4.0);
        assert_eq!(b.first_moment_error, 0.0);
        assert_eq!(sparsecol_moment_oracle(3, 2, &DenseMatrix::<f64>::zeros(3, 3)).unwrap().mom, 0.0);
    }

    #[test]
    fn sparsecol_matches_exact_form() {
        for d in 1..=4 {
            for xi in 1..=3.min(d) {
                let m = random_hermitian::<f64>(d, 7 * d as u64 + xi as u64);
                let r = sparsecol_moment_oracle(d, xi, &m).unwrap();
                assert!((r.mom - r.exact).abs() <= 1e-12 * r.exact.max(1.0));
                assert!(r.first_moment_error < 1e-14);
                if xi == 1 {
                    assert!((r.mom - r.printed).abs() <= 1e-12 * r.mom.max(1.0));
                }
                let c = random_hermitian::<Complex64>(d, xi as u64);
                let rc = sparsecol_moment_oracle(d, xi, &c).unwrap();
                assert!((rc.mom - rc.exact).abs() <= 1e-12 * rc.exact.max(1.0));
            }
        }
    }

    #[test]
    fn budgets_and_inputs() {
        let m = DenseMatrix::<f64>::identity(12);
        assert!(matches!(
            countsketch_moment_oracle(12, 3, &m),
            Err(Error::BudgetExceeded { needed, .. }) if needed == 6u128.pow(12)
        ));
        let big = DenseMatrix::<f64>::identity(40);
        assert!(matches!(sparsecol_moment_oracle(40, 20, &big), Err(Error::BudgetExceeded { .. })));
        let skew = DenseMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!(countsketch_moment_oracle(2, 2, &skew).is_err());
        assert!(sparsecol_moment_oracle(2, 3, &DenseMatrix::<f64>::identity(2)).is_err());
    }
}
