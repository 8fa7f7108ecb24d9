use rayon::prelude::*;

use crate::error::{param_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{check_adjoint, check_apply, check_right, BaseDist, TestMatrix};

/// `ω⁽¹⁾ ⊗ ⋯ ⊗ ω⁽ˡ⁾`; the first factor indexes the most significant digit.
pub fn kron_expand<T: Scalar>(factors: &[&[T]]) -> Vec<T> {
    let mut out = vec![T::one()];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for &p in &out {
            next.extend(f.iter().map(|&w| p * w));
        }
        out = next;
    }
    out
}

/// Contracts `v` against the Kronecker product of `factors`, conjugating them
/// when asked. `v` may be shorter than the full product (zero padding).
fn kron_contract<T: Scalar>(factors: &[&[T]], v: &[T], conj: bool, buf: &mut Vec<T>) -> T {
    let full: usize = factors.iter().map(|f| f.len()).product();
    assert!(v.len() <= full, "vector longer than the Kronecker product");
    buf.clear();
    buf.extend_from_slice(v);
    buf.resize(full, T::zero());
    let mut len = full;
    // Peel off the least significant mode each round.
    for f in factors.iter().rev() {
        let m = f.len();
        let outer = len / m;
        for p in 0..outer {
            let chunk = &buf[p * m..(p + 1) * m];
            let s = if conj {
                chunk.iter().zip(f.iter()).map(|(&x, w)| w.conj() * x).sum()
            } else {
                chunk.iter().zip(f.iter()).map(|(&x, &w)| w * x).sum()
            };
            buf[p] = s;
        }
        len = outer;
    }
    buf[0]
}

/// `⟨ω⁽¹⁾ ⊗ ⋯ ⊗ ω⁽ˡ⁾, v⟩ = Σᵢ conj(Πω) vᵢ` without forming the product.
pub fn kron_inner<T: Scalar>(factors: &[&[T]], v: &[T]) -> T {
    kron_contract(factors, v, true, &mut Vec::new())
}

/// Khatri–Rao test matrix: column `j` is `k^{-1/2} ω_j⁽¹⁾ ⊗ ⋯ ⊗ ω_j⁽ˡ⁾`.
///
/// When `d < d₀^ℓ` only the first `d` coordinates are kept.
#[derive(Debug, Clone)]
pub struct KhatriRaoTM<T> {
    d: usize,
    d0: usize,
    ell: usize,
    k: usize,
    base: BaseDist,
    // [column][factor][entry]
    factors: Vec<T>,
}

impl<T: Scalar> KhatriRaoTM<T> {
    /// Full dimension `d = d₀^ℓ`. Column `j` uses `stream.child(j)`.
    pub fn new(d0: usize, ell: usize, k: usize, base: BaseDist, stream: &RngStream) -> Result<Self> {
        let d = d0
            .checked_pow(ell as u32)
            .ok_or_else(|| param_err(format!("{d0}^{ell} overflows")))?;
        Self::padded(d, d0, ell, k, base, stream)
    }

    /// Smallest order `ℓ` with `d₀^ℓ ≥ d`, keeping the leading `d` coordinates.
    pub fn covering(d: usize, d0: usize, k: usize, base: BaseDist, stream: &RngStream) -> Result<Self> {
        if d0 < 2 {
            return Err(param_err("covering a dimension needs d0 >= 2"));
        }
        let mut ell = 1;
        let mut full = d0;
        while full < d {
            full = full.saturating_mul(d0);
            ell += 1;
        }
        Self::padded(d, d0, ell, k, base, stream)
    }

    fn padded(d: usize, d0: usize, ell: usize, k: usize, base: BaseDist, stream: &RngStream) -> Result<Self> {
        if d0 == 0 || ell == 0 || k == 0 || d == 0 {
            return Err(param_err("Khatri-Rao needs d0, ell, k >= 1"));
        }
        base.check_field::<T>()?;
        let per_col = ell * d0;
        let mut factors = vec![T::zero(); k * per_col];
        factors.par_chunks_mut(per_col).enumerate().for_each(|(j, col)| {
            let mut rng = stream.child(j as u64).rng();
            for f in col.chunks_exact_mut(d0) {
                base.fill(&mut rng, f);
            }
        });
        Ok(KhatriRaoTM { d, d0, ell, k, base, factors })
    }

    /// Builds from explicit factor vectors; `cols[j][m]` is factor `m` of column `j`.
    pub fn from_factors(cols: &[Vec<Vec<T>>], base: BaseDist) -> Result<Self> {
        let k = cols.len();
        let ell = cols.first().map_or(0, |c| c.len());
        let d0 = cols.first().and_then(|c| c.first()).map_or(0, |f| f.len());
        if k == 0 || ell == 0 || d0 == 0 {
            return Err(param_err("from_factors needs at least one nonempty column"));
        }
        let mut factors = Vec::with_capacity(k * ell * d0);
        for c in cols {
            if c.len() != ell || c.iter().any(|f| f.len() != d0) {
                return Err(param_err("factor shapes differ across columns"));
            }
            c.iter().for_each(|f| factors.extend_from_slice(f));
        }
        Ok(KhatriRaoTM {
            d: d0.pow(ell as u32),
            d0,
            ell,
            k,
            base,
            factors,
        })
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn base(&self) -> BaseDist {
        self.base
    }

    /// Factor slices of column `j` (unscaled).
    pub fn column_factors(&self, j: usize) -> Vec<&[T]> {
        let per_col = self.ell * self.d0;
        self.factors[j * per_col..(j + 1) * per_col].chunks_exact(self.d0).collect()
    }

    /// Column `j` of `Ω`, scale included.
    pub fn column(&self, j: usize) -> Vec<T> {
        let s = 1.0 / (self.k as f64).sqrt();
        let mut v = kron_expand(&self.column_factors(j));
        v.truncate(self.d);
        v.iter_mut().for_each(|x| *x = x.scale(s));
        v
    }

    /// The entrywise complex conjugate `Ω̄`.
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        out.factors.iter_mut().for_each(|x| *x = x.conj());
        out
    }

    fn contract_all(&self, cols: &DenseMatrix<T>, conj: bool) -> Vec<T> {
        // entry (j, c) = contraction of column j against cols[:, c]
        let m = cols.cols();
        let s = 1.0 / (self.k as f64).sqrt();
        let mut out = vec![T::zero(); self.k * m];
        out.par_chunks_mut(self.k).enumerate().for_each_init(Vec::new, |buf, (c, o)| {
            let v = cols.col(c);
            for (j, x) in o.iter_mut().enumerate() {
                *x = kron_contract(&self.column_factors(j), v, conj, buf).scale(s);
            }
        });
        out
    }
}

impl<T: Scalar> TestMatrix<T> for KhatriRaoTM<T> {
    fn d(&self) -> usize {
        self.d
    }

    fn k(&self) -> usize {
        self.k
    }

    fn label(&self) -> String {
        format!("khatrirao(d0={},ell={},{})", self.d0, self.ell, self.base)
    }

    fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_adjoint(self.d, b.rows())?;
        DenseMatrix::from_col_major(self.k, b.cols(), self.contract_all(b, true))
    }

    fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_apply(self.k, c.rows())?;
        let (d, m) = (self.d, c.cols());
        let acc = (0..self.k)
            .into_par_iter()
            .fold(
                || vec![T::zero(); d * m],
                |mut acc, j| {
                    let col = self.column(j);
                    for q in 0..m {
                        let w = c[(j, q)];
                        for (a, &x) in acc[q * d..(q + 1) * d].iter_mut().zip(&col) {
                            *a += x * w;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![T::zero(); d * m],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        DenseMatrix::from_col_major(d, m, acc)
    }

    fn apply_right(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d, a.cols())?;
        // (AΩ)[i, j] is an unconjugated contraction of row i of A.
        let at = a.transpose();
        let t = DenseMatrix::from_col_major(self.k, a.rows(), self.contract_all(&at, false))?;
        Ok(t.transpose())
    }

    fn apply_right_sparse(&self, a: &CsrMatrix<T>) -> Result<DenseMatrix<T>> {
        check_right(self.d, a.cols())?;
        let n = a.rows();
        let mut out = vec![T::zero(); n * self.k];
        out.par_chunks_mut(n).enumerate().for_each(|(j, o)| {
            let col = self.column(j);
            o.copy_from_slice(&a.matvec(&col));
        });
        DenseMatrix::from_col_major(n, self.k, out)
    }

    fn materialize(&self) -> DenseMatrix<T> {
        let mut data = Vec::with_capacity(self.d * self.k);
        for j in 0..self.k {
            data.extend(self.column(j));
        }
        DenseMatrix::from_col_major(self.d, self.k, data).expect("shape")
    }
}
