//! Sparse test matrices stored in CSR form.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{param_err, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::{check_adjoint, check_apply, check_right, SignDist, TestMatrix};

/// Shared apply paths for families whose `Ω` is an explicit CSR matrix.
macro_rules! csr_test_matrix {
    ($ty:ident, $label:expr) => {
        impl<T: Scalar> TestMatrix<T> for $ty<T> {
            fn d(&self) -> usize {
                self.omega.rows()
            }

            fn k(&self) -> usize {
                self.omega.cols()
            }

            fn label(&self) -> String {
                let f: &dyn Fn(&Self) -> String = &$label;
                f(self)
            }

            fn apply_adjoint(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
                check_adjoint(self.d(), b.rows())?;
                Ok(self.omega.adjoint_mul_dense(b))
            }

            fn apply(&self, c: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
                check_apply(self.k(), c.rows())?;
                Ok(self.omega.mul_dense(c))
            }

            fn apply_right(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
                check_right(self.d(), a.cols())?;
                Ok(self.omega.left_mul_dense(a))
            }

            fn apply_right_sparse(&self, a: &CsrMatrix<T>) -> Result<DenseMatrix<T>> {
                check_right(self.d(), a.cols())?;
                Ok(a.mul_sparse_to_dense(&self.omega))
            }

            fn materialize(&self) -> DenseMatrix<T> {
                self.omega.to_dense()
            }

            fn as_sparse(&self) -> Option<&CsrMatrix<T>> {
                Some(&self.omega)
            }
        }
    };
}

/// Assembles CSR storage from rows generated independently per row stream.
fn rows_to_csr<T: Scalar>(d: usize, k: usize, rows: Vec<Vec<(usize, T)>>) -> Result<CsrMatrix<T>> {
    let mut row_ptr = Vec::with_capacity(d + 1);
    row_ptr.push(0);
    let nnz: usize = rows.iter().map(|r| r.len()).sum();
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for mut r in rows {
        r.sort_by_key(|e| e.0);
        for (c, v) in r {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    CsrMatrix::try_new(d, k, row_ptr, col_idx, values)
}

/// `ζ` side-by-side CountSketch blocks; each row has one entry `ϱ/√ζ` per block.
#[derive(Debug, Clone)]
pub struct SparseStackTM<T> {
    omega: CsrMatrix<T>,
    zeta: usize,
    dist: SignDist,
}

impl<T: Scalar> SparseStackTM<T> {
    /// `k = b·ζ`, block size `b`.
    pub fn new(d: usize, zeta: usize, b: usize, dist: SignDist, stream: &RngStream) -> Result<Self> {
        if b == 0 {
            return Err(param_err("SparseStack block size must be positive"));
        }
        Self::with_k(d, b * zeta, zeta, dist, stream)
    }

    /// Blocks of sizes `⌊k/ζ⌋` or `⌈k/ζ⌉` summing to `k`.
    pub fn with_k(d: usize, k: usize, zeta: usize, dist: SignDist, stream: &RngStream) -> Result<Self> {
        if d == 0 || zeta == 0 || k < zeta {
            return Err(param_err(format!("SparseStack needs d >= 1 and k >= zeta >= 1 (d={d}, k={k}, zeta={zeta})")));
        }
        dist.check_field::<T>()?;
        let base = k / zeta;
        let extra = k % zeta;
        let sizes: Vec<usize> = (0..zeta).map(|t| base + usize::from(t < extra)).collect();
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let scale = 1.0 / (zeta as f64).sqrt();
        let rows: Vec<Vec<(usize, T)>> = (0..d)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream.child(i as u64).rng();
                (0..zeta)
                    .map(|t| {
                        let s = rng.random_range(0..sizes[t]);
                        (offsets[t] + s, dist.sample::<T, _>(&mut rng).scale(scale))
                    })
                    .collect()
            })
            .collect();
        Ok(SparseStackTM {
            omega: rows_to_csr(d, k, rows)?,
            zeta,
            dist,
        })
    }

    /// Explicit construction: `selectors[i][t]` is the column within block `t`
    /// for row `i` and `signs[i][t]` its sign. Blocks all have size `b`.
    pub fn from_selectors(b: usize, selectors: &[Vec<usize>], signs: &[Vec<T>]) -> Result<Self> {
        let d = selectors.len();
        let zeta = selectors.first().map_or(0, |r| r.len());
        if d == 0 || zeta == 0 || b == 0 || signs.len() != d {
            return Err(param_err("from_selectors needs nonempty, consistent selectors and signs"));
        }
        let scale = 1.0 / (zeta as f64).sqrt();
        let mut rows = Vec::with_capacity(d);
        for (sel, sg) in selectors.iter().zip(signs) {
            if sel.len() != zeta || sg.len() != zeta || sel.iter().any(|&s| s >= b) {
                return Err(param_err("selector row has the wrong length or an index outside its block"));
            }
            rows.push(sel.iter().zip(sg).enumerate().map(|(t, (&s, &g))| (t * b + s, g.scale(scale))).collect());
        }
        Ok(SparseStackTM {
            omega: rows_to_csr(d, b * zeta, rows)?,
            zeta,
            dist: SignDist::default_for(T::FIELD),
        })
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }
}

csr_test_matrix!(SparseStackTM, |s: &SparseStackTM<T>| format!("sparsestack(zeta={},{})", s.zeta, s.dist));

/// `ζ` nonzeros per row at positions drawn without replacement from all `k` columns.
#[derive(Debug, Clone)]
pub struct SparseUniformTM<T> {
    omega: CsrMatrix<T>,
    zeta: usize,
}

impl<T: Scalar> SparseUniformTM<T> {
    pub fn new(d: usize, k: usize, zeta: usize, dist: SignDist, stream: &RngStream) -> Result<Self> {
        if d == 0 || zeta == 0 || k < zeta {
            return Err(param_err(format!("SparseUniform needs d >= 1 and k >= zeta >= 1 (k={k}, zeta={zeta})")));
        }
        dist.check_field::<T>()?;
        let scale = 1.0 / (zeta as f64).sqrt();
        let rows: Vec<Vec<(usize, T)>> = (0..d)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream.child(i as u64).rng();
                let pos = sample(&mut rng, k, zeta).into_vec();
                pos.into_iter().map(|c| (c, dist.sample::<T, _>(&mut rng).scale(scale))).collect()
            })
            .collect();
        Ok(SparseUniformTM {
            omega: rows_to_csr(d, k, rows)?,
            zeta,
        })
    }
}

csr_test_matrix!(SparseUniformTM, |s: &SparseUniformTM<T>| format!("sparseuniform(zeta={})", s.zeta));

/// iid entries `ζ^{-1/2} ϱ δ` with `δ ~ Bernoulli(ζ/k)`; the row sparsity varies.
#[derive(Debug, Clone)]
pub struct SparseIidTM<T> {
    omega: CsrMatrix<T>,
    zeta: f64,
}

impl<T: Scalar> SparseIidTM<T> {
    pub fn new(d: usize, k: usize, zeta: f64, dist: SignDist, stream: &RngStream) -> Result<Self> {
        if d == 0 || k == 0 || !(zeta > 0.0 && zeta <= k as f64) {
            return Err(param_err(format!("SparseIID needs 0 < zeta <= k (k={k}, zeta={zeta})")));
        }
        dist.check_field::<T>()?;
        let p = zeta / k as f64;
        let geo = Geometric::new(p).map_err(|e| param_err(e.to_string()))?;
        let scale = 1.0 / zeta.sqrt();
        let rows: Vec<Vec<(usize, T)>> = (0..d)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream.child(i as u64).rng();
                let mut row = Vec::new();
                // Skip over Bernoulli failures in one geometric draw.
                let mut pos = 0u64;
                loop {
                    pos = pos.saturating_add(geo.sample(&mut rng));
                    if pos >= k as u64 {
                        break;
                    }
                    row.push((pos as usize, dist.sample::<T, _>(&mut rng).scale(scale)));
                    pos += 1;
                }
                row
            })
            .collect();
        Ok(SparseIidTM {
            omega: rows_to_csr(d, k, rows)?,
            zeta,
        })
    }
}

csr_test_matrix!(SparseIidTM, |s: &SparseIidTM<T>| format!("sparseiid(zeta={})", s.zeta));

/// `ξ` nonzeros per column at rows drawn without replacement, values `ϱ√(d/ξ)/√k`.
#[derive(Debug, Clone)]
pub struct SparseColTM<T> {
    omega: CsrMatrix<T>,
    xi: usize,
}

impl<T: Scalar> SparseColTM<T> {
    pub fn new(d: usize, k: usize, xi: usize, dist: SignDist, stream: &RngStream) -> Result<Self> {
        if k == 0 || xi == 0 || xi > d {
            return Err(param_err(format!("SparseCol needs 1 <= xi <= d and k >= 1 (d={d}, xi={xi})")));
        }
        dist.check_field::<T>()?;
        let scale = (d as f64 / xi as f64).sqrt() / (k as f64).sqrt();
        let cols: Vec<Vec<(usize, T)>> = (0..k)
            .into_par_iter()
            .map(|j| {
                let mut rng = stream.child(j as u64).rng();
                let pos = sample(&mut rng, d, xi).into_vec();
                pos.into_iter().map(|r| (r, dist.sample::<T, _>(&mut rng).scale(scale))).collect()
            })
            .collect();
        let mut triplets = Vec::with_capacity(k * xi);
        for (j, col) in cols.into_iter().enumerate() {
            triplets.extend(col.into_iter().map(|(r, v)| (r, j, v)));
        }
        Ok(SparseColTM {
            omega: CsrMatrix::from_triplets(d, k, &triplets)?,
            xi,
        })
    }

    pub fn xi(&self) -> usize {
        self.xi
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.omega
    }
}

csr_test_matrix!(SparseColTM, |s: &SparseColTM<T>| format!("sparsecol(xi={})", s.xi));
