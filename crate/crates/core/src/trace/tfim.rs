use crate::error::{param_err, Result};
use crate::linalg::CsrMatrix;

/// Transverse-field Ising Hamiltonian on a periodic chain.
#[derive(Debug, Clone)]
pub struct TfimHamiltonian {
    pub ell: usize,
    pub h: f64,
    pub matrix: CsrMatrix<f64>,
}

impl TfimHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `b = (1 + h) ℓ`, which makes `H + bI` psd.
    pub fn default_shift(&self) -> f64 {
        (1.0 + self.h.abs()) * self.ell as f64
    }
}

/// `H = −Σᵢ Zᵢ Z_{i+1 mod ℓ} − h Σᵢ Xᵢ` on `2^ℓ` states.
///
/// Site 1 is the most significant bit of the basis index.
pub fn tfim_hamiltonian(ell: usize, h: f64) -> Result<TfimHamiltonian> {
    if !(2..=24).contains(&ell) {
        return Err(param_err(format!("TFIM needs 2 <= ell <= 24, got {ell}")));
    }
    if !h.is_finite() {
        return Err(param_err("TFIM coupling must be finite"));
    }
    let n = 1usize << ell;
    let bit = |s: usize, i: usize| (s >> (ell - 1 - i)) & 1;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * (ell + 1));
    let mut values = Vec::with_capacity(n * (ell + 1));
    row_ptr.push(0);
    for s in 0..n {
        let mut diag = 0.0;
        for i in 0..ell {
            let j = (i + 1) % ell;
            let zz = if bit(s, i) == bit(s, j) { 1.0 } else { -1.0 };
            diag -= zz;
        }
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(ell + 1);
        row.push((s, diag));
        if h != 0.0 {
            for i in 0..ell {
                row.push((s ^ (1 << (ell - 1 - i)), -h));
            }
        }
        row.sort_by_key(|e| e.0);
        for (c, v) in row {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(TfimHamiltonian {
        ell,
        h,
        matrix: CsrMatrix::try_new(n, n, row_ptr, col_idx, values)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, DenseMatrix};

    fn kron(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let (p, q) = a.shape();
        let (r, s) = b.shape();
        DenseMatrix::from_fn(p * r, q * s, |i, j| a[(i / r, j / s)] * b[(i % r, j % s)])
    }

    fn site_op(op: &DenseMatrix<f64>, i: usize, ell: usize) -> DenseMatrix<f64> {
        let id = DenseMatrix::identity(2);
        let mut m = DenseMatrix::identity(1);
        for s in 0..ell {
            m = kron(&m, if s == i { op } else { &id });
        }
        m
    }

    fn dense_tfim(ell: usize, h: f64) -> DenseMatrix<f64> {
        let z = DenseMatrix::from_diag(&[1.0, -1.0]);
        let x = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let n = 1 << ell;
        let mut hm = DenseMatrix::zeros(n, n);
        for i in 0..ell {
            hm.add_scaled(-1.0, &site_op(&z, i, ell).matmul(&site_op(&z, (i + 1) % ell, ell)));
            hm.add_scaled(-h, &site_op(&x, i, ell));
        }
        hm
    }

    #[test]
    fn two_sites_no_field() {
        let h = tfim_hamiltonian(2, 0.0).unwrap();
        assert_eq!(h.matrix.to_dense(), DenseMatrix::from_diag(&[-2.0, 2.0, 2.0, -2.0]));
    }

    #[test]
    fn two_sites_field_structure() {
        let h = tfim_hamiltonian(2, 1.0).unwrap().matrix.to_dense();
        assert_eq!(h.hermitian_defect(), 0.0);
        for i in 0..4 {
            let off: f64 = (0..4).filter(|&j| j != i).map(|j| h[(i, j)].abs()).sum();
            assert_eq!(off, 2.0);
            for j in 0..4 {
                if i != j && h[(i, j)] != 0.0 {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn matches_kronecker_assembly() {
        for ell in [3usize, 4] {
            let sparse = tfim_hamiltonian(ell, 0.7).unwrap().matrix.to_dense();
            let dense = dense_tfim(ell, 0.7);
            assert!(sparse.sub(&dense).fro_norm() < 1e-14);
            let a = eigvalsh(&sparse).unwrap();
            let b = eigvalsh(&dense).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
        assert!(tfim_hamiltonian(1, 1.0).is_err());
        assert!(tfim_hamiltonian(25, 1.0).is_err());
    }
}
