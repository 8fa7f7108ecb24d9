//! Injectivity and dilation measurements for test matrices, and exact
//! enumeration oracles for the second moments of sparse sketches.

use rayon::prelude::*;

use crate::error::{param_err, Result};
use crate::io::{CsvTable, CsvValue};
use crate::linalg::{eigvalsh, lanczos_extremes, svd_econ, CsrMatrix, DenseMatrix};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;
use crate::sketch::{Family, TestMatrix};

pub mod moments;
pub mod subspace;

pub use moments::{
    countsketch_moment_exact, countsketch_moment_oracle, sparsecol_moment_exact, sparsecol_moment_oracle,
    sparsecol_moment_printed, CountSketchMoments, SparseColMoments, ENUMERATION_BUDGET,
};
pub use subspace::{
    adversarial_q, coherence, kronecker_gaussian_subspace, wht_column_subspace, Subspace, ORTHONORMAL_TOL,
};

pub const OSI_SCHEMA: [&str; 6] = ["family", "r", "k", "trial", "alpha", "beta"];

/// Above this many columns the spectrum comes from the `r × r` Gram matrix instead of an SVD.
const SVD_MAX_COLS: usize = 512;
/// Above this size a sparse coordinate Gram matrix goes to Lanczos.
const DENSE_GRAM_MAX: usize = 2048;
const LANCZOS_TOL: f64 = 1e-8;
const LANCZOS_MAX_ITER: usize = 4000;

/// Linear-interpolation quantile (`q ∈ [0, 1]`); NaN for empty input.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// One measurement of `Ω* Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injectivity {
    /// `σ_min²(Ω* Q)`, zero when `k < r`.
    pub alpha: f64,
    /// `σ_max²(Ω* Q)`
    pub beta: f64,
    /// `‖Ω* Q‖_F² / r`
    pub mean_sq: f64,
}

// Values within roundoff of zero are reported as exactly zero.
fn clamp_alpha(alpha: f64, beta: f64, n: usize) -> f64 {
    if alpha <= 4.0 * n.max(1) as f64 * f64::EPSILON * beta {
        0.0
    } else {
        alpha
    }
}

fn measure_block<T: Scalar>(b: &DenseMatrix<T>) -> Result<Injectivity> {
    let (k, r) = b.shape();
    if r == 0 {
        return Ok(Injectivity {
            alpha: 0.0,
            beta: 0.0,
            mean_sq: 0.0,
        });
    }
    let mean_sq = b.fro_norm_sq() / r as f64;
    let (alpha, beta) = if r <= SVD_MAX_COLS {
        let s = svd_econ(b)?.sigma;
        let smax = s.first().copied().unwrap_or(0.0);
        let smin = if k >= r { s.last().copied().unwrap_or(0.0) } else { 0.0 };
        let smin = if smin <= 4.0 * k.max(r) as f64 * f64::EPSILON * smax { 0.0 } else { smin };
        (smin * smin, smax * smax)
    } else {
        let ev = eigvalsh(&b.gram())?;
        let beta = ev.last().copied().unwrap_or(0.0).max(0.0);
        let alpha = if k >= r { clamp_alpha(ev[0], beta, r) } else { 0.0 };
        (alpha, beta)
    };
    Ok(Injectivity { alpha, beta, mean_sq })
}

/// `(α̂, β̂) = (σ_min², σ_max²)` of `Ω* Q`; `Q` must be orthonormal.
pub fn injectivity_dilation<T: Scalar>(tm: &dyn TestMatrix<T>, q: &DenseMatrix<T>) -> Result<(f64, f64)> {
    let m = injectivity_of(tm, q)?;
    Ok((m.alpha, m.beta))
}

/// [`injectivity_dilation`] with the mean squared singular value.
pub fn injectivity_of<T: Scalar>(tm: &dyn TestMatrix<T>, q: &DenseMatrix<T>) -> Result<Injectivity> {
    subspace::check_orthonormal(q)?;
    measure_block(&tm.apply_adjoint(q)?)
}

/// Measurement for the coordinate subspace `[e₁ ⋯ e_r]`, where `Ω* Q` is the
/// adjoint of the leading `r` rows of `Ω`. Sparse test matrices are never densified
/// beyond `r × k` blocks of moderate size.
pub fn coordinate_injectivity<T: Scalar>(tm: &dyn TestMatrix<T>, r: usize) -> Result<Injectivity> {
    coordinate_injectivity_with(tm, r, DENSE_GRAM_MAX)
}

fn coordinate_injectivity_with<T: Scalar>(tm: &dyn TestMatrix<T>, r: usize, dense_max: usize) -> Result<Injectivity> {
    let (d, k) = (tm.d(), tm.k());
    if r > d {
        return Err(param_err(format!("coordinate subspace needs r <= d, got r = {r}, d = {d}")));
    }
    if r == 0 {
        return measure_block(&DenseMatrix::<T>::zeros(k, 0));
    }
    let Some(omega) = tm.as_sparse() else {
        return measure_block(&tm.materialize().rows_range(0..r).adjoint());
    };
    let ptr = omega.row_ptr();
    let end = ptr[r];
    let rows = CsrMatrix::try_new(r, k, ptr[..=r].to_vec(), omega.col_idx()[..end].to_vec(), omega.values()[..end].to_vec())?;
    if r.min(k) <= dense_max {
        return measure_block(&rows.to_dense().adjoint());
    }
    let mean_sq = rows.fro_norm_sq() / r as f64;
    let rows_adj = rows.adjoint();
    // The nonzero spectrum of R R* and R* R agree; iterate on the smaller side.
    let n = r.min(k);
    let mut rng = RngStream::new(0x6c61_6e63).rng();
    let start: Vec<T> = (0..n).map(|_| normal::<T, _>(&mut rng)).collect();
    let ext = if r <= k {
        lanczos_extremes(n, |x, y| y.copy_from_slice(&rows.matvec(&rows_adj.matvec(x))), &start, LANCZOS_TOL, LANCZOS_MAX_ITER)?
    } else {
        lanczos_extremes(n, |x, y| y.copy_from_slice(&rows_adj.matvec(&rows.matvec(x))), &start, LANCZOS_TOL, LANCZOS_MAX_ITER)?
    };
    let beta = ext.max.max(0.0);
    let alpha = if k >= r { clamp_alpha(ext.min, beta, r) } else { 0.0 };
    Ok(Injectivity { alpha, beta, mean_sq })
}

#[derive(Debug, Clone)]
pub struct OsiConfig<T> {
    pub family: Family,
    pub subspace: Subspace<T>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Certified injectivity is the empirical quantile of `α̂` at this level.
    pub failure_quantile: f64,
}

impl<T: Scalar> OsiConfig<T> {
    pub fn new(family: Family, subspace: Subspace<T>, k: usize, trials: usize) -> Self {
        OsiConfig {
            family,
            subspace,
            k,
            trials,
            seed: 0,
            failure_quantile: 1.0 / 20.0,
        }
    }
}

/// Monte Carlo isotropy check: the trial mean of `‖Ω* Q‖_F² / r` against 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyCheck {
    pub mean: f64,
    pub stderr: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct OsiReport {
    pub family: String,
    pub field: &'static str,
    pub subspace: String,
    pub d: usize,
    pub r: usize,
    pub k: usize,
    /// Trial `i` draws from `RngStream::new(seed).child(i)`.
    pub seed: u64,
    pub failure_quantile: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mean_sq: Vec<f64>,
}

impl OsiReport {
    pub fn trials(&self) -> usize {
        self.alpha.len()
    }

    /// 10%, 50% and 90% quantiles of `α̂`.
    pub fn alpha_quantiles(&self) -> [f64; 3] {
        [0.1, 0.5, 0.9].map(|q| quantile(&self.alpha, q))
    }

    pub fn beta_quantiles(&self) -> [f64; 3] {
        [0.1, 0.5, 0.9].map(|q| quantile(&self.beta, q))
    }

    pub fn median_alpha(&self) -> f64 {
        median(&self.alpha)
    }

    pub fn median_beta(&self) -> f64 {
        median(&self.beta)
    }

    pub fn certified_injectivity(&self) -> f64 {
        quantile(&self.alpha, self.failure_quantile)
    }

    pub fn isotropy(&self) -> IsotropyCheck {
        let n = self.mean_sq.len() as f64;
        let mean = self.mean_sq.iter().sum::<f64>() / n;
        let var = if n > 1.0 {
            self.mean_sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        IsotropyCheck {
            mean,
            stderr,
            passed: (mean - 1.0).abs() <= 4.0 * stderr + 1e-12,
        }
    }

    pub fn to_table(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(&OSI_SCHEMA);
        for (i, (a, b)) in self.alpha.iter().zip(&self.beta).enumerate() {
            t.push(vec![
                CsvValue::from(self.family.clone()),
                self.r.into(),
                self.k.into(),
                i.into(),
                (*a).into(),
                (*b).into(),
            ])?;
        }
        Ok(t)
    }
}

/// Per-trial `α̂` and `β̂` for `cfg.trials` independent test matrices.
pub fn osi_measure<T: Scalar>(cfg: &OsiConfig<T>) -> Result<OsiReport> {
    if cfg.trials == 0 || cfg.k == 0 {
        return Err(param_err("OSI measurement needs trials >= 1 and k >= 1"));
    }
    if !(0.0..=1.0).contains(&cfg.failure_quantile) {
        return Err(param_err("failure quantile must lie in [0, 1]"));
    }
    let d = cfg.subspace.dim();
    let r = cfg.subspace.rank();
    let root = RngStream::new(cfg.seed);
    let results: Vec<Injectivity> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let stream = root.child(trial as u64);
            let tm = cfg.family.build::<T>(d, cfg.k, &stream.child(0))?;
            match &cfg.subspace {
                Subspace::Coordinate { r, .. } => coordinate_injectivity(tm.as_ref(), *r),
                other => injectivity_of(tm.as_ref(), &other.materialize(&stream.child(1))?),
            }
        })
        .collect::<Result<_>>()?;
    Ok(OsiReport {
        family: cfg.family.to_string(),
        field: T::FIELD.name(),
        subspace: cfg.subspace.to_string(),
        d,
        r,
        k: cfg.k,
        seed: cfg.seed,
        failure_quantile: cfg.failure_quantile,
        alpha: results.iter().map(|m| m.alpha).collect(),
        beta: results.iter().map(|m| m.beta).collect(),
        mean_sq: results.iter().map(|m| m.mean_sq).collect(),
    })
}

/// [`osi_measure`] with at least 20 trials, so the 1/20 quantile is resolved.
pub fn osi_certify<T: Scalar>(cfg: &OsiConfig<T>) -> Result<OsiReport> {
    if cfg.trials < 20 {
        return Err(param_err(format!("certification needs at least 20 trials, got {}", cfg.trials)));
    }
    osi_measure(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{GaussianTM, SparseStackTM, SignDist};

    #[derive(Debug)]
    struct Explicit(DenseMatrix<f64>);

    impl TestMatrix<f64> for Explicit {
        fn d(&self) -> usize {
            self.0.rows()
        }
        fn k(&self) -> usize {
            self.0.cols()
        }
        fn label(&self) -> String {
            "explicit".into()
        }
        fn apply_adjoint(&self, b: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
            Ok(self.0.adjoint_mul(b))
        }
        fn apply(&self, c: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
            Ok(self.0.matmul(c))
        }
    }

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(median(&[3.0, 1.0, 2.0, 4.0]), 2.5);
        assert_eq!(quantile(&[5.0, 1.0], 0.0), 1.0);
        assert_eq!(quantile(&[5.0, 1.0], 1.0), 5.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn padded_q_gives_unit_extremes() {
        let q = DenseMatrix::<f64>::from_rows(&[&[0.6, 0.0], &[0.0, 1.0], &[0.8, 0.0]]).unwrap();
        let tm = Explicit(q.clone());
        let (a, b) = injectivity_dilation(&tm, &q).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annihilated_direction_gives_zero() {
        // Ω* e₃ = 0.
        let omega = DenseMatrix::<f64>::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let q = adversarial_q::<f64>(4, 3).unwrap();
        let (a, b) = injectivity_dilation(&Explicit(omega), &q).unwrap();
        assert_eq!(a, 0.0);
        assert_eq!(b, 1.0);
        let bad = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!(injectivity_dilation(&Explicit(DenseMatrix::identity(4)), &bad).is_err());
    }

    #[test]
    fn coordinate_paths_agree() {
        let st = RngStream::new(9);
        let tm = SparseStackTM::<f64>::with_k(60, 40, 3, SignDist::RealRademacher, &st).unwrap();
        let q = adversarial_q::<f64>(60, 25).unwrap();
        let a = coordinate_injectivity(&tm, 25).unwrap();
        let b = injectivity_of(&tm, &q).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-12 && (a.beta - b.beta).abs() < 1e-12);
        assert!((a.mean_sq - b.mean_sq).abs() < 1e-12);
        let g = GaussianTM::<f64>::new(60, 40, &st).unwrap();
        let c = coordinate_injectivity(&g, 25).unwrap();
        let e = injectivity_of(&g, &q).unwrap();
        assert!((c.alpha - e.alpha).abs() < 1e-12 && (c.beta - e.beta).abs() < 1e-12);
    }

    #[test]
    fn gram_and_lanczos_paths_agree_with_svd() {
        let st = RngStream::new(4);
        let tm = SparseStackTM::<f64>::with_k(700, 1400, 4, SignDist::RealRademacher, &st).unwrap();
        let r = 600;
        let rows = tm.materialize().rows_range(0..r).adjoint();
        let svd = svd_econ(&rows).unwrap().sigma;
        let gram = measure_block(&rows).unwrap();
        let (s0, s1) = (svd[0] * svd[0], svd[r - 1] * svd[r - 1]);
        assert!((gram.beta - s0).abs() < 1e-10 && (gram.alpha - s1).abs() < 1e-10);
        let lz = coordinate_injectivity_with(&tm, r, 0).unwrap();
        assert!((lz.beta - s0).abs() < 1e-6 * s0 && (lz.alpha - s1).abs() < 1e-6 * s0);
        let wide = coordinate_injectivity_with(&tm, 700, 0).unwrap();
        assert!((wide.beta - measure_block(&tm.materialize().adjoint()).unwrap().beta).abs() < 1e-6 * wide.beta);
    }

    #[test]
    fn certify_gaussian_and_degenerate() {
        let cfg = OsiConfig::<f64>::new(Family::Gaussian, Subspace::Coordinate { d: 50, r: 50 }, 200, 100);
        let rep = osi_certify(&cfg).unwrap();
        assert_eq!(rep.trials(), 100);
        assert!(rep.certified_injectivity() >= 0.2, "{}", rep.certified_injectivity());
        assert!(rep.isotropy().passed);
        let q = rep.alpha_quantiles();
        assert!(q[0] <= q[1] && q[1] <= q[2]);
        assert!(rep.alpha.iter().zip(&rep.beta).all(|(a, b)| 0.0 <= *a && a <= b));
        assert_eq!(rep.to_table().unwrap().len(), 100);

        let thin = OsiConfig::<f64>::new(Family::Gaussian, Subspace::Coordinate { d: 30, r: 20 }, 10, 20);
        assert_eq!(osi_certify(&thin).unwrap().certified_injectivity(), 0.0);
        let few = OsiConfig::<f64>::new(Family::Gaussian, Subspace::Coordinate { d: 30, r: 20 }, 40, 19);
        assert!(osi_certify(&few).is_err());
    }

    #[test]
    fn certify_sparse_stack() {
        let cfg = OsiConfig::<f64>::new(Family::sparse_stack(4), Subspace::Coordinate { d: 100, r: 100 }, 200, 20);
        let rep = osi_certify(&cfg).unwrap();
        assert!(rep.certified_injectivity() > 0.0);
        assert!(rep.isotropy().passed);
    }
}
