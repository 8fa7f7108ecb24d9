use rayon::prelude::*;

use crate::bench::testbed::{default_testbed, SpectrumKind};
use crate::error::{param_err, Result};
use crate::io::{CsvTable, CsvValue};
use crate::linalg::{projection_residual_diag, CsrMatrix, LowRank};
use crate::nla::rsvd;
use crate::rng::RngStream;
use crate::sketch::Family;

pub const ERROR_RATIO_SCHEMA: [&str; 9] = [
    "spectrum", "family", "n", "k", "trial", "error", "baseline_error", "ratio", "flagged",
];

#[derive(Debug, Clone)]
pub struct ErrorRatioConfig {
    pub spectra: Vec<SpectrumKind>,
    pub n: usize,
    pub k_grid: Vec<usize>,
    /// Compared against the Gaussian baseline.
    pub families: Vec<Family>,
    pub trials: usize,
    pub seed: u64,
}

impl ErrorRatioConfig {
    /// The twelve default spectra against SparseStack with `ζ = 4`.
    pub fn new(n: usize, k_grid: Vec<usize>, trials: usize) -> Self {
        ErrorRatioConfig {
            spectra: default_testbed(),
            n,
            k_grid,
            families: vec![Family::sparse_stack(4)],
            trials,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRatioRow {
    pub spectrum: String,
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub error: f64,
    pub baseline_error: f64,
    pub ratio: f64,
    /// Set when the baseline error is zero.
    pub flagged: bool,
}

/// `error / baseline`, with `0/0 = 1`; both zero-baseline cases are flagged.
pub fn error_ratio(error: f64, baseline: f64) -> (f64, bool) {
    if baseline == 0.0 {
        (if error == 0.0 { 1.0 } else { f64::INFINITY }, true)
    } else {
        (error / baseline, false)
    }
}

/// `‖A − Â‖_F` of RSVD on `A = diag(δ)`.
pub fn rsvd_diag_error(diag: &[f64], family: &Family, k: usize, stream: &RngStream) -> Result<f64> {
    let a = CsrMatrix::<f64>::from_diag(diag);
    let tm = family.build::<f64>(diag.len(), k, stream)?;
    match rsvd(&a, tm.as_ref())? {
        LowRank::Svd { u, .. } => projection_residual_diag(&u, diag),
        _ => unreachable!("rsvd returns SVD form"),
    }
}

/// Paired RSVD errors: trial `i` of spectrum `s` at rank `k` uses the stream
/// `seed / s / k / i`; the Gaussian baseline takes its child 0 and family `f` its child `f + 1`.
pub fn run_error_ratio(cfg: &ErrorRatioConfig) -> Result<Vec<ErrorRatioRow>> {
    if cfg.trials == 0 || cfg.k_grid.is_empty() || cfg.spectra.is_empty() {
        return Err(param_err("error-ratio needs trials >= 1, a k grid and at least one spectrum"));
    }
    if let Some(&k) = cfg.k_grid.iter().find(|&&k| k == 0 || k > cfg.n) {
        return Err(param_err(format!("rank k = {k} must lie in 1..={}", cfg.n)));
    }
    let diags = cfg.spectra.iter().map(|s| s.diagonal(cfg.n)).collect::<Result<Vec<_>>>()?;
    let root = RngStream::new(cfg.seed);
    let mut jobs = Vec::new();
    for s in 0..cfg.spectra.len() {
        for &k in &cfg.k_grid {
            for trial in 0..cfg.trials {
                jobs.push((s, k, trial));
            }
        }
    }
    let per_job: Vec<Vec<ErrorRatioRow>> = jobs
        .into_par_iter()
        .map(|(s, k, trial)| {
            let stream = root.child(s as u64).child(k as u64).child(trial as u64);
            let baseline = rsvd_diag_error(&diags[s], &Family::Gaussian, k, &stream.child(0))?;
            cfg.families
                .iter()
                .enumerate()
                .map(|(f, fam)| {
                    let error = rsvd_diag_error(&diags[s], fam, k, &stream.child(f as u64 + 1))?;
                    let (ratio, flagged) = error_ratio(error, baseline);
                    Ok(ErrorRatioRow {
                        spectrum: cfg.spectra[s].to_string(),
                        family: fam.to_string(),
                        n: cfg.n,
                        k,
                        trial,
                        error,
                        baseline_error: baseline,
                        ratio,
                        flagged,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

pub fn error_ratio_table(rows: &[ErrorRatioRow]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&ERROR_RATIO_SCHEMA);
    for r in rows {
        t.push(vec![
            CsvValue::from(r.spectrum.clone()),
            r.family.clone().into(),
            r.n.into(),
            r.k.into(),
            r.trial.into(),
            r.error.into(),
            r.baseline_error.into(),
            r.ratio.into(),
            r.flagged.into(),
        ])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::median;

    #[test]
    fn zero_matrix_convention() {
        assert_eq!(error_ratio(0.0, 0.0), (1.0, true));
        assert_eq!(error_ratio(1.0, 0.0).1, true);
        let e = rsvd_diag_error(&[0.0; 6], &Family::Gaussian, 2, &RngStream::new(0)).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn gaussian_self_ratio() {
        let mut cfg = ErrorRatioConfig::new(128, vec![12], 40);
        cfg.spectra = vec![SpectrumKind::PolyDecay { r: 5, p: 1.0 }];
        cfg.families = vec![Family::Gaussian];
        let rows = run_error_ratio(&cfg).unwrap();
        assert_eq!(rows.len(), 40);
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let m = median(&ratios);
        assert!((0.5..=2.0).contains(&m), "{m}");
        assert!(rows.iter().all(|r| !r.flagged));
        assert_eq!(error_ratio_table(&rows).unwrap().len(), 40);
    }

    #[test]
    fn deterministic_and_validated() {
        let mut cfg = ErrorRatioConfig::new(64, vec![5, 10], 3);
        cfg.spectra.truncate(2);
        let a = run_error_ratio(&cfg).unwrap();
        let b = run_error_ratio(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.k_grid = vec![0];
        assert!(run_error_ratio(&cfg).is_err());
    }
}
