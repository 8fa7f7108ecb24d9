use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{param_err, Error, Result};
use crate::io::{CsvTable, CsvValue};
use crate::linalg::eigvalsh;
use crate::rng::RngStream;
use crate::sketch::{BaseDist, Family};
use crate::trace::{girard_hutchinson, na_hutch_pp, tfim_hamiltonian, ExpmOperator, LinearOperator, MatvecOracle};

pub const TRACE_SCHEMA: [&str; 11] = [
    "estimator", "family", "ell", "h", "beta", "t", "trial", "estimate", "reference", "rel_error", "matvecs",
];

/// Largest chain with a dense reference spectrum.
pub const MAX_REFERENCE_ELL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEstimator {
    GirardHutchinson,
    NaHutchPp,
}

impl TraceEstimator {
    pub fn name(self) -> &'static str {
        match self {
            TraceEstimator::GirardHutchinson => "gh",
            TraceEstimator::NaHutchPp => "na-hutch++",
        }
    }
}

impl fmt::Display for TraceEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraceEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gh" | "girard-hutchinson" | "hutchinson" => Ok(TraceEstimator::GirardHutchinson),
            "na-hutch++" | "nahutch++" | "na-hutchpp" | "nahutchpp" => Ok(TraceEstimator::NaHutchPp),
            other => Err(param_err(format!("unknown trace estimator `{other}`"))),
        }
    }
}

/// How products with `exp(−β(H + bI))` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmMode {
    Taylor,
    /// Form the exponential once from the dense spectrum; requires the reference size.
    Dense,
}

impl FromStr for ExpmMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "taylor" => Ok(ExpmMode::Taylor),
            "dense" => Ok(ExpmMode::Dense),
            other => Err(param_err(format!("unknown exponential mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartitionConfig {
    pub ell: usize,
    pub h: f64,
    pub beta: f64,
    pub t_grid: Vec<usize>,
    pub estimators: Vec<TraceEstimator>,
    pub family: Family,
    pub trials: usize,
    pub seed: u64,
    pub mode: ExpmMode,
    /// `None` selects `b = (1 + h) ℓ`.
    pub shift: Option<f64>,
}

impl PartitionConfig {
    /// Real spherical Khatri–Rao probes with `d₀ = 2`, one factor per site.
    pub fn new(ell: usize, h: f64, beta: f64) -> Self {
        PartitionConfig {
            ell,
            h,
            beta,
            t_grid: vec![600],
            estimators: vec![TraceEstimator::GirardHutchinson, TraceEstimator::NaHutchPp],
            family: Family::KhatriRao {
                d0: 2,
                base: BaseDist::RealSpherical,
            },
            trials: 30,
            seed: 0,
            mode: ExpmMode::Taylor,
            shift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub estimator: TraceEstimator,
    pub family: String,
    pub ell: usize,
    pub h: f64,
    pub beta: f64,
    pub t: usize,
    pub trial: usize,
    /// NaN for an invalid request (e.g. `t = 0`).
    pub estimate: f64,
    pub reference: f64,
    pub rel_error: f64,
    pub matvecs: usize,
}

impl TraceRow {
    pub fn is_valid(&self) -> bool {
        self.estimate.is_finite()
    }

    pub fn csv_values(&self) -> Vec<CsvValue> {
        vec![
            self.estimator.name().into(),
            self.family.clone().into(),
            self.ell.into(),
            self.h.into(),
            self.beta.into(),
            self.t.into(),
            self.trial.into(),
            self.estimate.into(),
            self.reference.into(),
            self.rel_error.into(),
            self.matvecs.into(),
        ]
    }
}

pub fn trace_rows_table(rows: &[TraceRow]) -> Result<CsvTable> {
    let mut table = CsvTable::new(&TRACE_SCHEMA);
    for r in rows {
        table.push(r.csv_values())?;
    }
    Ok(table)
}

/// Relative errors of `Ẑ(β)` for `Z(β) = tr exp(−βH)` on the TFIM chain.
///
/// The estimators see `exp(−β(H + bI))`; the factor `e^{βb}` is restored in the
/// reported estimate and reference. Trial `i` at budget `t` uses the stream
/// `seed / t / i` for every estimator, so rows are paired across estimators.
pub fn partition_function_experiment(cfg: &PartitionConfig) -> Result<Vec<TraceRow>> {
    if cfg.ell > MAX_REFERENCE_ELL {
        return Err(param_err(format!(
            "the exact reference needs ell <= {MAX_REFERENCE_ELL}, got {}",
            cfg.ell
        )));
    }
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        return Err(param_err("beta must be positive and finite"));
    }
    let ham = tfim_hamiltonian(cfg.ell, cfg.h)?;
    let b = cfg.shift.unwrap_or(ham.default_shift());
    let spectrum = eigvalsh(&ham.matrix.to_dense())?;
    let z_shifted: f64 = spectrum.iter().map(|l| (-cfg.beta * (l + b)).exp()).sum();
    let restore = (cfg.beta * b).exp();
    let reference = z_shifted * restore;
    let op = match cfg.mode {
        ExpmMode::Taylor => ExpmOperator::taylor(ham.matrix.clone(), cfg.beta, b)?,
        ExpmMode::Dense => ExpmOperator::dense(&ham.matrix, cfg.beta, b)?,
    };
    let root = RngStream::new(cfg.seed);
    let family = cfg.family.to_string();
    let mut jobs = Vec::new();
    for &est in &cfg.estimators {
        for &t in &cfg.t_grid {
            for trial in 0..cfg.trials {
                jobs.push((est, t, trial));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(est, t, trial)| {
            let mut row = TraceRow {
                estimator: est,
                family: family.clone(),
                ell: cfg.ell,
                h: cfg.h,
                beta: cfg.beta,
                t,
                trial,
                estimate: f64::NAN,
                reference,
                rel_error: f64::NAN,
                matvecs: 0,
            };
            if t == 0 {
                return Ok(row);
            }
            let oracle = MatvecOracle::new(&op as &dyn LinearOperator<f64>);
            let stream = root.child(t as u64).child(trial as u64);
            let value = match est {
                TraceEstimator::GirardHutchinson => girard_hutchinson(&oracle, t, &cfg.family, &stream)?,
                TraceEstimator::NaHutchPp => na_hutch_pp(&oracle, t, &cfg.family, &stream)?,
            };
            row.estimate = value * restore;
            row.rel_error = (value - z_shifted).abs() / z_shifted;
            row.matvecs = oracle.matvecs();
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_reference_and_budget() {
        let mut cfg = PartitionConfig::new(2, 1.0, 0.5);
        cfg.t_grid = vec![0, 12];
        cfg.trials = 2;
        cfg.mode = ExpmMode::Dense;
        let rows = partition_function_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        // H for ℓ = 2, h = 1 has spectrum ±2√2 and ±2 (Z₂ symmetric blocks).
        let lam = [-(8f64.sqrt()), -2.0, 2.0, 8f64.sqrt()];
        let z: f64 = lam.iter().map(|l| (-0.5 * l).exp()).sum();
        for r in &rows {
            assert!((r.reference - z).abs() < 1e-12 * z);
            if r.t == 0 {
                assert!(!r.is_valid());
            } else {
                assert_eq!(r.matvecs, 12);
                assert!(r.rel_error.is_finite());
            }
        }
        let table = trace_rows_table(&rows).unwrap();
        assert_eq!(table.len(), 8);
    }

    #[test]
    fn rejects_large_chain() {
        assert!(partition_function_experiment(&PartitionConfig::new(13, 1.0, 1.0)).is_err());
    }
}
