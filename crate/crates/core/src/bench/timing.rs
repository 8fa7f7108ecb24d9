use std::time::Instant;

use crate::diagnostics::median;
use crate::error::{param_err, Result};
use crate::io::{CsvTable, CsvValue};
use crate::linalg::DenseMatrix;
use crate::rng::RngStream;
use crate::sketch::dist::normal;
use crate::sketch::Family;

pub const TIMING_SCHEMA: [&str; 7] = ["family", "n", "k", "zeta", "median_seconds", "reps", "machine"];

pub const MIN_REPS: usize = 10;

#[derive(Debug, Clone)]
pub struct TimingConfig {
    pub n: usize,
    pub k_grid: Vec<usize>,
    pub families: Vec<Family>,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl TimingConfig {
    /// Gaussian against SparseStack with `ζ = 4`, 10 timed and 2 warmup repetitions.
    pub fn new(n: usize, k_grid: Vec<usize>) -> Self {
        TimingConfig {
            n,
            k_grid,
            families: vec![Family::Gaussian, Family::sparse_stack(4)],
            reps: MIN_REPS,
            warmup: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    /// Zero for families without a sparsity parameter.
    pub zeta: f64,
    pub median_seconds: f64,
    pub reps: usize,
    pub machine: String,
}

pub fn machine_descriptor() -> String {
    format!(
        "{}-{}-{}threads",
        std::env::consts::OS,
        std::env::consts::ARCH,
        rayon::current_num_threads()
    )
}

fn zeta_of(f: &Family) -> f64 {
    match *f {
        Family::SparseStack { zeta, .. } | Family::SparseUniform { zeta, .. } => zeta as f64,
        Family::SparseIid { zeta, .. } => zeta,
        Family::SparseCol { xi, .. } => xi as f64,
        _ => 0.0,
    }
}

/// Median wall-clock time of `A Ω` for a dense Gaussian `A ∈ R^{n×n}`.
/// The test matrix is drawn once per `(family, k)`; only the product is timed.
pub fn run_timing(cfg: &TimingConfig) -> Result<Vec<TimingRow>> {
    if cfg.n == 0 || cfg.k_grid.is_empty() || cfg.k_grid.contains(&0) {
        return Err(param_err("timing needs n >= 1 and a nonempty grid of k >= 1"));
    }
    if cfg.reps < MIN_REPS {
        return Err(param_err(format!("timing needs at least {MIN_REPS} repetitions, got {}", cfg.reps)));
    }
    let root = RngStream::new(cfg.seed);
    let mut rng = root.child(0).rng();
    let a = DenseMatrix::<f64>::from_fn(cfg.n, cfg.n, |_, _| normal(&mut rng));
    let machine = machine_descriptor();
    let mut rows = Vec::new();
    for (f, fam) in cfg.families.iter().enumerate() {
        for &k in &cfg.k_grid {
            let tm = fam.build::<f64>(cfg.n, k, &root.child(1 + f as u64).child(k as u64))?;
            let mut secs = Vec::with_capacity(cfg.reps);
            for rep in 0..cfg.warmup + cfg.reps {
                let start = Instant::now();
                let y = tm.apply_right(&a)?;
                let el = start.elapsed().as_secs_f64();
                std::hint::black_box(&y);
                if rep >= cfg.warmup {
                    secs.push(el);
                }
            }
            rows.push(TimingRow {
                family: fam.to_string(),
                n: cfg.n,
                k,
                zeta: zeta_of(fam),
                median_seconds: median(&secs),
                reps: cfg.reps,
                machine: machine.clone(),
            });
        }
    }
    Ok(rows)
}

pub fn timing_table(rows: &[TimingRow]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&TIMING_SCHEMA);
    for r in rows {
        t.push(vec![
            CsvValue::from(r.family.clone()),
            r.n.into(),
            r.k.into(),
            r.zeta.into(),
            r.median_seconds.into(),
            r.reps.into(),
            r.machine.clone().into(),
        ])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards() {
        assert!(run_timing(&TimingConfig::new(0, vec![4])).is_err());
        assert!(run_timing(&TimingConfig::new(16, vec![0])).is_err());
        let mut cfg = TimingConfig::new(16, vec![4]);
        cfg.reps = 3;
        assert!(run_timing(&cfg).is_err());
    }

    #[test]
    fn rows_per_grid_point() {
        let rows = run_timing(&TimingConfig::new(64, vec![4, 8])).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.median_seconds >= 0.0 && r.reps == 10));
        assert_eq!(rows[2].zeta, 4.0);
        assert_eq!(timing_table(&rows).unwrap().len(), 4);
    }
}
