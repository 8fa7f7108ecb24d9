use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use sketchkit::bench::{
    error_ratio_table, run_error_ratio, run_lowrank, run_lsq, run_nystrom, run_recover, run_timing, testbed_table, timing_table,
    ErrorRatioConfig, ExperimentConfig, LowRankAlgo, LowRankConfig, MatrixSource, SpectrumKind, TimingConfig, COMMANDS,
};
use sketchkit::diagnostics::{osi_measure, OsiConfig, Subspace};
use sketchkit::io::CsvTable;
use sketchkit::sketch::{BaseDist, Family};
use sketchkit::trace::{partition_function_experiment, trace_rows_table, ExpmMode, PartitionConfig, TraceEstimator};
use sketchkit::{Complex64, Error, Field, Result};

const USAGE: &str = "usage: sketchkit <command> [--config FILE] [--key value ...]

commands:
  lowrank      RSVD / generalized Nystrom errors on a testbed spectrum or .mtx file
  nystrom      psd Nystrom errors
  lsq          sketch-and-solve least squares
  recover      Toeplitz recovery from bilinear queries
  trace        partition function of the transverse-field Ising chain
  osi-diag     per-trial injectivity and dilation
  timing       wall-clock of A*Omega
  testbed      synthetic spectra
  error-ratio  RSVD error of a structured family over the Gaussian baseline

CSV goes to --output FILE, or stdout. Exit status: 0 success, 1 invalid
configuration, 2 runtime failure. SKETCHKIT_THREADS sets the worker count.";

/// Configuration problems exit with 1, everything else with 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::UnknownKey(_) | Error::Parse { .. } => 1,
        _ => 2,
    }
}

macro_rules! by_field {
    ($field:expr, $f:ident :: <_> ( $($arg:expr),* )) => {
        match $field {
            Field::Real => $f::<f64>($($arg),*),
            Field::Complex => $f::<Complex64>($($arg),*),
        }
    };
}

fn source(cfg: &ExperimentConfig) -> Result<MatrixSource> {
    if let Some(path) = cfg.get("source") {
        return Ok(MatrixSource::File(PathBuf::from(path)));
    }
    let kind: SpectrumKind = cfg.parse_or("spectrum", SpectrumKind::PolyDecay { r: 10, p: 1.0 })?;
    Ok(MatrixSource::Testbed {
        kind,
        n: cfg.parse_or("n", 1024)?,
    })
}

fn lowrank(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let lc = LowRankConfig {
        source: source(cfg)?,
        algo: cfg.parse_or("algo", LowRankAlgo::Rsvd)?,
        family: cfg.family()?,
        k: cfg.parse_or("k", 10)?,
        p: cfg.parse_opt("p")?,
        trials: cfg.parse_or("trials", 10)?,
        seed: cfg.parse_or("seed", 0)?,
    };
    by_field!(cfg.parse_or("field", Field::Real)?, run_lowrank::<_>(&lc))
}

fn nystrom(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let (src, fam) = (source(cfg)?, cfg.family()?);
    let (k, trials, seed) = (cfg.parse_or("k", 10)?, cfg.parse_or("trials", 10)?, cfg.parse_or("seed", 0)?);
    by_field!(cfg.parse_or("field", Field::Real)?, run_nystrom::<_>(&src, &fam, k, trials, seed))
}

fn lsq(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let fam = cfg.family()?;
    let (n, d, k) = (cfg.parse_or("n", 2000)?, cfg.parse_or("d", 50)?, cfg.parse_or("k", 200)?);
    let (noise, trials, seed) = (cfg.parse_or("noise", 0.1)?, cfg.parse_or("trials", 10)?, cfg.parse_or("seed", 0)?);
    by_field!(cfg.parse_or("field", Field::Real)?, run_lsq::<_>(&fam, n, d, k, noise, trials, seed))
}

fn recover(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let (n, p) = (cfg.parse_or("n", 32)?, cfg.parse_opt("p")?);
    let (noise, trials, seed) = (cfg.parse_or("noise", 0.0)?, cfg.parse_or("trials", 10)?, cfg.parse_or("seed", 0)?);
    by_field!(cfg.parse_or("field", Field::Real)?, run_recover::<_>(n, p, noise, trials, seed))
}

fn trace(cfg: &ExperimentConfig) -> Result<CsvTable> {
    if cfg.parse_or("field", Field::Real)? != Field::Real {
        return Err(Error::InvalidParameter("trace runs in the real field".into()));
    }
    let mut pc = PartitionConfig::new(cfg.parse_or("ell", 10)?, cfg.parse_or("h", 1.0)?, cfg.parse_or("beta", 1.0)?);
    pc.t_grid = cfg.list_or("t", pc.t_grid.clone())?;
    pc.estimators = cfg.list_or::<TraceEstimator>("estimator", pc.estimators.clone())?;
    if cfg.get("family").is_some() {
        pc.family = cfg.family()?;
    } else if cfg.get("d0").is_some() || cfg.get("base").is_some() {
        pc.family = Family::KhatriRao {
            d0: cfg.parse_or("d0", 2)?,
            base: cfg.parse_or("base", BaseDist::RealSpherical)?,
        };
    }
    pc.trials = cfg.parse_or("trials", pc.trials)?;
    pc.seed = cfg.parse_or("seed", 0)?;
    pc.mode = cfg.parse_or("mode", ExpmMode::Taylor)?;
    pc.shift = cfg.parse_opt("shift")?;
    trace_rows_table(&partition_function_experiment(&pc)?)
}

fn osi_table<T: sketchkit::Scalar>(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let r: usize = cfg.require("r")?;
    let subspace: Subspace<T> = match cfg.get("subspace").unwrap_or("adversarial") {
        "adversarial" => Subspace::Coordinate {
            d: cfg.parse_or("d", r)?,
            r,
        },
        "kronecker" => Subspace::KroneckerGaussian {
            d0: cfg.parse_or("d0", 2)?,
            ell: cfg.require("ell")?,
            r,
        },
        "wht" => Subspace::WhtColumns {
            ell: cfg.require("ell")?,
            r,
        },
        other => return Err(Error::InvalidParameter(format!("unknown subspace `{other}`"))),
    };
    let mut oc = OsiConfig::new(cfg.family()?, subspace, cfg.require("k")?, cfg.parse_or("trials", 20)?);
    oc.seed = cfg.parse_or("seed", 0)?;
    oc.failure_quantile = cfg.parse_or("failure_quantile", oc.failure_quantile)?;
    let rep = osi_measure(&oc)?;
    let iso = rep.isotropy();
    eprintln!(
        "{} on {} (d={}, r={}, k={}): alpha q10/50/90 = {:?}, beta q10/50/90 = {:?}, certified alpha = {:.6}, isotropy mean {:.6} +- {:.2e} ({})",
        rep.family,
        rep.subspace,
        rep.d,
        rep.r,
        rep.k,
        rep.alpha_quantiles(),
        rep.beta_quantiles(),
        rep.certified_injectivity(),
        iso.mean,
        iso.stderr,
        if iso.passed { "ok" } else { "FAILED" }
    );
    rep.to_table()
}

fn osi_diag(cfg: &ExperimentConfig) -> Result<CsvTable> {
    match cfg.parse_or("field", Field::Real)? {
        Field::Real => osi_table::<f64>(cfg),
        Field::Complex => osi_table::<Complex64>(cfg),
    }
}

fn timing(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let mut tc = TimingConfig::new(cfg.parse_or("n", 4096)?, cfg.list_or("k", vec![512])?);
    let names: Vec<String> = cfg.list_or("families", vec!["gaussian".to_string(), "sparsestack".to_string()])?;
    tc.families = names.iter().map(|n| cfg.family_named(n)).collect::<Result<_>>()?;
    tc.reps = cfg.parse_or("reps", tc.reps)?;
    tc.warmup = cfg.parse_or("warmup", tc.warmup)?;
    tc.seed = cfg.parse_or("seed", 0)?;
    timing_table(&run_timing(&tc)?)
}

fn testbed(cfg: &ExperimentConfig) -> Result<CsvTable> {
    testbed_table(&cfg.spectra()?, cfg.parse_or("n", 1024)?)
}

fn error_ratio(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let mut ec = ErrorRatioConfig::new(cfg.parse_or("n", 1024)?, cfg.list_or("k", vec![20, 50, 100])?, cfg.parse_or("trials", 50)?);
    ec.spectra = cfg.spectra()?;
    ec.families = vec![cfg.family_named(cfg.get("family").unwrap_or("sparsestack"))?];
    ec.seed = cfg.parse_or("seed", 0)?;
    error_ratio_table(&run_error_ratio(&ec)?)
}

fn run(command: &str, args: &[String]) -> Result<()> {
    let cfg = ExperimentConfig::from_args(command, args)?;
    let table = match command {
        "lowrank" => lowrank(&cfg)?,
        "nystrom" => nystrom(&cfg)?,
        "lsq" => lsq(&cfg)?,
        "recover" => recover(&cfg)?,
        "trace" => trace(&cfg)?,
        "osi-diag" => osi_diag(&cfg)?,
        "timing" => timing(&cfg)?,
        "testbed" => testbed(&cfg)?,
        "error-ratio" => error_ratio(&cfg)?,
        _ => unreachable!("commands are validated by the config"),
    };
    match cfg.output() {
        Some(path) => table.write(path),
        None => {
            let out = io::stdout();
            let mut lock = out.lock();
            table.write_to(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SKETCHKIT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("SKETCHKIT_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return ExitCode::from(1);
    };
    if matches!(command.as_str(), "-h" | "--help" | "help") {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    if !COMMANDS.contains(&command.as_str()) {
        eprintln!("error: unknown command `{command}`\n\n{USAGE}");
        return ExitCode::from(1);
    }
    match init_threads().and_then(|_| run(command, &args[1..])) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
