//! Experiment drivers behind the command-line tool: synthetic testbed,
//! error-ratio and timing studies, and per-algorithm runs writing CSV tables.

pub mod config;
pub mod error_ratio;
pub mod runs;
pub mod testbed;
pub mod timing;

pub use config::{ExperimentConfig, COMMANDS};
pub use error_ratio::{error_ratio, error_ratio_table, rsvd_diag_error, run_error_ratio, ErrorRatioConfig, ErrorRatioRow, ERROR_RATIO_SCHEMA};
pub use runs::{
    run_lowrank, run_lsq, run_nystrom, run_recover, toeplitz_projection, toeplitz_recovery_trial, LowRankAlgo, LowRankConfig,
    MatrixSource, RecoveryTrial, LOWRANK_SCHEMA, LSQ_SCHEMA, NYSTROM_SCHEMA, RECOVER_SCHEMA,
};
pub use testbed::{default_testbed, testbed_generate, testbed_sparse, testbed_table, SpectrumKind, TESTBED_SCHEMA};
pub use timing::{machine_descriptor, run_timing, timing_table, TimingConfig, TimingRow, TIMING_SCHEMA};
