//! Structured random test matrices, randomized low-rank approximation,
//! sketch-and-solve least squares, bilinear matrix recovery and stochastic
//! trace estimation.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod nla;
pub mod rng;
pub mod scalar;
pub mod sketch;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::{CsrMatrix, DenseMatrix, LowRank};
pub use rng::RngStream;
pub use scalar::{Complex64, Field, Scalar};
