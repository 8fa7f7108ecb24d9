//! Dense and sparse containers plus the factorizations the algorithms need.

pub mod chol;
pub mod dense;
pub mod eig;
pub mod lanczos;
pub mod lowrank;
pub mod pinv;
pub mod qr;
pub mod sparse;
pub mod svd;

pub use chol::{cholesky_upper, solve_upper, solve_upper_adjoint, solve_upper_right};
pub use dense::{rel_fro_diff, DenseMatrix};
pub use eig::{eigh, eigvalsh, tridiagonal_eigh, tridiagonal_eigvals, HermitianEig};
pub use lanczos::{lanczos_extremes, ExtremeEigs};
pub use lowrank::{projection_residual_diag, LowRank};
pub use pinv::{pinv_apply_svd, truncated_pinv_apply, DEFAULT_RANK_TOL};
pub use qr::qr_econ;
pub use sparse::CsrMatrix;
pub use svd::{numerical_rank, orth, svd_econ, Svd};
