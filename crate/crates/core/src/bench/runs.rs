use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bench::testbed::SpectrumKind;
use crate::error::{param_err, Error, Result};
use crate::io::{read_matrix_market, CsvTable, CsvValue, MtxMatrix};
use crate::linalg::{projection_residual_diag, truncated_pinv_apply, CsrMatrix, DenseMatrix, LowRank, DEFAULT_RANK_TOL};
use crate::nla::{gen_nystrom_outer, gen_nystrom_svd, matrix_recovery, nystrom_psd, rsvd, sketch_and_solve, toeplitz_basis, NystromOptions};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::sketch::dist::normal;
use crate::sketch::Family;

/// Input matrix of a low-rank run.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Testbed { kind: SpectrumKind, n: usize },
    File(PathBuf),
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Testbed { kind, .. } => write!(f, "{kind}"),
            MatrixSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

enum Loaded<T> {
    Diagonal(Vec<f64>, CsrMatrix<T>),
    Sparse(CsrMatrix<T>),
    Dense(DenseMatrix<T>),
}

impl<T: Scalar> Loaded<T> {
    fn shape(&self) -> (usize, usize) {
        match self {
            Loaded::Diagonal(d, _) => (d.len(), d.len()),
            Loaded::Sparse(a) => (a.rows(), a.cols()),
            Loaded::Dense(a) => a.shape(),
        }
    }

    fn fro_norm(&self) -> f64 {
        match self {
            Loaded::Diagonal(_, a) | Loaded::Sparse(a) => a.fro_norm(),
            Loaded::Dense(a) => a.fro_norm(),
        }
    }

    fn operand(&self) -> crate::nla::Operand<'_, T> {
        match self {
            Loaded::Diagonal(_, a) | Loaded::Sparse(a) => a.into(),
            Loaded::Dense(a) => a.into(),
        }
    }

    fn residual(&self, approx: &LowRank<T>) -> Result<f64> {
        match (self, approx) {
            (Loaded::Diagonal(d, _), LowRank::Svd { u, .. }) => projection_residual_diag(u, d),
            (Loaded::Diagonal(_, a) | Loaded::Sparse(a), _) => approx.residual_fro_sparse(a),
            (Loaded::Dense(a), _) => approx.residual_fro(a),
        }
    }

    fn dense(&self) -> DenseMatrix<T> {
        match self {
            Loaded::Diagonal(_, a) | Loaded::Sparse(a) => a.to_dense(),
            Loaded::Dense(a) => a.clone(),
        }
    }
}

fn load<T: Scalar>(src: &MatrixSource) -> Result<Loaded<T>> {
    Ok(match src {
        MatrixSource::Testbed { kind, n } => {
            let d = kind.diagonal(*n)?;
            let a = CsrMatrix::from_diag(&d);
            Loaded::Diagonal(d, a)
        }
        MatrixSource::File(p) => match read_matrix_market::<T>(p)? {
            MtxMatrix::Sparse(a) => Loaded::Sparse(a),
            MtxMatrix::Dense(a) => Loaded::Dense(a),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowRankAlgo {
    Rsvd,
    /// Generalized Nyström, SVD form.
    GnSvd,
    /// Generalized Nyström, outer-product form.
    GnOuter,
}

impl LowRankAlgo {
    pub fn name(self) -> &'static str {
        match self {
            LowRankAlgo::Rsvd => "rsvd",
            LowRankAlgo::GnSvd => "gnsvd",
            LowRankAlgo::GnOuter => "gnouter",
        }
    }
}

impl FromStr for LowRankAlgo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsvd" => Ok(LowRankAlgo::Rsvd),
            "gnsvd" => Ok(LowRankAlgo::GnSvd),
            "gnouter" => Ok(LowRankAlgo::GnOuter),
            _ => Err(param_err(format!("unknown low-rank algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowRankConfig {
    pub source: MatrixSource,
    pub algo: LowRankAlgo,
    pub family: Family,
    pub k: usize,
    /// Size of `Ψ` for the generalized Nyström forms; defaults to `⌈1.5k⌉`.
    pub p: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

pub const LOWRANK_SCHEMA: [&str; 10] = ["source", "algo", "family", "n", "d", "k", "p", "trial", "error", "rel_error"];

/// Trial `i` draws `Ω` from `seed / i / 0` and `Ψ` from `seed / i / 1`.
pub fn run_lowrank<T: Scalar>(cfg: &LowRankConfig) -> Result<CsvTable> {
    if cfg.trials == 0 {
        return Err(param_err("trials must be >= 1"));
    }
    let a = load::<T>(&cfg.source)?;
    let (n, d) = a.shape();
    let p = cfg.p.unwrap_or((3 * cfg.k).div_ceil(2).min(n.min(d)));
    let norm = a.fro_norm();
    let root = RngStream::new(cfg.seed);
    let errors: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let st = root.child(trial as u64);
            let omega = cfg.family.build::<T>(d, cfg.k, &st.child(0))?;
            let approx = match cfg.algo {
                LowRankAlgo::Rsvd => rsvd(a.operand(), omega.as_ref())?,
                LowRankAlgo::GnSvd | LowRankAlgo::GnOuter => {
                    let psi = cfg.family.build::<T>(n, p, &st.child(1))?;
                    if cfg.algo == LowRankAlgo::GnSvd {
                        gen_nystrom_svd(a.operand(), omega.as_ref(), psi.as_ref())?
                    } else {
                        gen_nystrom_outer(a.operand(), omega.as_ref(), psi.as_ref())?
                    }
                }
            };
            a.residual(&approx)
        })
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&LOWRANK_SCHEMA);
    for (trial, e) in errors.into_iter().enumerate() {
        t.push(vec![
            CsvValue::from(cfg.source.to_string()),
            cfg.algo.name().into(),
            cfg.family.to_string().into(),
            n.into(),
            d.into(),
            cfg.k.into(),
            (if cfg.algo == LowRankAlgo::Rsvd { 0 } else { p }).into(),
            trial.into(),
            e.into(),
            (if norm > 0.0 { e / norm } else { 0.0 }).into(),
        ])?;
    }
    Ok(t)
}

pub const NYSTROM_SCHEMA: [&str; 8] = ["source", "family", "n", "k", "trial", "error_nuclear", "rel_error_nuclear", "error_fro"];

/// psd Nyström; the input must be Hermitian psd (testbed spectra are).
pub fn run_nystrom<T: Scalar>(source: &MatrixSource, family: &Family, k: usize, trials: usize, seed: u64) -> Result<CsvTable> {
    if trials == 0 {
        return Err(param_err("trials must be >= 1"));
    }
    let a = load::<T>(source)?;
    let (n, d) = a.shape();
    if n != d {
        return Err(param_err(format!("Nyström needs a square input, got {n}x{d}")));
    }
    let dense = a.dense();
    let nuclear: f64 = dense.trace().re();
    let root = RngStream::new(seed);
    let errs: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let st = root.child(trial as u64);
            let tm = family.build::<T>(n, k, &st.child(0))?;
            let opts = NystromOptions {
                seed: seed.wrapping_add(trial as u64),
                ..NystromOptions::default()
            };
            let approx = nystrom_psd(a.operand(), tm.as_ref(), &opts)?;
            Ok((approx.residual_nuclear_hermitian(&dense)?, approx.residual_fro(&dense)?))
        })
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&NYSTROM_SCHEMA);
    for (trial, (nuc, fro)) in errs.into_iter().enumerate() {
        t.push(vec![
            CsvValue::from(source.to_string()),
            family.to_string().into(),
            n.into(),
            k.into(),
            trial.into(),
            nuc.into(),
            (if nuclear > 0.0 { nuc / nuclear } else { 0.0 }).into(),
            fro.into(),
        ])?;
    }
    Ok(t)
}

pub const LSQ_SCHEMA: [&str; 10] = [
    "family", "n", "d", "k", "noise", "trial", "residual", "optimal_residual", "residual_ratio", "solution_error",
];

fn gaussian<T: Scalar>(rows: usize, cols: usize, stream: &RngStream) -> DenseMatrix<T> {
    let mut rng = stream.rng();
    DenseMatrix::from_fn(rows, cols, |_, _| normal(&mut rng))
}

/// Sketch-and-solve on `A x = b` with Gaussian `A ∈ F^{n×d}` and
/// `b = A x₀ + noise · g`; the solution error is relative to `x₀`.
pub fn run_lsq<T: Scalar>(family: &Family, n: usize, d: usize, k: usize, noise: f64, trials: usize, seed: u64) -> Result<CsvTable> {
    if trials == 0 || d == 0 || n < d || k < d || k > n {
        return Err(param_err(format!("lsq needs trials >= 1 and 1 <= d <= k <= n (n = {n}, d = {d}, k = {k})")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(param_err("noise must be finite and >= 0"));
    }
    let root = RngStream::new(seed);
    let rows: Vec<[f64; 4]> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let st = root.child(trial as u64);
            let a = gaussian::<T>(n, d, &st.child(0));
            let x0 = gaussian::<T>(d, 1, &st.child(1));
            let mut b = a.matmul(&x0);
            b.add_scaled(T::from_f64(noise), &gaussian::<T>(n, 1, &st.child(2)));
            let tm = family.build::<T>(n, k, &st.child(3))?;
            let x = sketch_and_solve(&a, &b, tm.as_ref())?;
            let opt = truncated_pinv_apply(&a, &b, DEFAULT_RANK_TOL)?;
            let res = b.sub(&a.matmul(&x)).fro_norm();
            let res_opt = b.sub(&a.matmul(&opt)).fro_norm();
            let ratio = if res_opt > 0.0 { res / res_opt } else if res == 0.0 { 1.0 } else { f64::INFINITY };
            Ok([res, res_opt, ratio, x.sub(&x0).fro_norm() / x0.fro_norm()])
        })
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&LSQ_SCHEMA);
    for (trial, r) in rows.into_iter().enumerate() {
        t.push(vec![
            CsvValue::from(family.to_string()),
            n.into(),
            d.into(),
            k.into(),
            noise.into(),
            trial.into(),
            r[0].into(),
            r[1].into(),
            r[2].into(),
            r[3].into(),
        ])?;
    }
    Ok(t)
}

/// Orthogonal projection onto Toeplitz matrices: average along each diagonal.
pub fn toeplitz_projection<T: Scalar>(b: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = b.rows();
    let mut sums = vec![T::zero(); 2 * n - 1];
    let mut counts = vec![0usize; 2 * n - 1];
    for j in 0..n {
        for i in 0..n {
            sums[i + n - 1 - j] += b[(i, j)];
            counts[i + n - 1 - j] += 1;
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| sums[i + n - 1 - j].scale(1.0 / counts[i + n - 1 - j] as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryTrial {
    /// `‖B − B̃‖_F / ‖B‖_F`
    pub residual: f64,
    /// `‖B − Π(B)‖_F / ‖B‖_F` for the orthogonal projection `Π` onto the family.
    pub projection_residual: f64,
    pub basis_rank: usize,
}

/// Hidden `B = T + noise · G / √(n)` with Toeplitz `T` of iid Gaussian diagonals,
/// recovered from `p` bilinear queries (trial `i`: matrix `seed / i / 0`, queries `seed / i / 1`).
pub fn toeplitz_recovery_trial<T: Scalar>(n: usize, p: usize, noise: f64, stream: &RngStream) -> Result<RecoveryTrial> {
    if n == 0 {
        return Err(param_err("Toeplitz recovery needs n >= 1"));
    }
    let mut rng = stream.child(0).rng();
    let c: Vec<T> = (0..2 * n - 1).map(|_| normal(&mut rng)).collect();
    let mut b = crate::nla::toeplitz(&c)?;
    if noise != 0.0 {
        let g = DenseMatrix::<T>::from_fn(n, n, |_, _| normal(&mut rng));
        b.add_scaled(T::from_f64(noise / (n as f64).sqrt()), &g);
    }
    let basis = toeplitz_basis::<T>(n);
    let query = |x: &[T], y: &[T]| -> T { y.iter().zip(b.matvec(x)).map(|(&a, v)| a * v).sum() };
    let rec = matrix_recovery(query, &basis, p, &stream.child(1))?;
    let nb = b.fro_norm();
    Ok(RecoveryTrial {
        residual: b.sub(&rec.matrix).fro_norm() / nb,
        projection_residual: b.sub(&toeplitz_projection(&b)).fro_norm() / nb,
        basis_rank: rec.basis_rank,
    })
}

pub const RECOVER_SCHEMA: [&str; 9] = ["n", "d", "p", "noise", "trial", "residual", "projection_residual", "ratio", "basis_rank"];

pub fn run_recover<T: Scalar>(n: usize, p: Option<usize>, noise: f64, trials: usize, seed: u64) -> Result<CsvTable> {
    if trials == 0 || n == 0 {
        return Err(param_err("recover needs n >= 1 and trials >= 1"));
    }
    let d = 2 * n - 1;
    let p = p.unwrap_or(6 * d);
    let root = RngStream::new(seed);
    let res: Vec<RecoveryTrial> = (0..trials)
        .into_par_iter()
        .map(|i| toeplitz_recovery_trial::<T>(n, p, noise, &root.child(i as u64)))
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&RECOVER_SCHEMA);
    for (trial, r) in res.into_iter().enumerate() {
        let ratio = if r.projection_residual > 0.0 { r.residual / r.projection_residual } else { f64::NAN };
        t.push(vec![
            CsvValue::from(n),
            d.into(),
            p.into(),
            noise.into(),
            trial.into(),
            r.residual.into(),
            r.projection_residual.into(),
            ratio.into(),
            r.basis_rank.into(),
        ])?;
    }
    Ok(t)
}
