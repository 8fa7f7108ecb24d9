//! C ABI bindings.
//!
//! Real double-precision only. Matrices cross the boundary as contiguous
//! column-major arrays; the caller owns every buffer it passes in and
//! allocates every output buffer at the documented size. Handles are opaque
//! and released with their `_free` function. Every fallible call returns an
//! [`SkStatus`]; the message for the most recent failure on the calling
//! thread is available from [`sk_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use sketchkit::diagnostics::injectivity_of;
use sketchkit::nla::{nystrom_psd, rsvd, sketch_and_solve, NystromOptions};
use sketchkit::sketch::{BaseDist, Family, TestMatrix};
use sketchkit::{DenseMatrix, Error, LowRank, RngStream};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NonFinite = 3,
    NotPositiveDefinite = 4,
    InvalidParameter = 5,
    BudgetExceeded = 6,
    NoConvergence = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkFamilyKind {
    Gaussian = 0,
    SparseStack = 1,
    SparseUniform = 2,
    SparseIid = 3,
    SparseCol = 4,
    SparseRtt = 5,
    KhatriRao = 6,
}

/// Base distribution of the Khatri–Rao factors. Only the real ones are valid here.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkBaseDist {
    RealGaussian = 0,
    RealRademacher = 1,
    RealSpherical = 2,
}

/// Family and parameters. Fields not used by `kind` are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SkFamily {
    pub kind: SkFamilyKind,
    /// Nonzeros per row (SparseStack, SparseUniform).
    pub zeta: usize,
    /// Expected nonzeros per row (SparseIid).
    pub density: f64,
    /// Nonzeros per column (SparseCol), or sampled columns (SparseRtt, 0 for the default).
    pub xi: usize,
    /// Factor dimension (KhatriRao).
    pub d0: usize,
    pub base: SkBaseDist,
}

/// Opaque random test matrix `Ω ∈ R^{d×k}`.
pub struct SkTestMatrix {
    inner: Box<dyn TestMatrix<f64>>,
}

/// Opaque low-rank approximation.
pub struct SkLowRank {
    inner: LowRank<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SkStatus {
    match e {
        Error::DimensionMismatch(_) => SkStatus::DimensionMismatch,
        Error::NonFinite { .. } => SkStatus::NonFinite,
        Error::PositiveDefiniteness { .. } => SkStatus::NotPositiveDefinite,
        Error::InvalidParameter(_) | Error::UnknownKey(_) => SkStatus::InvalidParameter,
        Error::BudgetExceeded { .. } => SkStatus::BudgetExceeded,
        Error::NoConvergence(_) => SkStatus::NoConvergence,
        Error::Parse { .. } | Error::Csv(_) => SkStatus::Parse,
        Error::Io(_) => SkStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

/// Runs `f`, records any failure and turns it into a status.
fn guard(f: impl FnOnce() -> FfiResult) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            SkStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SkStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

/// Reads a column-major `rows × cols` matrix.
unsafe fn read_matrix(p: *const f64, rows: usize, cols: usize, what: &'static str) -> FfiResult<DenseMatrix<f64>> {
    let len = rows.checked_mul(cols).ok_or_else(|| Error::InvalidParameter(format!("{what}: size overflows")))?;
    if len == 0 {
        return Ok(DenseMatrix::zeros(rows, cols));
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    let data = slice::from_raw_parts(p, len).to_vec();
    Ok(DenseMatrix::from_col_major(rows, cols, data)?)
}

unsafe fn write_matrix(m: &DenseMatrix<f64>, out: *mut f64, what: &'static str) -> FfiResult {
    let data = m.data();
    if data.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    Ok(())
}

fn family_of(f: &SkFamily) -> Family {
    match f.kind {
        SkFamilyKind::Gaussian => Family::Gaussian,
        SkFamilyKind::SparseStack => Family::SparseStack { zeta: f.zeta, dist: None },
        SkFamilyKind::SparseUniform => Family::SparseUniform { zeta: f.zeta, dist: None },
        SkFamilyKind::SparseIid => Family::SparseIid { zeta: f.density, dist: None },
        SkFamilyKind::SparseCol => Family::SparseCol { xi: f.xi, dist: None },
        SkFamilyKind::SparseRtt => Family::SparseRtt {
            xi: (f.xi > 0).then_some(f.xi),
            transform: None,
            diag: None,
        },
        SkFamilyKind::KhatriRao => Family::KhatriRao {
            d0: f.d0,
            base: match f.base {
                SkBaseDist::RealGaussian => BaseDist::RealGaussian,
                SkBaseDist::RealRademacher => BaseDist::RealRademacher,
                SkBaseDist::RealSpherical => BaseDist::RealSpherical,
            },
        },
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(c) => c,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Draws `Ω ∈ R^{d×k}` from `family` with the given seed.
#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_new(
    family: *const SkFamily,
    d: usize,
    k: usize,
    seed: u64,
    out: *mut *mut SkTestMatrix,
) -> SkStatus {
    guard(|| {
        let family = nonnull(family, "family")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = family_of(family).build::<f64>(d, k, &RngStream::new(seed))?;
        *out = Box::into_raw(Box::new(SkTestMatrix { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_free(tm: *mut SkTestMatrix) {
    if !tm.is_null() {
        drop(Box::from_raw(tm));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_dims(tm: *const SkTestMatrix, d: *mut usize, k: *mut usize) -> SkStatus {
    guard(|| {
        let tm = nonnull(tm, "tm")?;
        if d.is_null() || k.is_null() {
            return Err(Failure::Null("d/k"));
        }
        *d = tm.inner.d();
        *k = tm.inner.k();
        Ok(())
    })
}

/// `out (k×m) = Ω* b` for `b` of size `d×m`.
#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_apply_adjoint(tm: *const SkTestMatrix, b: *const f64, m: usize, out: *mut f64) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        let b = read_matrix(b, tm.d(), m, "b")?;
        write_matrix(&tm.apply_adjoint(&b)?, out, "out")
    })
}

/// `out (d×m) = Ω c` for `c` of size `k×m`.
#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_apply(tm: *const SkTestMatrix, c: *const f64, m: usize, out: *mut f64) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        let c = read_matrix(c, tm.k(), m, "c")?;
        write_matrix(&tm.apply(&c)?, out, "out")
    })
}

/// `out (n×k) = A Ω` for `A` of size `n×d`.
#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_apply_right(tm: *const SkTestMatrix, a: *const f64, n: usize, out: *mut f64) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        let a = read_matrix(a, n, tm.d(), "a")?;
        write_matrix(&tm.apply_right(&a)?, out, "out")
    })
}

/// Writes the explicit `d×k` matrix `Ω`.
#[no_mangle]
pub unsafe extern "C" fn sk_test_matrix_materialize(tm: *const SkTestMatrix, out: *mut f64) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        write_matrix(&tm.materialize(), out, "out")
    })
}

/// Injectivity `σ_min²(Ω* Q)` and dilation `σ_max²(Ω* Q)` for an orthonormal `d×r` basis `Q`.
#[no_mangle]
pub unsafe extern "C" fn sk_injectivity(
    tm: *const SkTestMatrix,
    q: *const f64,
    r: usize,
    alpha: *mut f64,
    beta: *mut f64,
) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        if alpha.is_null() || beta.is_null() {
            return Err(Failure::Null("alpha/beta"));
        }
        let q = read_matrix(q, tm.d(), r, "q")?;
        let m = injectivity_of(tm.as_ref(), &q)?;
        *alpha = m.alpha;
        *beta = m.beta;
        Ok(())
    })
}

/// Randomized SVD of the `n×d` matrix `a` with range sketch `A Ω`.
#[no_mangle]
pub unsafe extern "C" fn sk_rsvd(a: *const f64, n: usize, tm: *const SkTestMatrix, out: *mut *mut SkLowRank) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let a = read_matrix(a, n, tm.d(), "a")?;
        let inner = rsvd(&a, tm.as_ref())?;
        *out = Box::into_raw(Box::new(SkLowRank { inner }));
        Ok(())
    })
}

/// Nyström approximation of the psd `n×n` matrix `a`.
#[no_mangle]
pub unsafe extern "C" fn sk_nystrom_psd(a: *const f64, n: usize, tm: *const SkTestMatrix, out: *mut *mut SkLowRank) -> SkStatus {
    guard(|| {
        let tm = &nonnull(tm, "tm")?.inner;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let a = read_matrix(a, n, n, "a")?;
        let inner = nystrom_psd(&a, tm.as_ref(), &NystromOptions::default())?;
        *out = Box::into_raw(Box::new(SkLowRank { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sk_low_rank_free(lr: *mut SkLowRank) {
    if !lr.is_null() {
        drop(Box::from_raw(lr));
    }
}

/// Shape `rows × cols` and rank of the approximation.
#[no_mangle]
pub unsafe extern "C" fn sk_low_rank_dims(lr: *const SkLowRank, rows: *mut usize, cols: *mut usize, rank: *mut usize) -> SkStatus {
    guard(|| {
        let lr = &nonnull(lr, "lr")?.inner;
        if rows.is_null() || cols.is_null() || rank.is_null() {
            return Err(Failure::Null("rows/cols/rank"));
        }
        (*rows, *cols) = lr.shape();
        *rank = lr.rank();
        Ok(())
    })
}

/// Writes the dense `rows × cols` approximation.
#[no_mangle]
pub unsafe extern "C" fn sk_low_rank_to_dense(lr: *const SkLowRank, out: *mut f64) -> SkStatus {
    guard(|| {
        let lr = &nonnull(lr, "lr")?.inner;
        write_matrix(&lr.to_dense(), out, "out")
    })
}

/// Sketch-and-solve least squares: `out (d×m) = (Ψ* A)† (Ψ* B)` for `A` of size `n×d` and `B` of size `n×m`.
#[no_mangle]
pub unsafe extern "C" fn sk_sketch_and_solve(
    a: *const f64,
    n: usize,
    d: usize,
    b: *const f64,
    m: usize,
    psi: *const SkTestMatrix,
    out: *mut f64,
) -> SkStatus {
    guard(|| {
        let psi = &nonnull(psi, "psi")?.inner;
        let a = read_matrix(a, n, d, "a")?;
        let b = read_matrix(b, n, m, "b")?;
        write_matrix(&sketch_and_solve(&a, &b, psi.as_ref())?, out, "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> SkFamily {
        SkFamily {
            kind: SkFamilyKind::Gaussian,
            zeta: 0,
            density: 0.0,
            xi: 0,
            d0: 0,
            base: SkBaseDist::RealGaussian,
        }
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::InvalidParameter("x".into())), SkStatus::InvalidParameter);
        assert_eq!(status_of(&Error::UnknownKey("x".into())), SkStatus::InvalidParameter);
        assert_eq!(status_of(&Error::NoConvergence("x".into())), SkStatus::NoConvergence);
    }

    #[test]
    fn panic_is_contained() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, SkStatus::Panic);
        let msg = unsafe { CStr::from_ptr(sk_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }

    #[test]
    fn null_family_reported() {
        let mut out = ptr::null_mut();
        let s = unsafe { sk_test_matrix_new(ptr::null(), 4, 2, 0, &mut out) };
        assert_eq!(s, SkStatus::NullPointer);
        assert!(out.is_null());
        let f = gaussian();
        assert_eq!(unsafe { sk_test_matrix_new(&f, 4, 2, 0, ptr::null_mut()) }, SkStatus::NullPointer);
    }
}
