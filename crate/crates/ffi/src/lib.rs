//! C ABI for the `quadproj` solver.
//!
//! Quadrics and projectors are opaque heap handles created by `qp_*_new` and
//! released by the matching `qp_*_free`. Every fallible call returns a
//! [`QpStatus`]; on failure a message for the calling thread is available
//! from [`qp_last_error`]. Matrices are dense, row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use quadproj::nalgebra::{DMatrix, DVector};
use quadproj::{Error, Projector, Quadric, QuadricKind};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotSymmetric = 3,
    /// Conical, cylindrical, parabolic or empty quadric.
    Unsupported = 4,
    NoConvergence = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpKind {
    Conical = 0,
    Central = 1,
    Parabolic = 2,
}

/// Output of [`qp_quadric_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QpClass {
    pub kind: QpKind,
    pub cylindrical: bool,
    /// True when [`qp_projector_new`] accepts the quadric.
    pub supported: bool,
    pub dim: usize,
    pub rank_a: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Per-projection diagnostics filled by [`qp_project`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpProjectionInfo {
    pub distance: f64,
    /// Multiplier in standardized coordinates.
    pub multiplier: f64,
    pub newton_iterations: usize,
    pub candidates: usize,
    pub degenerate: bool,
    pub root_found: bool,
}

/// Opaque quadric handle.
pub struct QpQuadric {
    inner: Quadric,
}

/// Opaque projector handle: a quadric with its eigendecomposition cached.
pub struct QpProjector {
    inner: Projector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: QpStatus, msg: impl AsRef<str>) -> QpStatus {
    set_last_error(msg.as_ref());
    status
}

fn status_of(err: &Error) -> QpStatus {
    match err {
        Error::NotSymmetric { .. } => QpStatus::NotSymmetric,
        Error::DimensionMismatch { .. }
        | Error::EmptyDimension
        | Error::ZeroQuadratic
        | Error::NonFinite
        | Error::ZeroNormal
        | Error::CostGuard { .. } => QpStatus::InvalidArgument,
        Error::NoConvergence { .. } | Error::MaxIterations { .. } => QpStatus::NoConvergence,
        e if e.is_unsupported_quadric() => QpStatus::Unsupported,
        _ => QpStatus::Internal,
    }
}

fn from_error(err: Error) -> QpStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `body`, turning panics into [`QpStatus::Panic`].
fn guard(body: impl FnOnce() -> QpStatus) -> QpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(QpStatus::Ok) => {
            set_last_error("");
            QpStatus::Ok
        }
        Ok(status) => status,
        Err(_) => fail(QpStatus::Panic, "panic inside quadproj"),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next `qp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the quadric `x^T A x + b^T x + c`.
///
/// # Safety
/// `a` must point to `n * n` doubles, `b` to `n` doubles and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_quadric_new(
    n: usize,
    a: *const f64,
    b: *const f64,
    c: f64,
    out: *mut *mut QpQuadric,
) -> QpStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(QpStatus::NullPointer, "null argument to qp_quadric_new");
        }
        *out = ptr::null_mut();
        if n == 0 {
            return fail(QpStatus::InvalidArgument, "dimension must be at least 1");
        }
        let Some(len) = n.checked_mul(n) else {
            return fail(QpStatus::InvalidArgument, "dimension overflows");
        };
        let a = DMatrix::from_row_slice(n, n, slice::from_raw_parts(a, len));
        let b = DVector::from_column_slice(slice::from_raw_parts(b, n));
        match Quadric::new(a, b, c) {
            Ok(q) => {
                *out = Box::into_raw(Box::new(QpQuadric { inner: q }));
                QpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `q` must be null or a handle from [`qp_quadric_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_quadric_free(q: *mut QpQuadric) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Dimension of `q`, or 0 for a null handle.
///
/// # Safety
/// `q` must be null or a live quadric handle.
#[no_mangle]
pub unsafe extern "C" fn qp_quadric_dim(q: *const QpQuadric) -> usize {
    q.as_ref().map_or(0, |q| q.inner.dim())
}

/// Writes `x^T A x + b^T x + c` to `out`.
///
/// # Safety
/// `q` must be a live quadric handle, `x` must point to `dim` doubles and
/// `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn qp_quadric_evaluate(q: *const QpQuadric, x: *const f64, out: *mut f64) -> QpStatus {
    guard(|| {
        let (Some(q), false, false) = (q.as_ref(), x.is_null(), out.is_null()) else {
            return fail(QpStatus::NullPointer, "null argument to qp_quadric_evaluate");
        };
        let x = DVector::from_column_slice(slice::from_raw_parts(x, q.inner.dim()));
        *out = q.inner.evaluate(&x);
        QpStatus::Ok
    })
}

/// Writes the rank-based classification of `q` to `out`.
///
/// # Safety
/// `q` must be a live quadric handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_quadric_classify(q: *const QpQuadric, out: *mut QpClass) -> QpStatus {
    guard(|| {
        let (Some(q), Some(out)) = (q.as_ref(), out.as_mut()) else {
            return fail(QpStatus::NullPointer, "null argument to qp_quadric_classify");
        };
        let class = q.inner.classify();
        *out = QpClass {
            kind: match class.kind {
                QuadricKind::Conical => QpKind::Conical,
                QuadricKind::Central => QpKind::Central,
                QuadricKind::Parabolic => QpKind::Parabolic,
            },
            cylindrical: class.cylindrical,
            supported: class.is_supported(),
            dim: class.dim,
            rank_a: class.rank_a,
            positives: class.positives,
            negatives: class.negatives,
        };
        QpStatus::Ok
    })
}

/// Standardizes `q` once so repeated projections skip the eigendecomposition.
/// The projector keeps its own copy; `q` may be freed afterwards.
///
/// # Safety
/// `q` must be a live quadric handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_projector_new(q: *const QpQuadric, out: *mut *mut QpProjector) -> QpStatus {
    guard(|| {
        if out.is_null() {
            return fail(QpStatus::NullPointer, "null argument to qp_projector_new");
        }
        *out = ptr::null_mut();
        let Some(q) = q.as_ref() else {
            return fail(QpStatus::NullPointer, "null argument to qp_projector_new");
        };
        match Projector::new(q.inner.clone()) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(QpProjector { inner: p }));
                QpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `p` must be null or a handle from [`qp_projector_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_projector_free(p: *mut QpProjector) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be null or a live projector handle.
#[no_mangle]
pub unsafe extern "C" fn qp_projector_dim(p: *const QpProjector) -> usize {
    p.as_ref().map_or(0, |p| p.inner.dim())
}

/// Projects `x0` onto the quadric, writing the nearest point to `point`.
/// `info` may be null.
///
/// A projector is immutable, so concurrent calls on one handle are fine.
///
/// # Safety
/// `p` must be a live projector handle; `x0` and `point` must each hold `dim`
/// doubles and may alias.
#[no_mangle]
pub unsafe extern "C" fn qp_project(
    p: *const QpProjector,
    x0: *const f64,
    point: *mut f64,
    info: *mut QpProjectionInfo,
) -> QpStatus {
    guard(|| {
        let (Some(p), false, false) = (p.as_ref(), x0.is_null(), point.is_null()) else {
            return fail(QpStatus::NullPointer, "null argument to qp_project");
        };
        let n = p.inner.dim();
        let x0 = DVector::from_column_slice(slice::from_raw_parts(x0, n));
        let res = match p.inner.project(&x0) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        slice::from_raw_parts_mut(point, n).copy_from_slice(res.point.as_slice());
        if let Some(info) = info.as_mut() {
            *info = QpProjectionInfo {
                distance: res.distance,
                multiplier: res.multiplier,
                newton_iterations: res.newton_iterations,
                candidates: res.candidates.len(),
                degenerate: res.degenerate,
                root_found: res.root_found,
            };
        }
        QpStatus::Ok
    })
}
