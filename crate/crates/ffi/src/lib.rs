//! C ABI over the surrogate store and the closed-form centered-inclusion
//! oracle.
//!
//! Every fallible function returns a [`PbsStatus`]; on failure a message is
//! kept per thread and can be copied out with [`pbs_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pbsurrogate::oracle::{exact_boundary_series, CenteredInclusionProblem, MAX_TERMS};
use pbsurrogate::surrogate::SurrogateStore;
use pbsurrogate::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    MissingFile = 4,
    Io = 5,
    Format = 6,
    Numeric = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A loaded surrogate store.
pub struct PbsStore {
    inner: SurrogateStore,
}

/// A centered-inclusion problem with fixed Neumann data.
pub struct PbsOracle {
    inner: CenteredInclusionProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> PbsStatus {
    match err {
        Error::ParameterOutsideDomain(_) | Error::PointOutsideDomain(..) => PbsStatus::OutsideDomain,
        Error::MissingArtifact(_) => PbsStatus::MissingFile,
        Error::Io(_) => PbsStatus::Io,
        Error::StoreFormat(_) => PbsStatus::Format,
        Error::InvalidArgument(_) | Error::Config(_) | Error::EmptyDesign | Error::InvalidStart(_) => {
            PbsStatus::InvalidArgument
        }
        _ => PbsStatus::Numeric,
    }
}

fn fail(status: PbsStatus, msg: impl Into<String>) -> PbsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PbsStatus) -> PbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(PbsStatus::Panic, "internal panic"),
    }
}

fn from_result(r: pbsurrogate::Result<()>) -> PbsStatus {
    match r {
        Ok(()) => PbsStatus::Ok,
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes, into `buf`. Returns the full message length
/// excluding the terminator; pass a null `buf` to query it.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn pbs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a store written by the preprocessing stage.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_load(path: *const c_char, out: *mut *mut PbsStore) -> PbsStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(PbsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(PbsStatus::InvalidArgument, "path is not valid UTF-8");
        };
        match SurrogateStore::load(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PbsStore { inner }));
                PbsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a store; null is ignored.
///
/// # Safety
/// `store` must be null or come from [`pbs_store_load`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_free(store: *mut PbsStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of design points, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_len(store: *const PbsStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.len())
}

/// Parameter dimension, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_dim(store: *const PbsStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.design.dim)
}

/// Observations per evaluation, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_num_observations(store: *const PbsStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.m)
}

/// Number of neighbors the store was built for, or 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_default_k(store: *const PbsStore) -> usize {
    store.as_ref().map_or(0, |s| s.inner.k_default)
}

unsafe fn theta_slice<'a>(store: &PbsStore, theta: *const f64, dim: usize) -> Result<&'a [f64], PbsStatus> {
    if theta.is_null() {
        return Err(fail(PbsStatus::NullPointer, "null parameter vector"));
    }
    if dim != store.inner.design.dim {
        return Err(fail(
            PbsStatus::InvalidArgument,
            format!("parameter has {dim} components, store expects {}", store.inner.design.dim),
        ));
    }
    Ok(std::slice::from_raw_parts(theta, dim))
}

/// Writes the surrogate observation vector at `theta` into `out`, which
/// must hold at least [`pbs_store_num_observations`] values. `k = 0`
/// selects the store's default.
///
/// # Safety
/// `theta` must point to `dim` values and `out` to `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_evaluate(
    store: *const PbsStore,
    theta: *const f64,
    dim: usize,
    k: usize,
    out: *mut f64,
    out_len: usize,
) -> PbsStatus {
    guard(|| {
        let (Some(store), false) = (store.as_ref(), out.is_null()) else {
            return fail(PbsStatus::NullPointer, "null argument");
        };
        let theta = match theta_slice(store, theta, dim) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out_len < store.inner.m {
            return fail(PbsStatus::BufferTooSmall, format!("output needs {} values", store.inner.m));
        }
        let k = if k == 0 { store.inner.k_default } else { k };
        match store.inner.evaluate(theta, k, store.inner.eta) {
            Ok(values) => {
                ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
                PbsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// A-posteriori bounds at `theta`: the residual bound and the solution
/// error bound (residual over the coercivity constant). `k = 0` selects the
/// store's default.
///
/// # Safety
/// `theta` must point to `dim` values; the outputs must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pbs_store_error_bound(
    store: *const PbsStore,
    theta: *const f64,
    dim: usize,
    k: usize,
    residual: *mut f64,
    solution: *mut f64,
) -> PbsStatus {
    guard(|| {
        let Some(store) = store.as_ref() else {
            return fail(PbsStatus::NullPointer, "null store");
        };
        if residual.is_null() || solution.is_null() {
            return fail(PbsStatus::NullPointer, "null output");
        }
        let theta = match theta_slice(store, theta, dim) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let k = if k == 0 { store.inner.k_default } else { k };
        from_result(store.inner.error_bound(theta, k, store.inner.eta).map(|b| {
            *residual = b.residual;
            *solution = b.solution;
        }))
    })
}

/// Creates an oracle for an inclusion of conductivity `1 + contrast` and
/// radius `radius` in the unit disk, with flux `Σ_n flux_coeffs[n-1] cos(nθ)`.
///
/// # Safety
/// `flux_coeffs` must point to `n_coeffs` values; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pbs_oracle_new(
    contrast: f64,
    radius: f64,
    flux_coeffs: *const f64,
    n_coeffs: usize,
    out: *mut *mut PbsOracle,
) -> PbsStatus {
    guard(|| {
        if out.is_null() || (flux_coeffs.is_null() && n_coeffs > 0) {
            return fail(PbsStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        if n_coeffs > MAX_TERMS {
            return fail(PbsStatus::InvalidArgument, format!("at most {MAX_TERMS} flux terms"));
        }
        let coeffs =
            if n_coeffs == 0 { Vec::new() } else { std::slice::from_raw_parts(flux_coeffs, n_coeffs).to_vec() };
        match CenteredInclusionProblem::new(contrast, radius, coeffs) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PbsOracle { inner }));
                PbsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Boundary potential `u(1, angle)`.
///
/// # Safety
/// `oracle` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pbs_oracle_eval(oracle: *const PbsOracle, angle: f64, out: *mut f64) -> PbsStatus {
    guard(|| {
        let (Some(oracle), false) = (oracle.as_ref(), out.is_null()) else {
            return fail(PbsStatus::NullPointer, "null argument");
        };
        if !angle.is_finite() {
            return fail(PbsStatus::InvalidArgument, "angle must be finite");
        }
        *out = exact_boundary_series(&oracle.inner, angle);
        PbsStatus::Ok
    })
}

/// Releases an oracle; null is ignored.
///
/// # Safety
/// `oracle` must be null or come from [`pbs_oracle_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pbs_oracle_free(oracle: *mut PbsOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}
