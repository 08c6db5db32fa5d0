//! C ABI over the clusterlab runs.
//!
//! Configurations and reports are opaque heap handles. Every entry point
//! returns a [`ClStatus`]; on failure the message is kept per thread and can
//! be copied out with [`cl_last_error`].

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clusterlab::config::{ConfigFile, OutputFormat, RunConfig, RunKind};
use clusterlab::contour::stationary_point;
use clusterlab::numeric::{ln_abs_rational, DEFAULT_PRECISION};
use clusterlab::partition::{eval_z_by_weight, target_series};
use clusterlab::verify::{render, run_bound_suite, run_contour_suite, run_limit_scan, run_verify_partition};
use clusterlab::Error;

/// Result codes. Zero is success; `CL_CHECKS_FAILED` means a run completed
/// but at least one check did not hold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClStatus {
    ClOk = 0,
    ClChecksFailed = 1,
    ClNullPointer = 2,
    ClInvalidUtf8 = 3,
    ClInvalidParams = 4,
    ClGrowthViolation = 5,
    ClConfigError = 6,
    ClCapExceeded = 7,
    ClNumericFailure = 8,
    ClIoError = 9,
    ClPanic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClRunKind {
    ClPartition = 0,
    ClLimit = 1,
    ClContour = 2,
    ClBounds = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClFormat {
    ClJson = 0,
    ClCsv = 1,
}

/// A resolved run configuration.
pub struct ClConfig {
    kind: RunKind,
    inner: RunConfig,
}

/// A finished run: the rendered bytes and the overall verdict.
pub struct ClReport {
    bytes: Vec<u8>,
    passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(error: &Error) -> ClStatus {
    match error {
        Error::GrowthViolation { .. } => ClStatus::ClGrowthViolation,
        Error::InvalidParams(_) | Error::DomainError { .. } | Error::PreconditionViolated(_) => {
            ClStatus::ClInvalidParams
        }
        Error::Config(_) | Error::Parse(_) => ClStatus::ClConfigError,
        Error::BudgetOverflow { .. } | Error::TreeOverflow { .. } => ClStatus::ClCapExceeded,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => ClStatus::ClIoError,
        _ => ClStatus::ClNumericFailure,
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<ClStatus, Error>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            ClStatus::ClPanic
        }
    }
}

fn kind_of(kind: ClRunKind) -> RunKind {
    match kind {
        ClRunKind::ClPartition => RunKind::Partition,
        ClRunKind::ClLimit => RunKind::Limit,
        ClRunKind::ClContour => RunKind::Contour,
        ClRunKind::ClBounds => RunKind::Bounds,
    }
}

unsafe fn text_arg<'a>(text: *const c_char) -> Result<&'a str, ClStatus> {
    if text.is_null() {
        set_error("null string argument");
        return Err(ClStatus::ClNullPointer);
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        ClStatus::ClInvalidUtf8
    })
}

macro_rules! require {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return ClStatus::ClNullPointer;
        })+
    };
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated) and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let message = e.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// The built-in configuration for `kind`.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn cl_config_default(kind: ClRunKind, out: *mut *mut ClConfig) -> ClStatus {
    require!(out);
    guarded(|| {
        let kind = kind_of(kind);
        let inner = RunConfig::resolve(kind, &ConfigFile::default())?;
        *out = Box::into_raw(Box::new(ClConfig { kind, inner }));
        Ok(ClStatus::ClOk)
    })
}

/// Parses a TOML configuration for `kind`. Relative coupling files resolve
/// against the working directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_config_from_toml(
    kind: ClRunKind,
    toml: *const c_char,
    out: *mut *mut ClConfig,
) -> ClStatus {
    require!(out);
    let text = match text_arg(toml) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let kind = kind_of(kind);
        let inner = RunConfig::resolve(kind, &ConfigFile::from_toml(text)?)?;
        *out = Box::into_raw(Box::new(ClConfig { kind, inner }));
        Ok(ClStatus::ClOk)
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cl_config_set_seed(config: *mut ClConfig, seed: u64) -> ClStatus {
    require!(config);
    (*config).inner.seed = seed;
    ClStatus::ClOk
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_config_free(config: *mut ClConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the suite matching the configuration's kind. Returns `ClOk` or
/// `ClChecksFailed` with a report in `out`, or an error code and no report.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_run(config: *const ClConfig, format: ClFormat, out: *mut *mut ClReport) -> ClStatus {
    require!(config, out);
    let config = &*config;
    guarded(|| {
        let format = match format {
            ClFormat::ClJson => OutputFormat::Json,
            ClFormat::ClCsv => OutputFormat::Csv,
        };
        let c = &config.inner;
        let (bytes, passed) = match config.kind {
            RunKind::Partition => run_verify_partition(c).and_then(|r| Ok((render(&r, format)?, r.passed())))?,
            RunKind::Limit => run_limit_scan(c).and_then(|r| Ok((render(&r, format)?, r.passed())))?,
            RunKind::Contour => run_contour_suite(c).and_then(|r| Ok((render(&r, format)?, r.passed())))?,
            RunKind::Bounds => run_bound_suite(c).and_then(|r| Ok((render(&r, format)?, r.passed())))?,
        };
        *out = Box::into_raw(Box::new(ClReport { bytes, passed }));
        Ok(if passed { ClStatus::ClOk } else { ClStatus::ClChecksFailed })
    })
}

/// 1 if every check in the report held, 0 otherwise (or for null).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cl_report_passed(report: *const ClReport) -> i32 {
    (!report.is_null() && (*report).passed) as i32
}

/// The rendered report. The bytes stay valid until the report is freed and
/// are not NUL-terminated.
///
/// # Safety
/// `report` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_report_bytes(report: *const ClReport, len: *mut usize) -> *const u8 {
    if report.is_null() || len.is_null() {
        return ptr::null();
    }
    *len = (*report).bytes.len();
    (*report).bytes.as_ptr()
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_report_free(report: *mut ClReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// `Z` of the configured instance as an exact `num/den` string. Free it
/// with [`cl_string_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_partition_function(config: *const ClConfig, out: *mut *mut c_char) -> ClStatus {
    require!(config, out);
    let c = &(*config).inner;
    guarded(|| {
        let z = eval_z_by_weight(&c.params, &c.couplings);
        *out = CString::new(z.to_string()).expect("no interior NUL").into_raw();
        Ok(ClStatus::ClOk)
    })
}

/// `(ln |Z|)/N` and the target `Σ pⁱJᵢ` of the configured instance.
///
/// # Safety
/// `config` must be a live handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cl_log_partition_per_site(
    config: *const ClConfig,
    ln_z_per_n: *mut f64,
    target: *mut f64,
) -> ClStatus {
    require!(config, ln_z_per_n, target);
    let c = &(*config).inner;
    guarded(|| {
        let z = eval_z_by_weight(&c.params, &c.couplings);
        *ln_z_per_n = ln_abs_rational(&z) / c.params.n() as f64;
        *target = target_series(&c.params, &c.couplings);
        Ok(ClStatus::ClOk)
    })
}

/// The root `w*` of `ψ(w) = ln a`.
///
/// # Safety
/// `w_star` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_stationary_point(a: f64, w_star: *mut f64) -> ClStatus {
    require!(w_star);
    guarded(|| {
        *w_star = stationary_point(a)?.w_star;
        Ok(ClStatus::ClOk)
    })
}

/// Bits used for floating evaluations unless a config says otherwise.
#[no_mangle]
pub extern "C" fn cl_default_precision() -> usize {
    DEFAULT_PRECISION
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        unsafe { cl_last_error(buf.as_mut_ptr(), buf.len()) };
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn null_out_pointer_is_reported() {
        let status = unsafe { cl_config_default(ClRunKind::ClPartition, ptr::null_mut()) };
        assert_eq!(status, ClStatus::ClNullPointer);
        assert!(last_error().contains("null pointer"));
    }

    #[test]
    fn growth_violation_maps_to_its_code() {
        let toml = CString::new("r = 1\nimax = 3\ncouplings = [2, 0]").unwrap();
        let mut config = ptr::null_mut();
        let status = unsafe { cl_config_from_toml(ClRunKind::ClPartition, toml.as_ptr(), &mut config) };
        assert_eq!(status, ClStatus::ClGrowthViolation);
        assert!(config.is_null());
        assert!(last_error().contains("J_2"));
    }

    #[test]
    fn stationary_point_rejects_nonpositive_activity() {
        let mut w = 0.0;
        assert_eq!(unsafe { cl_stationary_point(1.0, &mut w) }, ClStatus::ClOk);
        assert!((w - 1.461632144968362).abs() < 1e-12);
        assert_ne!(unsafe { cl_stationary_point(-1.0, &mut w) }, ClStatus::ClOk);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(cl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
