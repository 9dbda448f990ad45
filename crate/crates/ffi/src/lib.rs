//! C ABI for `zmw-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_build` and released by the matching `*_free`. Every fallible call
//! returns a [`ZmwStatus`]; on failure the message is available from
//! [`zmw_last_error_message`] on the same thread until the next failing call.
//! Strings returned to the caller are freed with [`zmw_string_free`].
//! Panics are caught at the boundary and reported as `ZMW_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use zmw_core::identities::{run_suite, SuiteConfig};
use zmw_core::moments::{i_empirical, i_report, MomentJob};
use zmw_core::special::{zeta, SmoothWeight};
use zmw_core::{euler, Complex64, Error, ShiftSet, ShiftedTauTable};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZmwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidShiftSet = 3,
    Domain = 4,
    Divergent = 5,
    Resource = 6,
    Bounds = 7,
    Io = 8,
    Panic = 9,
}

/// A complex number as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZmwComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ZmwComplex {
    fn from(z: Complex64) -> Self {
        ZmwComplex { re: z.re, im: z.im }
    }
}

/// Opaque shift set.
pub struct ZmwShiftSet(ShiftSet);

/// Opaque table of `tau_A(n)`.
pub struct ZmwTauTable(ShiftedTauTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> ZmwStatus {
    match err {
        Error::InvalidShiftSet(_) => ZmwStatus::InvalidShiftSet,
        Error::Domain(_) | Error::Evaluation { .. } => ZmwStatus::Domain,
        Error::Divergent(_) => ZmwStatus::Divergent,
        Error::Resource { .. } => ZmwStatus::Resource,
        Error::Bounds { .. } => ZmwStatus::Bounds,
        Error::Io(_) | Error::Format(_) | Error::Json(_) => ZmwStatus::Io,
        Error::InvalidArgument(_) | Error::Config(_) => ZmwStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> ZmwStatus
where
    F: FnOnce() -> Result<(), ZmwFailure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZmwStatus::Ok,
        Ok(Err(ZmwFailure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ZmwStatus::Panic
        }
    }
}

struct ZmwFailure(ZmwStatus, String);

impl From<Error> for ZmwFailure {
    fn from(e: Error) -> Self {
        ZmwFailure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> ZmwFailure {
    ZmwFailure(ZmwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, ZmwFailure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), ZmwFailure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, ZmwFailure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| ZmwFailure(ZmwStatus::Io, "string contains a NUL byte".into()))
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zmw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zmw_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!("zmw ", env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(c) => c,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Frees a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zmw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a shift set from `len` real and imaginary parts. With `allow_repeats`
/// nonzero, repeated entries are accepted (e.g. `{0, 0}` for the divisor
/// function); otherwise entries must be pairwise separated.
#[no_mangle]
pub unsafe extern "C" fn zmw_shift_set_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    allow_repeats: i32,
    out: *mut *mut ZmwShiftSet,
) -> ZmwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let shifts: Vec<Complex64> = if len == 0 {
            Vec::new()
        } else {
            if re.is_null() || im.is_null() {
                return Err(null("re/im"));
            }
            let re = std::slice::from_raw_parts(re, len);
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let set = if allow_repeats != 0 {
            ShiftSet::multiset(shifts)?
        } else {
            ShiftSet::new(shifts)?
        };
        out.write(Box::into_raw(Box::new(ZmwShiftSet(set))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn zmw_shift_set_len(set: *const ZmwShiftSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Frees a shift set. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zmw_shift_set_free(set: *mut ZmwShiftSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Riemann zeta at `re + i im`.
#[no_mangle]
pub unsafe extern "C" fn zmw_zeta(re: f64, im: f64, out: *mut ZmwComplex) -> ZmwStatus {
    guard(|| {
        let v = zeta(Complex64::new(re, im))?;
        write(out, v.into(), "out")
    })
}

/// `tau_A(n)` for `1 <= n <= limit`.
#[no_mangle]
pub unsafe extern "C" fn zmw_tau_table_build(set: *const ZmwShiftSet, limit: u64, out: *mut *mut ZmwTauTable) -> ZmwStatus {
    guard(|| {
        let set = deref(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let table = ShiftedTauTable::build(&set.0, limit as usize)?;
        out.write(Box::into_raw(Box::new(ZmwTauTable(table))));
        Ok(())
    })
}

/// `tau_A(n)`; `n = 0` and `n > limit` are bounds errors.
#[no_mangle]
pub unsafe extern "C" fn zmw_tau_table_get(table: *const ZmwTauTable, n: u64, out: *mut ZmwComplex) -> ZmwStatus {
    guard(|| {
        let table = deref(table, "table")?;
        if n == 0 {
            return Err(ZmwFailure(ZmwStatus::Bounds, "tau_A(n) starts at n = 1".into()));
        }
        let v = table.0.try_get(n)?;
        write(out, v.into(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn zmw_tau_table_limit(table: *const ZmwTauTable) -> u64 {
    table.as_ref().map_or(0, |t| t.0.limit() as u64)
}

/// Frees a table. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zmw_tau_table_free(table: *mut ZmwTauTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// The Euler product `A(A, B)` over primes `<= bound`, corrected for the
/// omitted primes, with its error estimate.
#[no_mangle]
pub unsafe extern "C" fn zmw_euler_a(
    a: *const ZmwShiftSet,
    b: *const ZmwShiftSet,
    bound: u64,
    value: *mut ZmwComplex,
    error_estimate: *mut f64,
) -> ZmwStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let prod = euler::global_a(&a.0, &b.0, bound)?;
        write(value, prod.value.into(), "value")?;
        if !error_estimate.is_null() {
            error_estimate.write(prod.error_estimate());
        }
        Ok(())
    })
}

/// `I(T; X)` from two tables covering `X`, with the standard weight.
#[no_mangle]
pub unsafe extern "C" fn zmw_moment_empirical(
    a: *const ZmwTauTable,
    b: *const ZmwTauTable,
    big_t: f64,
    x: u64,
    out: *mut ZmwComplex,
) -> ZmwStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let v = i_empirical(&a.0, &b.0, big_t, x, SmoothWeight::standard())?;
        write(out, v.value.into(), "out")
    })
}

/// Empirical and conjectured `I(T; X)` as a JSON report (timings excluded).
/// Free the string with [`zmw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn zmw_moment_report_json(
    a: *const ZmwShiftSet,
    b: *const ZmwShiftSet,
    big_t: f64,
    x: u64,
    prime_bound: u64,
    json_out: *mut *mut c_char,
) -> ZmwStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let job = MomentJob {
            a: a.0.clone(),
            b: b.0.clone(),
            big_t,
            x,
            prime_bound,
        };
        let report = i_report(&job, SmoothWeight::standard())?;
        json_out.write(into_c_string(report.payload().to_string())?);
        Ok(())
    })
}

/// Runs the random-draw identity suite. `passed` receives 1 when every
/// identity met its tolerance.
#[no_mangle]
pub unsafe extern "C" fn zmw_identities_json(seed: u64, draws: u64, passed: *mut i32, json_out: *mut *mut c_char) -> ZmwStatus {
    guard(|| {
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let cfg = SuiteConfig {
            seed,
            draws,
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg)?;
        if !passed.is_null() {
            passed.write(i32::from(report.passed));
        }
        let text = serde_json::to_string(&report).map_err(Error::from)?;
        json_out.write(into_c_string(text)?);
        Ok(())
    })
}
