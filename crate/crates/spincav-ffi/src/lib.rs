//! C interface to the gate simulator.
//!
//! Configurations are parsed once into an opaque handle; every operation
//! takes the handle and returns its report as an owned, NUL-terminated
//! UTF-8 JSON string (CSV for trajectory and region tables). Status codes
//! mirror the CLI exit codes, with an extra slot for argument errors. On
//! any non-OK status a thread-local message is available through
//! `spincav_last_error`.
//!
//! Ownership rules: strings returned through out-pointers must be released
//! with `spincav_string_free`; handles with `spincav_config_free`. The
//! pointer returned by `spincav_last_error` is borrowed and only valid on
//! the calling thread until the next library call there.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spincav::cli::{check_report, gate_report, scan_report, simulate_report, solve_area_report};
use spincav::config::{parse_config, RunConfig};
use spincav::{Error, Result};

/// Parsed run configuration. Opaque to C callers.
pub struct SpincavConfig(RunConfig);

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpincavStatus {
    /// Operation succeeded.
    Ok = 0,
    /// A pointer argument was null or otherwise unusable.
    InvalidArgument = 1,
    /// Input failed validation (bad JSON, schema violation, broken invariant).
    Validation = 2,
    /// Numerical failure: non-finite values or a solver that did not converge.
    Numerical = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean: String = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("interior NULs removed");
    });
}

fn status_of(err: &Error) -> SpincavStatus {
    match err {
        Error::Validation(_) | Error::Io(_) => SpincavStatus::Validation,
        Error::Numerical(_) => SpincavStatus::Numerical,
    }
}

/// Writes `text` into `out` as an owned C string; `out` must be non-null.
unsafe fn emit(out: *mut *mut c_char, text: String) -> SpincavStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            SpincavStatus::Ok
        }
        Err(_) => {
            set_error("result contained an interior NUL byte");
            SpincavStatus::Numerical
        }
    }
}

/// Shared guts of the single-output operations: null checks, panic
/// containment, error capture.
unsafe fn run_op<F>(
    config: *const SpincavConfig,
    out_json: *mut *mut c_char,
    op: F,
) -> SpincavStatus
where
    F: FnOnce(&RunConfig) -> Result<String>,
{
    if config.is_null() {
        set_error("config handle is null");
        return SpincavStatus::InvalidArgument;
    }
    if out_json.is_null() {
        set_error("output pointer is null");
        return SpincavStatus::InvalidArgument;
    }
    *out_json = ptr::null_mut();
    let cfg = &(*config).0;
    match catch_unwind(AssertUnwindSafe(|| op(cfg))) {
        Ok(Ok(json)) => emit(out_json, json),
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SpincavStatus::Numerical
        }
    }
}

/// Parses a JSON run configuration into a new handle.
///
/// # Safety
/// `json` must point to a NUL-terminated string; `out` must be a valid
/// writable pointer. On success `*out` owns the handle until
/// `spincav_config_free`.
#[no_mangle]
pub unsafe extern "C" fn spincav_config_parse(
    json: *const c_char,
    out: *mut *mut SpincavConfig,
) -> SpincavStatus {
    if json.is_null() {
        set_error("config text is null");
        return SpincavStatus::InvalidArgument;
    }
    if out.is_null() {
        set_error("output pointer is null");
        return SpincavStatus::InvalidArgument;
    }
    *out = ptr::null_mut();
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config text is not valid UTF-8");
            return SpincavStatus::InvalidArgument;
        }
    };
    match catch_unwind(|| parse_config(text)) {
        Ok(Ok(config)) => {
            *out = Box::into_raw(Box::new(SpincavConfig(config)));
            SpincavStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SpincavStatus::Numerical
        }
    }
}

/// Releases a handle from `spincav_config_parse`. Null is a no-op.
///
/// # Safety
/// `config` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spincav_config_free(config: *mut SpincavConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spincav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Adiabaticity check of every dot against the configured margin policy.
///
/// # Safety
/// `config` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spincav_check(
    config: *const SpincavConfig,
    out_json: *mut *mut c_char,
) -> SpincavStatus {
    run_op(config, out_json, check_report)
}

/// Solves the first dot's peak laser coupling for the configured pulse area.
///
/// # Safety
/// `config` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spincav_solve_area(
    config: *const SpincavConfig,
    out_json: *mut *mut c_char,
) -> SpincavStatus {
    run_op(config, out_json, solve_area_report)
}

/// Extracts the two-qubit gate for the configured device and grid.
///
/// # Safety
/// `config` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spincav_gate(
    config: *const SpincavConfig,
    out_json: *mut *mut c_char,
) -> SpincavStatus {
    run_op(config, out_json, gate_report)
}

/// Propagates the configured initial state. Either output may be null to
/// skip it; the trajectory is produced by the same single run.
///
/// # Safety
/// `config` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn spincav_simulate(
    config: *const SpincavConfig,
    out_summary_json: *mut *mut c_char,
    out_trajectory_csv: *mut *mut c_char,
) -> SpincavStatus {
    if config.is_null() {
        set_error("config handle is null");
        return SpincavStatus::InvalidArgument;
    }
    if out_summary_json.is_null() && out_trajectory_csv.is_null() {
        set_error("both output pointers are null");
        return SpincavStatus::InvalidArgument;
    }
    if !out_summary_json.is_null() {
        *out_summary_json = ptr::null_mut();
    }
    if !out_trajectory_csv.is_null() {
        *out_trajectory_csv = ptr::null_mut();
    }
    let cfg = &(*config).0;
    match catch_unwind(AssertUnwindSafe(|| simulate_report(cfg))) {
        Ok(Ok((json, csv))) => {
            if !out_summary_json.is_null() {
                let status = emit(out_summary_json, json);
                if status != SpincavStatus::Ok {
                    return status;
                }
            }
            if !out_trajectory_csv.is_null() {
                return emit(out_trajectory_csv, csv);
            }
            SpincavStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SpincavStatus::Numerical
        }
    }
}

/// Runs the configured feasibility scan. Either output may be null to
/// skip it; both come from the same scan.
///
/// # Safety
/// `config` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn spincav_scan(
    config: *const SpincavConfig,
    out_region_json: *mut *mut c_char,
    out_region_csv: *mut *mut c_char,
) -> SpincavStatus {
    if config.is_null() {
        set_error("config handle is null");
        return SpincavStatus::InvalidArgument;
    }
    if out_region_json.is_null() && out_region_csv.is_null() {
        set_error("both output pointers are null");
        return SpincavStatus::InvalidArgument;
    }
    if !out_region_json.is_null() {
        *out_region_json = ptr::null_mut();
    }
    if !out_region_csv.is_null() {
        *out_region_csv = ptr::null_mut();
    }
    let cfg = &(*config).0;
    match catch_unwind(AssertUnwindSafe(|| scan_report(cfg))) {
        Ok(Ok((json, csv))) => {
            if !out_region_json.is_null() {
                let status = emit(out_region_json, json);
                if status != SpincavStatus::Ok {
                    return status;
                }
            }
            if !out_region_csv.is_null() {
                return emit(out_region_csv, csv);
            }
            SpincavStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SpincavStatus::Numerical
        }
    }
}

/// Message for the most recent failure on this thread; empty string if
/// none. Borrowed; valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn spincav_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn spincav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_static_and_nul_terminated() {
        let v = unsafe { CStr::from_ptr(spincav_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn error_slot_survives_replacement() {
        set_error("first");
        let p1 = spincav_last_error();
        assert_eq!(unsafe { CStr::from_ptr(p1) }.to_str().unwrap(), "first");
        set_error("second\0with nul");
        let p2 = spincav_last_error();
        assert_eq!(
            unsafe { CStr::from_ptr(p2) }.to_str().unwrap(),
            "second with nul"
        );
    }
}
