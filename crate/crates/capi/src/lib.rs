//! C ABI over the rsthp link-level simulator.
//!
//! Conventions:
//! - Handles (`RsthpExperiment`, `RsthpResults`) are opaque; create them
//!   through the constructors here and release them with the matching
//!   `*_free` function. Every `*_free` accepts null.
//! - Every fallible call returns an [`RsthpStatus`]; `RSTHP_STATUS_OK` is 0.
//!   On failure a thread-local message is set, readable through
//!   [`rsthp_last_error_message`] until the next failing call on the same
//!   thread.
//! - Out-parameters are written only on success.
//! - Panics never unwind across the boundary: they are caught and reported
//!   as `RSTHP_STATUS_PANIC`.
//! - Strings returned as `char*` out-parameters are owned by the caller and
//!   must be released with [`rsthp_string_free`]. Strings returned as
//!   `const char*` borrow from the handle (or are static) and must not be
//!   freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rsthp::error::Error;
use rsthp::flops::{count_to_f64, flops_scheme, FlopsModel, FlopsScheme};
use rsthp::harness::{
    benchmark_spec, run_benchmark, run_experiment, to_csv, to_json, ExperimentSpec,
    ResultRow,
};

/// Result of every fallible API call. `RSTHP_STATUS_OK` is zero so the
/// usual `if (rsthp_...(...))` error check works.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsthpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The experiment or an argument failed validation.
    ConfigError = 3,
    /// The computation failed numerically (rank deficiency, divergence, …).
    NumericError = 4,
    /// An index was past the end of the results.
    IndexOutOfRange = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Opaque experiment description: schemes, SNR grid, system geometry,
/// error model, and the common-stream power policy.
pub struct RsthpExperiment {
    spec: ExperimentSpec,
}

/// Opaque result table produced by running an experiment.
pub struct RsthpResults {
    rows: Vec<ResultRow>,
    scheme_ids: Vec<CString>,
}

/// One row of a result table, as plain numbers. The scheme id is exposed
/// separately through [`rsthp_results_scheme`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsthpResultRow {
    pub snr_db: f64,
    pub sigma_e2: f64,
    /// Common-stream power fraction the row was evaluated at.
    pub delta: f64,
    pub esr_total: f64,
    pub esr_common: f64,
    pub esr_private: f64,
    /// 95% confidence halfwidth on `esr_total`.
    pub ci_halfwidth: f64,
    pub n_channels: usize,
    pub n_errors: usize,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsthpStatus {
    set_error(e.to_string());
    if e.is_numeric() {
        RsthpStatus::NumericError
    } else {
        RsthpStatus::ConfigError
    }
}

fn null_argument(name: &str) -> RsthpStatus {
    set_error(format!("{name} must not be null"));
    RsthpStatus::NullArgument
}

/// Run `f` with panics fenced off at the ABI boundary.
fn guarded<F: FnOnce() -> RsthpStatus>(f: F) -> RsthpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {text}"));
            RsthpStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, RsthpStatus> {
    if ptr.is_null() {
        return Err(null_argument(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        RsthpStatus::InvalidUtf8
    })
}

fn results_from_rows(rows: Vec<ResultRow>) -> Result<RsthpResults, RsthpStatus> {
    let scheme_ids = rows
        .iter()
        .map(|r| {
            CString::new(r.scheme.clone()).map_err(|_| {
                set_error("scheme id contains an interior NUL".into());
                RsthpStatus::ConfigError
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RsthpResults { rows, scheme_ids })
}

/// Library version as a static string; never free it.
#[no_mangle]
pub extern "C" fn rsthp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or null if the last
/// call succeeded or nothing ran yet. Valid until the next failing call on
/// the same thread; never free it.
#[no_mangle]
pub extern "C" fn rsthp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Parse an experiment description from TOML text (same schema as the CLI's
/// `run --config` files). On success writes a new handle to `out`.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_experiment_from_toml(
    text: *const c_char,
    out: *mut *mut RsthpExperiment,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let text = match str_arg(text, "text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let spec = match ExperimentSpec::from_toml(text) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        if let Err(e) = spec.resolve() {
            return status_of(&e);
        }
        *out = Box::into_raw(Box::new(RsthpExperiment { spec }));
        RsthpStatus::Ok
    })
}

/// Build the preset benchmark experiment: the six-scheme lineup at 20 dB,
/// (12 antennas, 6 users × 2), at one channel-error variance.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_experiment_benchmark(
    seed: u64,
    mc_channels: usize,
    mc_errors: usize,
    sigma_e2: f64,
    out: *mut *mut RsthpExperiment,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let spec = benchmark_spec(seed, mc_channels, mc_errors, sigma_e2);
        if let Err(e) = spec.resolve() {
            return status_of(&e);
        }
        *out = Box::into_raw(Box::new(RsthpExperiment { spec }));
        RsthpStatus::Ok
    })
}

/// Override the experiment's seed.
///
/// # Safety
/// `experiment` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rsthp_experiment_set_seed(
    experiment: *mut RsthpExperiment,
    seed: u64,
) -> RsthpStatus {
    guarded(|| {
        let Some(exp) = experiment.as_mut() else {
            return null_argument("experiment");
        };
        exp.spec.system.seed = seed;
        RsthpStatus::Ok
    })
}

/// Release an experiment handle (null is a no-op).
///
/// # Safety
/// `experiment` must be null or a live handle from this library; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsthp_experiment_free(experiment: *mut RsthpExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Run the experiment and hand back a result table. Deterministic: the same
/// experiment and seed produce the same table on every run and thread count.
///
/// # Safety
/// `experiment` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_experiment_run(
    experiment: *const RsthpExperiment,
    out: *mut *mut RsthpResults,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let Some(exp) = experiment.as_ref() else {
            return null_argument("experiment");
        };
        let rows = match run_experiment(&exp.spec) {
            Ok(rows) => rows,
            Err(e) => return status_of(&e),
        };
        match results_from_rows(rows) {
            Ok(results) => {
                *out = Box::into_raw(Box::new(results));
                RsthpStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Run the full three-variance benchmark table (18 rows) in one call.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_run_benchmark(
    seed: u64,
    mc_channels: usize,
    mc_errors: usize,
    out: *mut *mut RsthpResults,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let rows = match run_benchmark(seed, mc_channels, mc_errors) {
            Ok(rows) => rows,
            Err(e) => return status_of(&e),
        };
        match results_from_rows(rows) {
            Ok(results) => {
                *out = Box::into_raw(Box::new(results));
                RsthpStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Number of rows in a result table; 0 for null.
///
/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_len(results: *const RsthpResults) -> usize {
    results.as_ref().map_or(0, |r| r.rows.len())
}

/// Copy row `index` into `out`.
///
/// # Safety
/// `results` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_row(
    results: *const RsthpResults,
    index: usize,
    out: *mut RsthpResultRow,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let Some(res) = results.as_ref() else {
            return null_argument("results");
        };
        let Some(row) = res.rows.get(index) else {
            set_error(format!(
                "row {index} out of range (table has {} rows)",
                res.rows.len()
            ));
            return RsthpStatus::IndexOutOfRange;
        };
        *out = RsthpResultRow {
            snr_db: row.snr_db,
            sigma_e2: row.sigma_e2,
            delta: row.delta,
            esr_total: row.esr_total,
            esr_common: row.esr_common,
            esr_private: row.esr_private,
            ci_halfwidth: row.ci_halfwidth,
            n_channels: row.n_channels,
            n_errors: row.n_errors,
            seed: row.seed,
        };
        RsthpStatus::Ok
    })
}

/// Scheme id of row `index`, borrowed from the table (valid until the table
/// is freed; never free it). Null if the handle is null or the index is out
/// of range.
///
/// # Safety
/// `results` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_scheme(
    results: *const RsthpResults,
    index: usize,
) -> *const c_char {
    results
        .as_ref()
        .and_then(|r| r.scheme_ids.get(index))
        .map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Render the whole table as CSV (header plus one line per row). The string
/// is owned by the caller: release it with [`rsthp_string_free`].
///
/// # Safety
/// `results` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_csv(
    results: *const RsthpResults,
    out: *mut *mut c_char,
) -> RsthpStatus {
    render(results, out, |rows| Ok(to_csv(rows)))
}

/// Render the whole table as a pretty JSON array. The string is owned by
/// the caller: release it with [`rsthp_string_free`].
///
/// # Safety
/// `results` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_json(
    results: *const RsthpResults,
    out: *mut *mut c_char,
) -> RsthpStatus {
    render(results, out, |rows| to_json(rows).map_err(|e| status_of(&e)))
}

unsafe fn render(
    results: *const RsthpResults,
    out: *mut *mut c_char,
    f: impl FnOnce(&[ResultRow]) -> Result<String, RsthpStatus>,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let Some(res) = results.as_ref() else {
            return null_argument("results");
        };
        let text = match f(&res.rows) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match CString::new(text) {
            Ok(c) => {
                *out = c.into_raw();
                RsthpStatus::Ok
            }
            Err(_) => {
                set_error("rendered table contains an interior NUL".into());
                RsthpStatus::ConfigError
            }
        }
    })
}

/// Release a result table (null is a no-op).
///
/// # Safety
/// `results` must be null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsthp_results_free(results: *mut RsthpResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

/// Release a string produced by this library.
///
/// # Safety
/// `s` must be null or a string returned through a `char**` out-parameter
/// of this library; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rsthp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Per-frame floating-point operation count of a scheme's transmit chain
/// at `n` antennas and `k` users. `scheme_id` uses the CLI's flops ids,
/// e.g. "zf-thp" or "rs-mmse-thp-mmsec" (case-insensitive).
///
/// # Safety
/// `scheme_id` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rsthp_flops(
    scheme_id: *const c_char,
    n: i64,
    k: i64,
    out: *mut f64,
) -> RsthpStatus {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        let id = match str_arg(scheme_id, "scheme_id") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let scheme = match FlopsScheme::parse(id) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        let model = match FlopsModel::new(scheme, n, k) {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        *out = count_to_f64(flops_scheme(model));
        RsthpStatus::Ok
    })
}
