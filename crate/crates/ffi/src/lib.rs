//! C ABI over the `dataplane-sim` library.
//!
//! Conventions:
//! - Every fallible function returns a [`DpsStatus`]; `DPS_STATUS_OK` is zero.
//!   On failure a message is available from [`dps_last_error`] on the same thread.
//! - Scenarios and run results are opaque handles created by `dps_*` constructors
//!   and released with the matching `*_free` function. Passing NULL to a free
//!   function is a no-op.
//! - Strings returned through out-parameters are owned by the caller and must be
//!   released with [`dps_string_free`].
//! - Panics never cross the boundary; they are reported as `DPS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dataplane_sim::delay::{self, Load};
use dataplane_sim::metrics::{self, percentile};
use dataplane_sim::schemes::find_bestfit_upf;
use dataplane_sim::{
    run_to_completion, validate_scenario, RunResult, Scenario, SimError, SummaryReport,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidScenario = 4,
    Domain = 5,
    Io = 6,
    UnknownScheme = 7,
    Internal = 8,
    Panic = 9,
}

/// Opaque scenario handle.
pub struct DpsScenario {
    inner: Scenario,
}

/// Opaque handle to a finished run and its summary.
pub struct DpsRunResult {
    run: RunResult,
    summary: SummaryReport,
    e2e_sorted: Vec<f64>,
}

/// Request accounting of a finished run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpsCounts {
    pub generated: u64,
    pub completed: u64,
    pub dropped: u64,
    pub residual: u64,
    pub epochs_run: u64,
    /// Non-zero when the drain cap stopped the run early.
    pub truncated: u8,
}

/// Load of one server as seen by an assignment decision.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpsLoad {
    pub queue_len: u64,
    pub headroom: f64,
    pub capacity: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: DpsStatus,
    message: String,
}

impl Failure {
    fn new(status: DpsStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(DpsStatus::NullPointer, format!("{what} is NULL"))
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match &e {
            SimError::Domain { .. }
            | SimError::BoundExceeded { .. }
            | SimError::EmptySnapshot(_) => DpsStatus::Domain,
            SimError::InvalidScenario(_) | SimError::Topology(_) => DpsStatus::InvalidScenario,
            SimError::UnknownScheme { .. } | SimError::UnknownQos(_) => DpsStatus::UnknownScheme,
            SimError::Parse(_) => DpsStatus::Parse,
            SimError::Io(_) => DpsStatus::Io,
            SimError::Invariant(_) => DpsStatus::Internal,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DpsStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            DpsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(DpsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(DpsStatus::Internal, "string contains NUL"))
}

unsafe fn scenario_ref<'a>(s: *const DpsScenario) -> Result<&'a DpsScenario, Failure> {
    s.as_ref().ok_or_else(|| Failure::null("scenario"))
}

unsafe fn scenario_mut<'a>(s: *mut DpsScenario) -> Result<&'a mut DpsScenario, Failure> {
    s.as_mut().ok_or_else(|| Failure::null("scenario"))
}

unsafe fn run_ref<'a>(r: *const DpsRunResult) -> Result<&'a DpsRunResult, Failure> {
    r.as_ref().ok_or_else(|| Failure::null("run result"))
}

unsafe fn put_scenario(out: *mut *mut DpsScenario, inner: Scenario) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(Box::into_raw(Box::new(DpsScenario { inner })));
    Ok(())
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn dps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn dps_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a handle holding the bundled five-pair scenario.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_default(out: *mut *mut DpsScenario) -> DpsStatus {
    guard(|| put_scenario(out, Scenario::table1()))
}

/// Creates a handle holding the bundled pair-count sweep scenario.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_capex(out: *mut *mut DpsScenario) -> DpsStatus {
    guard(|| put_scenario(out, Scenario::capex()))
}

/// Parses a scenario from TOML text. The scenario is not validated here.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut DpsScenario,
) -> DpsStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        put_scenario(out, Scenario::from_toml_str(text)?)
    })
}

/// Loads a scenario from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_from_file(
    path: *const c_char,
    out: *mut *mut DpsScenario,
) -> DpsStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        put_scenario(out, Scenario::load(path)?)
    })
}

/// Serializes a scenario back to TOML.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_to_toml(
    scenario: *const DpsScenario,
    out: *mut *mut c_char,
) -> DpsStatus {
    guard(|| {
        let text = scenario_ref(scenario)?.inner.to_toml_string()?;
        write_out(out, into_c_string(text)?, "out")
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_set_seed(scenario: *mut DpsScenario, seed: u64) -> DpsStatus {
    guard(|| {
        scenario_mut(scenario)?.inner.seed = seed;
        Ok(())
    })
}

/// Sets the assignment scheme by name (e.g. `"baseline"`, `"bestfit-upf-mec"`).
///
/// # Safety
/// `scenario` must be a live handle; `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_set_scheme(
    scenario: *mut DpsScenario,
    name: *const c_char,
) -> DpsStatus {
    guard(|| {
        let s = scenario_mut(scenario)?;
        s.inner.scheme = read_str(name, "name")?.parse()?;
        Ok(())
    })
}

/// Sets the mean number of arrivals per epoch.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_set_arrival_rate(
    scenario: *mut DpsScenario,
    per_epoch: f64,
) -> DpsStatus {
    guard(|| {
        scenario_mut(scenario)?
            .inner
            .traffic
            .mean_arrivals_per_epoch = per_epoch;
        Ok(())
    })
}

/// Resizes the topology to `pairs` co-located UPF-MEC pairs.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_set_pairs(
    scenario: *mut DpsScenario,
    pairs: usize,
) -> DpsStatus {
    guard(|| {
        if pairs == 0 {
            return Err(Failure::new(DpsStatus::Domain, "pairs must be >= 1"));
        }
        let s = scenario_mut(scenario)?;
        s.inner = s.inner.with_pairs(pairs);
        Ok(())
    })
}

/// Checks every scenario invariant. Returns `DPS_STATUS_OK` when valid and
/// `DPS_STATUS_INVALID_SCENARIO` otherwise. When `report_json` is non-NULL it
/// receives the list of violations as JSON in both cases.
///
/// # Safety
/// `scenario` must be a live handle; `report_json` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_validate(
    scenario: *const DpsScenario,
    report_json: *mut *mut c_char,
) -> DpsStatus {
    guard(|| {
        let report = validate_scenario(&scenario_ref(scenario)?.inner);
        if !report_json.is_null() {
            let json = serde_json::to_string(&report)
                .map_err(|e| Failure::new(DpsStatus::Internal, e.to_string()))?;
            report_json.write(into_c_string(json)?);
        }
        if report.is_valid() {
            Ok(())
        } else {
            Err(Failure::new(DpsStatus::InvalidScenario, report.to_string()))
        }
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dps_scenario_free(scenario: *mut DpsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Validates and runs a scenario to completion.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_run(
    scenario: *const DpsScenario,
    out: *mut *mut DpsRunResult,
) -> DpsStatus {
    guard(|| {
        let s = &scenario_ref(scenario)?.inner;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let run = run_to_completion(s)?;
        let summary = metrics::summarize(&run);
        let mut e2e_sorted = metrics::e2e_samples(&run, None);
        e2e_sorted.sort_by(f64::total_cmp);
        out.write(Box::into_raw(Box::new(DpsRunResult {
            run,
            summary,
            e2e_sorted,
        })));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_run_counts(
    result: *const DpsRunResult,
    out: *mut DpsCounts,
) -> DpsStatus {
    guard(|| {
        let r = &run_ref(result)?.run;
        let counts = DpsCounts {
            generated: r.generated,
            completed: r.completed,
            dropped: r.dropped,
            residual: r.residual,
            epochs_run: r.epochs_run,
            truncated: r.truncated as u8,
        };
        write_out(out, counts, "out")
    })
}

/// Summary report (per-UPF/MEC delays, percentiles, threshold compliance) as JSON.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_run_summary_json(
    result: *const DpsRunResult,
    out: *mut *mut c_char,
) -> DpsStatus {
    guard(|| {
        let json = serde_json::to_string(&run_ref(result)?.summary)
            .map_err(|e| Failure::new(DpsStatus::Internal, e.to_string()))?;
        write_out(out, into_c_string(json)?, "out")
    })
}

/// Nearest-rank percentile `p` (0, 100] of the end-to-end delay of completed
/// requests, in ms. Fails with `DPS_STATUS_DOMAIN` when nothing completed or `p` is
/// out of range.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_run_e2e_percentile(
    result: *const DpsRunResult,
    p: f64,
    out: *mut f64,
) -> DpsStatus {
    guard(|| {
        let r = run_ref(result)?;
        if !(p > 0.0 && p <= 100.0) {
            return Err(Failure::new(
                DpsStatus::Domain,
                format!("percentile {p} outside (0, 100]"),
            ));
        }
        let v = percentile(&r.e2e_sorted, p)
            .ok_or_else(|| Failure::new(DpsStatus::Domain, "no completed requests"))?;
        write_out(out, v, "out")
    })
}

/// # Safety
/// `result` must be NULL or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dps_run_free(result: *mut DpsRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Projected compute delay (ms) of one more request at a UPF bucket.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_upf_projected_delay(
    queue_len: u64,
    headroom: f64,
    capacity: f64,
    delta_ms: f64,
    out: *mut f64,
) -> DpsStatus {
    guard(|| {
        let v = delay::upf_projected_delay(queue_len, headroom, capacity, delta_ms)?;
        write_out(out, v, "out")
    })
}

/// Link delay (ms) of `n_share` requests of `bytes` each on a link of
/// `bandwidth_mbps`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_net_delay(
    n_share: u64,
    bytes: f64,
    bandwidth_mbps: f64,
    delta_ms: f64,
    out: *mut f64,
) -> DpsStatus {
    guard(|| {
        let bw = dataplane_sim::model::mbps_to_bits_per_ms(bandwidth_mbps);
        let v = delay::net_delay(n_share, bytes, bw, delta_ms)?;
        write_out(out, v, "out")
    })
}

/// Index (0-based) and projected delay of the least-loaded server among `len` loads.
///
/// # Safety
/// `loads` must point to `len` readable elements; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dps_find_bestfit(
    loads: *const DpsLoad,
    len: usize,
    delta_ms: f64,
    out_index: *mut usize,
    out_delay: *mut f64,
) -> DpsStatus {
    guard(|| {
        if loads.is_null() && len > 0 {
            return Err(Failure::null("loads"));
        }
        if out_index.is_null() || out_delay.is_null() {
            return Err(Failure::null("out"));
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(loads, len)
        };
        let loads: Vec<Load> = slice
            .iter()
            .map(|l| Load::new(l.queue_len, l.headroom, l.capacity))
            .collect();
        let (i, d) = find_bestfit_upf(&loads, delta_ms)?;
        out_index.write(i);
        out_delay.write(d);
        Ok(())
    })
}
