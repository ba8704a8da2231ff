//! C interface to scenario generation, exact solving, and age measurement.
//!
//! Handles returned through `out` parameters are owned by the caller and must
//! be released with the matching `_free` function. Calls never unwind across
//! the boundary: a caught panic reports [`AionetStatus::Panic`]. Every failing
//! call stores a message retrievable with [`aionet_last_error`]; the pointer
//! stays valid until the next library call on the same thread.
//!
//! The generated header lives at `include/aionet.h` and is refreshed by the
//! build script whenever this file changes.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aionet::{
    build_milp, generate_scenario, load_scenario, save_scenario, save_schedule, solve_bnb,
    system_metrics, GenerationConfig, LpError, ModelError, ObjectiveConfig, Proof, Scenario,
    ScenarioError, Solution, SolveOptions, SolverError, Technology,
};

/// Result of a library call. Anything but `Ok` leaves a diagnostic in
/// [`aionet_last_error`].
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AionetStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument value is out of range or malformed (bad weights, bad gap,
    /// non-UTF-8 text, index past the end).
    InvalidArgument = 2,
    /// The input data is structurally invalid (unparsable JSON, inconsistent
    /// scenario, schedule from a different network).
    InvalidInput = 3,
    /// A file could not be read or written.
    Io = 4,
    /// The operation refused to start because it would exceed a size limit.
    Limit = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// What the solver certified about a returned schedule.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AionetProofKind {
    /// The schedule attains the minimum objective value.
    Optimal = 0,
    /// The objective is within the reported relative gap of the minimum.
    GapBounded = 1,
    /// Feasible only; no bound was proven.
    Heuristic = 2,
}

/// Link technology of a scheduled transmission.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AionetTechnology {
    Rf = 0,
    Oc = 1,
}

/// Opaque network instance: devices, demand windows, visibility, budgets.
pub struct AionetScenario {
    inner: Scenario,
}

/// Opaque solve result: schedule, objective breakdown, certificate.
pub struct AionetSolution {
    inner: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn set_error(status: AionetStatus, message: impl std::fmt::Display) -> AionetStatus {
    let text = message.to_string();
    let text = CString::new(text)
        .unwrap_or_else(|_| CString::new("diagnostic contained an interior NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
    status
}

/// Runs a call body with the last error cleared and panics contained.
fn guard<F: FnOnce() -> AionetStatus>(body: F) -> AionetStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => set_error(AionetStatus::Panic, "internal panic; see stderr for details"),
    }
}

macro_rules! ffi_try {
    ($result:expr) => {
        match $result {
            Ok(value) => value,
            Err(status) => return status,
        }
    };
}

unsafe fn require_str<'a>(
    pointer: *const c_char,
    what: &'static str,
) -> Result<&'a str, AionetStatus> {
    if pointer.is_null() {
        return Err(set_error(
            AionetStatus::NullArgument,
            format_args!("{what} must not be null"),
        ));
    }
    CStr::from_ptr(pointer).to_str().map_err(|_| {
        set_error(
            AionetStatus::InvalidArgument,
            format_args!("{what} must be valid UTF-8"),
        )
    })
}

unsafe fn require_ref<'a, T>(pointer: *const T, what: &'static str) -> Result<&'a T, AionetStatus> {
    if pointer.is_null() {
        Err(set_error(
            AionetStatus::NullArgument,
            format_args!("{what} must not be null"),
        ))
    } else {
        Ok(&*pointer)
    }
}

unsafe fn require_out<'a, T>(pointer: *mut T, what: &'static str) -> Result<&'a mut T, AionetStatus> {
    if pointer.is_null() {
        Err(set_error(
            AionetStatus::NullArgument,
            format_args!("{what} must not be null"),
        ))
    } else {
        Ok(&mut *pointer)
    }
}

fn scenario_status(error: &ScenarioError) -> AionetStatus {
    match error {
        ScenarioError::Io(_) => AionetStatus::Io,
        _ => AionetStatus::InvalidInput,
    }
}

fn model_status(error: &ModelError) -> AionetStatus {
    match error {
        ModelError::BadAlpha { .. } => AionetStatus::InvalidArgument,
        ModelError::Io(_) => AionetStatus::Io,
        _ => AionetStatus::InvalidInput,
    }
}

fn solver_status(error: &SolverError) -> AionetStatus {
    match error {
        SolverError::SearchSpace { .. } => AionetStatus::Limit,
        SolverError::BadOptions(_) => AionetStatus::InvalidArgument,
        SolverError::Model(inner) => model_status(inner),
    }
}

fn weights_config(
    scenario: &Scenario,
    alpha: [f64; 3],
) -> Result<ObjectiveConfig, AionetStatus> {
    ObjectiveConfig::for_scenario(scenario, alpha).map_err(|e| set_error(model_status(&e), e))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aionet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or null if the
/// most recent call succeeded. Valid until the next library call on the same
/// thread; do not free.
#[no_mangle]
pub extern "C" fn aionet_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(text) => text.as_ptr(),
        None => ptr::null(),
    })
}

/// Generates a scenario from a JSON generation config and a seed. Pass null
/// for `config_json` to use the built-in defaults. The same config and seed
/// always produce the same scenario. On success `*out` owns the handle.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_generate(
    config_json: *const c_char,
    seed: u64,
    out: *mut *mut AionetScenario,
) -> AionetStatus {
    guard(|| {
        let slot = ffi_try!(require_out(out, "out"));
        *slot = ptr::null_mut();
        let config = if config_json.is_null() {
            GenerationConfig::default()
        } else {
            let text = ffi_try!(require_str(config_json, "config_json"));
            match serde_json::from_str::<GenerationConfig>(text) {
                Ok(config) => config,
                Err(e) => {
                    return set_error(AionetStatus::InvalidInput, format_args!("config: {e}"))
                }
            }
        };
        match generate_scenario(&config, seed) {
            Ok(scenario) => {
                *slot = Box::into_raw(Box::new(AionetScenario { inner: scenario }));
                AionetStatus::Ok
            }
            Err(e) => set_error(scenario_status(&e), e),
        }
    })
}

/// Loads a scenario from a JSON file produced by [`aionet_scenario_save`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_load(
    path: *const c_char,
    out: *mut *mut AionetScenario,
) -> AionetStatus {
    guard(|| {
        let slot = ffi_try!(require_out(out, "out"));
        *slot = ptr::null_mut();
        let path = ffi_try!(require_str(path, "path"));
        match load_scenario(Path::new(path)) {
            Ok(scenario) => {
                *slot = Box::into_raw(Box::new(AionetScenario { inner: scenario }));
                AionetStatus::Ok
            }
            Err(e) => set_error(scenario_status(&e), e),
        }
    })
}

/// Writes the scenario to a JSON file.
///
/// # Safety
/// `scenario` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_save(
    scenario: *const AionetScenario,
    path: *const c_char,
) -> AionetStatus {
    guard(|| {
        let scenario = ffi_try!(require_ref(scenario, "scenario"));
        let path = ffi_try!(require_str(path, "path"));
        match save_scenario(&scenario.inner, Path::new(path)) {
            Ok(()) => AionetStatus::Ok,
            Err(e) => set_error(scenario_status(&e), e),
        }
    })
}

/// Releases a scenario handle. Null is a no-op.
///
/// # Safety
/// `scenario` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_free(scenario: *mut AionetScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Device count (nodes plus access points); 0 when the handle is null.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_devices(scenario: *const AionetScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.n_devices()
}

/// Number of demanded messages; 0 when the handle is null.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_messages(scenario: *const AionetScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.messages.len()
}

/// Number of time slots in the horizon; 0 when the handle is null.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_horizon(scenario: *const AionetScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.horizon
}

/// Unscheduled-message delay penalty in slots; 0 when the handle is null.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_scenario_tau(scenario: *const AionetScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.tau
}

/// Minimizes the weighted objective by branch and bound. The three weights
/// must be finite, non-negative, and sum to one. `gap_target` 0 demands a
/// proven optimum; larger values accept any schedule proven within that
/// relative gap. `node_limit` 0 means unlimited, as does a non-positive
/// `time_limit_secs`. On success `*out` owns the solution handle.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aionet_solve(
    scenario: *const AionetScenario,
    alpha_energy: f64,
    alpha_switching: f64,
    alpha_delay: f64,
    gap_target: f64,
    node_limit: u64,
    time_limit_secs: f64,
    out: *mut *mut AionetSolution,
) -> AionetStatus {
    guard(|| {
        let slot = ffi_try!(require_out(out, "out"));
        *slot = ptr::null_mut();
        let scenario = ffi_try!(require_ref(scenario, "scenario"));
        let cfg = ffi_try!(weights_config(
            &scenario.inner,
            [alpha_energy, alpha_switching, alpha_delay],
        ));
        let options = SolveOptions {
            gap_target,
            node_limit: if node_limit == 0 { None } else { Some(node_limit) },
            time_limit_secs: if time_limit_secs > 0.0 {
                Some(time_limit_secs)
            } else {
                None
            },
        };
        match solve_bnb(&scenario.inner, &cfg, &options) {
            Ok(solution) => {
                *slot = Box::into_raw(Box::new(AionetSolution { inner: solution }));
                AionetStatus::Ok
            }
            Err(e) => set_error(solver_status(&e), e),
        }
    })
}

/// Releases a solution handle. Null is a no-op.
///
/// # Safety
/// `solution` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_free(solution: *mut AionetSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Total weighted objective value; NaN when the handle is null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_objective(solution: *const AionetSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    (*solution).inner.objective.total
}

/// Raw energy consumed by the schedule, in energy units; NaN when null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_energy(solution: *const AionetSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    (*solution).inner.objective.energy_raw
}

/// Number of technology switches the schedule incurs; 0 when null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_switches(solution: *const AionetSolution) -> u64 {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.objective.switching_raw
}

/// Total delay in slots, counting the penalty for unscheduled messages; 0
/// when null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_delay(solution: *const AionetSolution) -> u64 {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.objective.delay_raw
}

/// Search states visited while solving; 0 when null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_nodes(solution: *const AionetSolution) -> u64 {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.stats.nodes
}

/// Number of scheduled transmissions; 0 when null.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_transmissions(solution: *const AionetSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.schedule.transmissions().len()
}

/// Reports the solver's certificate: the proof kind and the relative gap (0
/// for a proven optimum, infinity when no bound was proven).
///
/// # Safety
/// `solution` must be a live handle; `kind` and `gap` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_proof(
    solution: *const AionetSolution,
    kind: *mut AionetProofKind,
    gap: *mut f64,
) -> AionetStatus {
    guard(|| {
        let solution = ffi_try!(require_ref(solution, "solution"));
        let kind_slot = ffi_try!(require_out(kind, "kind"));
        let gap_slot = ffi_try!(require_out(gap, "gap"));
        let (proof_kind, proof_gap) = match &solution.inner.proof {
            Proof::Optimal => (AionetProofKind::Optimal, 0.0),
            Proof::GapBounded { gap } => (AionetProofKind::GapBounded, *gap),
            Proof::Heuristic => (AionetProofKind::Heuristic, f64::INFINITY),
        };
        *kind_slot = proof_kind;
        *gap_slot = proof_gap;
        AionetStatus::Ok
    })
}

/// Copies one scheduled transmission out by index (ordered by step, then
/// sender). Fails with `InvalidArgument` when `index` is past the end.
///
/// # Safety
/// `solution` must be a live handle; the four out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_transmission(
    solution: *const AionetSolution,
    index: usize,
    sender: *mut usize,
    receiver: *mut usize,
    technology: *mut AionetTechnology,
    step: *mut usize,
) -> AionetStatus {
    guard(|| {
        let solution = ffi_try!(require_ref(solution, "solution"));
        let sender_slot = ffi_try!(require_out(sender, "sender"));
        let receiver_slot = ffi_try!(require_out(receiver, "receiver"));
        let technology_slot = ffi_try!(require_out(technology, "technology"));
        let step_slot = ffi_try!(require_out(step, "step"));
        let transmissions = solution.inner.schedule.transmissions();
        let Some(transmission) = transmissions.get(index) else {
            return set_error(
                AionetStatus::InvalidArgument,
                format_args!(
                    "transmission index {index} out of range ({} scheduled)",
                    transmissions.len()
                ),
            );
        };
        *sender_slot = transmission.sender;
        *receiver_slot = transmission.receiver;
        *technology_slot = match transmission.tech {
            Technology::Rf => AionetTechnology::Rf,
            Technology::Oc => AionetTechnology::Oc,
        };
        *step_slot = transmission.step;
        AionetStatus::Ok
    })
}

/// Writes the solution's schedule to a JSON file readable by the CLI.
///
/// # Safety
/// `solution` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_save_schedule(
    solution: *const AionetSolution,
    path: *const c_char,
) -> AionetStatus {
    guard(|| {
        let solution = ffi_try!(require_ref(solution, "solution"));
        let path = ffi_try!(require_str(path, "path"));
        match save_schedule(&solution.inner.schedule, Path::new(path)) {
            Ok(()) => AionetStatus::Ok,
            Err(e) => set_error(model_status(&e), e),
        }
    })
}

/// Serializes the full solution (schedule, objective breakdown, certificate,
/// search stats) to a JSON string. Free the result with
/// [`aionet_string_free`].
///
/// # Safety
/// `solution` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aionet_solution_to_json(
    solution: *const AionetSolution,
    out: *mut *mut c_char,
) -> AionetStatus {
    guard(|| {
        let slot = ffi_try!(require_out(out, "out"));
        *slot = ptr::null_mut();
        let solution = ffi_try!(require_ref(solution, "solution"));
        emit_json(serde_json::to_string(&solution.inner), slot)
    })
}

/// Computes network-wide age-of-information metrics for the solution's
/// schedule: the mean and peak age averaged over every demanded stream.
///
/// # Safety
/// `scenario` and `solution` must be live handles; `mean_aoi` and `peak_aoi`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn aionet_aoi(
    scenario: *const AionetScenario,
    solution: *const AionetSolution,
    mean_aoi: *mut f64,
    peak_aoi: *mut f64,
) -> AionetStatus {
    guard(|| {
        let scenario = ffi_try!(require_ref(scenario, "scenario"));
        let solution = ffi_try!(require_ref(solution, "solution"));
        let mean_slot = ffi_try!(require_out(mean_aoi, "mean_aoi"));
        let peak_slot = ffi_try!(require_out(peak_aoi, "peak_aoi"));
        match system_metrics(&scenario.inner, &solution.inner.schedule) {
            Ok(summary) => {
                *mean_slot = summary.mean_aoi;
                *peak_slot = summary.peak_aoi;
                AionetStatus::Ok
            }
            Err(e) => set_error(model_status(&e), e),
        }
    })
}

/// Serializes the full age report (per-stream trajectories, per-type and
/// overall aggregates) to a JSON string. Free the result with
/// [`aionet_string_free`].
///
/// # Safety
/// `scenario` and `solution` must be live handles; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn aionet_aoi_to_json(
    scenario: *const AionetScenario,
    solution: *const AionetSolution,
    out: *mut *mut c_char,
) -> AionetStatus {
    guard(|| {
        let slot = ffi_try!(require_out(out, "out"));
        *slot = ptr::null_mut();
        let scenario = ffi_try!(require_ref(scenario, "scenario"));
        let solution = ffi_try!(require_ref(solution, "solution"));
        match system_metrics(&scenario.inner, &solution.inner.schedule) {
            Ok(summary) => emit_json(serde_json::to_string(&summary), slot),
            Err(e) => set_error(model_status(&e), e),
        }
    })
}

/// Releases a string returned by the `_to_json` functions. Null is a no-op.
///
/// # Safety
/// `text` must be null or a string not freed before.
#[no_mangle]
pub unsafe extern "C" fn aionet_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Writes the scenario's integer program in LP format under the given
/// objective weights.
///
/// # Safety
/// `scenario` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn aionet_export_lp(
    scenario: *const AionetScenario,
    alpha_energy: f64,
    alpha_switching: f64,
    alpha_delay: f64,
    path: *const c_char,
) -> AionetStatus {
    guard(|| {
        let scenario = ffi_try!(require_ref(scenario, "scenario"));
        let path = ffi_try!(require_str(path, "path"));
        let cfg = ffi_try!(weights_config(
            &scenario.inner,
            [alpha_energy, alpha_switching, alpha_delay],
        ));
        let model = match build_milp(&scenario.inner, &cfg) {
            Ok(model) => model,
            Err(e) => return set_error(model_status(&e), e),
        };
        match aionet::write_lp_file(&model, Path::new(path)) {
            Ok(()) => AionetStatus::Ok,
            Err(e) => {
                let status = match &e {
                    LpError::Io(_) => AionetStatus::Io,
                    LpError::Syntax { .. } => AionetStatus::InvalidInput,
                };
                set_error(status, e)
            }
        }
    })
}

fn emit_json(body: Result<String, serde_json::Error>, slot: &mut *mut c_char) -> AionetStatus {
    let body = match body {
        Ok(body) => body,
        Err(e) => return set_error(AionetStatus::InvalidInput, format_args!("serialize: {e}")),
    };
    match CString::new(body) {
        Ok(text) => {
            *slot = text.into_raw();
            AionetStatus::Ok
        }
        Err(_) => set_error(
            AionetStatus::InvalidInput,
            "serialized text contained an interior NUL",
        ),
    }
}
