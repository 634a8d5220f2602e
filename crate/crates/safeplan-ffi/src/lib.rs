//! C ABI for the safeplan library.
//!
//! Conventions:
//! - Structured data crosses the boundary as the same JSON documents the
//!   CLI reads and writes; models live behind opaque handles.
//! - Every function returns an [`SpStatus`]; outputs come back through out
//!   pointers and are only written on `SpOk` (or the documented verdict
//!   statuses). Returned strings are freed with [`sp_string_free`], handles
//!   with their `_free` function.
//! - On any non-`SpOk` status, [`sp_last_error`] returns a human-readable
//!   message for the calling thread.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use safeplan::audit::{audit_bounds, audit_safety, AuditMode};
use safeplan::bench::{gen_logistics, LogisticsConfig};
use safeplan::compiler::compile;
use safeplan::learner::{learn_with_id, learned_to_model, LearnedModel};
use safeplan::pac::{
    epsilon_for_gamma, gamma_for_epsilon, sample_complexity, sample_complexity_real,
    solvability_table, PacParams,
};
use safeplan::planner::{solve, Limits, Outcome};
use safeplan::sas::ActionModel;
use safeplan::{io, sas};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    SpOk = 0,
    /// A pointer was null or a parameter was out of range.
    SpInvalidArgument = 1,
    /// Input text was not valid UTF-8/JSON or violated its schema.
    SpParseError = 2,
    /// Inputs parsed but are inconsistent (mismatched variables, bad plan).
    SpValidationError = 3,
    /// The planner proved the problem unsolvable (a verdict, not an error).
    SpNoPlan = 4,
    /// The planner hit its resource limits before an answer.
    SpResourceLimit = 5,
    /// An internal panic was caught at the boundary.
    SpPanic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let cstring =
        CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

/// Returns the last error message recorded on this thread as a fresh
/// string (caller frees), or null if none.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// An action model behind an opaque handle (ground truth or compiled).
pub struct SpModel(ActionModel);

/// A learned model (precondition upper bounds, effect lower bounds).
pub struct SpLearned(LearnedModel);

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SpStatus::SpInvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        SpStatus::SpParseError
    })
}

fn write_string(out: *mut *mut c_char, text: String) -> SpStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SpStatus::SpInvalidArgument;
    }
    match CString::new(text) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            SpStatus::SpOk
        }
        Err(_) => {
            set_error("output contained an interior NUL byte");
            SpStatus::SpPanic
        }
    }
}

fn guard(f: impl FnOnce() -> SpStatus) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SpStatus::SpPanic
        }
    }
}

/// Parses a domain JSON document into a model handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_parse(
    json: *const c_char,
    out: *mut *mut SpModel,
) -> SpStatus {
    guard(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        match io::parse_domain(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(SpModel(model)));
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpParseError
            }
        }
    })
}

/// Builds a ground-truth logistics model.
#[no_mangle]
pub unsafe extern "C" fn sp_model_logistics(
    locations: usize,
    trucks: usize,
    packages: usize,
    out: *mut *mut SpModel,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        match gen_logistics(&LogisticsConfig::new(locations, trucks, packages)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(SpModel(model)));
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpInvalidArgument
            }
        }
    })
}

/// Serializes a model handle back to canonical domain JSON.
#[no_mangle]
pub unsafe extern "C" fn sp_model_to_json(
    model: *const SpModel,
    out: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            set_error("null model handle");
            return SpStatus::SpInvalidArgument;
        };
        write_string(out, io::serialize_domain(&model.0))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_model_free(model: *mut SpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Learns a conservative model from a JSON-Lines trajectory corpus against
/// the variables of `vars_model`. `id` may be null.
#[no_mangle]
pub unsafe extern "C" fn sp_learn(
    vars_model: *const SpModel,
    trajectories_jsonl: *const c_char,
    id: *const c_char,
    out: *mut *mut SpLearned,
) -> SpStatus {
    guard(|| {
        let Some(vars_model) = vars_model.as_ref() else {
            set_error("null model handle");
            return SpStatus::SpInvalidArgument;
        };
        let text = match read_str(trajectories_jsonl) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let id = if id.is_null() {
            "learned".to_string()
        } else {
            match read_str(id) {
                Ok(t) => t.to_string(),
                Err(status) => return status,
            }
        };
        if out.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        let trajs = match io::parse_trajectories(text, vars_model.0.variables(), None) {
            Ok(t) => t,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpParseError;
            }
        };
        match learn_with_id(id, &trajs, vars_model.0.variables()) {
            Ok(lm) => {
                *out = Box::into_raw(Box::new(SpLearned(lm)));
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpValidationError
            }
        }
    })
}

/// Parses a learned-model JSON document.
#[no_mangle]
pub unsafe extern "C" fn sp_learned_parse(
    json: *const c_char,
    out: *mut *mut SpLearned,
) -> SpStatus {
    guard(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        match io::parse_learned(text) {
            Ok(lm) => {
                *out = Box::into_raw(Box::new(SpLearned(lm)));
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpParseError
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_learned_to_json(
    learned: *const SpLearned,
    out: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let Some(learned) = learned.as_ref() else {
            set_error("null learned-model handle");
            return SpStatus::SpInvalidArgument;
        };
        write_string(out, io::serialize_learned(&learned.0))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_learned_free(learned: *mut SpLearned) {
    if !learned.is_null() {
        drop(Box::from_raw(learned));
    }
}

/// Compiles a learned model with the init/goal of `problem_json` (its
/// action set is ignored) and returns the compiled problem as JSON.
#[no_mangle]
pub unsafe extern "C" fn sp_compile(
    learned: *const SpLearned,
    problem_json: *const c_char,
    out: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let Some(learned) = learned.as_ref() else {
            set_error("null learned-model handle");
            return SpStatus::SpInvalidArgument;
        };
        let text = match read_str(problem_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let parsed = match io::parse_problem(text) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpParseError;
            }
        };
        if parsed.problem.model.variables() != learned.0.variables.as_slice() {
            set_error("problem and learned model declare different variables");
            return SpStatus::SpValidationError;
        }
        match compile(&learned.0, parsed.problem.init, parsed.problem.goal) {
            Ok(compiled) => write_string(
                out,
                io::serialize_problem(&compiled.problem, Some(&compiled.provenance)),
            ),
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpValidationError
            }
        }
    })
}

/// Solves a problem JSON document with the optimal planner. On `SpOk`
/// writes a plan JSON document; `SpNoPlan` and `SpResourceLimit` are
/// verdict statuses with no output. `max_generated = 0` and
/// `max_seconds <= 0` select the defaults (10^7 states, 60 s).
#[no_mangle]
pub unsafe extern "C" fn sp_plan(
    problem_json: *const c_char,
    max_generated: u64,
    max_seconds: f64,
    out_plan_json: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let text = match read_str(problem_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let parsed = match io::parse_problem(text) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpParseError;
            }
        };
        let mut limits = Limits::default();
        if max_generated > 0 {
            limits.max_generated = max_generated;
        }
        if max_seconds > 0.0 {
            limits.max_time = std::time::Duration::from_secs_f64(max_seconds);
        }
        match solve(&parsed.problem, &limits) {
            Ok(result) => match result.outcome {
                Outcome::Plan(plan) => write_string(out_plan_json, io::serialize_plan(&plan)),
                Outcome::NoPlan => {
                    set_error("no plan found");
                    SpStatus::SpNoPlan
                }
                Outcome::ResourceLimit => {
                    set_error("resource limit reached");
                    SpStatus::SpResourceLimit
                }
            },
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpValidationError
            }
        }
    })
}

/// Validates a plan JSON document against a problem JSON document.
/// `out_success` reports the verdict; the status is `SpOk` unless the
/// inputs are malformed (an invalid plan is a verdict, not an error).
#[no_mangle]
pub unsafe extern "C" fn sp_validate(
    problem_json: *const c_char,
    plan_json: *const c_char,
    out_success: *mut bool,
) -> SpStatus {
    guard(|| {
        let problem_text = match read_str(problem_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let plan_text = match read_str(plan_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if out_success.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        let parsed = match io::parse_problem(problem_text) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpParseError;
            }
        };
        let plan = match io::parse_plan(plan_text) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpParseError;
            }
        };
        match sas::validate_plan(&plan, &parsed.problem) {
            Ok(report) => {
                *out_success = report.success;
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpValidationError
            }
        }
    })
}

fn json_of<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serialization cannot fail")
}

/// Audits a learned model against a ground-truth model and returns the
/// combined safety/bounds report as JSON. `samples = 0` selects exhaustive
/// mode with the default 50,000-state cap. `trajectories_jsonl` may be
/// null to skip the bounds audit. The status is `SpOk` for both safe and
/// unsafe outcomes; the report carries the verdict.
#[no_mangle]
pub unsafe extern "C" fn sp_audit(
    learned: *const SpLearned,
    truth: *const SpModel,
    trajectories_jsonl: *const c_char,
    samples: u64,
    seed: u64,
    out_report_json: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let Some(learned) = learned.as_ref() else {
            set_error("null learned-model handle");
            return SpStatus::SpInvalidArgument;
        };
        let Some(truth) = truth.as_ref() else {
            set_error("null truth-model handle");
            return SpStatus::SpInvalidArgument;
        };
        let learned_model = match learned_to_model(&learned.0) {
            Ok(m) => m,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpValidationError;
            }
        };
        let mode = if samples == 0 {
            AuditMode::exhaustive()
        } else {
            AuditMode::Sampled { samples, seed }
        };
        let safety = match audit_safety(&learned_model, &truth.0, mode) {
            Ok(report) => report,
            Err(e) => {
                set_error(e.to_string());
                return SpStatus::SpValidationError;
            }
        };
        let bounds = if trajectories_jsonl.is_null() {
            None
        } else {
            let text = match read_str(trajectories_jsonl) {
                Ok(t) => t,
                Err(status) => return status,
            };
            let trajs = match io::parse_trajectories(text, truth.0.variables(), None) {
                Ok(t) => t,
                Err(e) => {
                    set_error(e.to_string());
                    return SpStatus::SpParseError;
                }
            };
            match audit_bounds(&learned.0, &truth.0, &trajs) {
                Ok(report) => Some(report),
                Err(e) => {
                    set_error(e.to_string());
                    return SpStatus::SpValidationError;
                }
            }
        };
        let clean = safety.safe && bounds.as_ref().is_none_or(|b| b.clean());
        let bounds_json = bounds.as_ref().map(json_of).unwrap_or_else(|| "null".to_string());
        let report = format!(
            "{{\"safety\":{},\"bounds\":{},\"clean\":{}}}\n",
            json_of(&safety),
            bounds_json,
            clean
        );
        write_string(out_report_json, report)
    })
}

/// Exports a problem JSON document as planner-input text (`.sas`), for
/// handing compiled problems to off-the-shelf planners.
#[no_mangle]
pub unsafe extern "C" fn sp_write_sas(
    problem_json: *const c_char,
    out_sas: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        let text = match read_str(problem_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match io::parse_problem(text) {
            Ok(parsed) => write_string(out_sas, io::write_sas(&parsed.problem)),
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpParseError
            }
        }
    })
}

/// The trajectory-count bound. Writes the exact ceiling (saturating at
/// u64::MAX) and, when non-null, the pre-ceiling real value.
#[no_mangle]
pub unsafe extern "C" fn sp_sample_complexity(
    d: u64,
    num_actions: u64,
    num_vars: u64,
    epsilon: f64,
    delta: f64,
    out_m: *mut u64,
    out_real: *mut f64,
) -> SpStatus {
    guard(|| {
        if out_m.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        let params = PacParams { d, num_actions, num_vars, epsilon, delta };
        match sample_complexity(&params) {
            Ok(m) => {
                *out_m = u64::try_from(m).unwrap_or(u64::MAX);
                if !out_real.is_null() {
                    *out_real = sample_complexity_real(&params).unwrap_or(f64::INFINITY);
                }
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpInvalidArgument
            }
        }
    })
}

/// Largest epsilon keeping P(solvable | no plan) at or below gamma.
#[no_mangle]
pub unsafe extern "C" fn sp_epsilon_for_gamma(
    gamma: f64,
    mu: f64,
    out_epsilon: *mut f64,
) -> SpStatus {
    guard(|| {
        if out_epsilon.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        match epsilon_for_gamma(gamma, mu) {
            Ok(eps) => {
                *out_epsilon = eps;
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpInvalidArgument
            }
        }
    })
}

/// P(solvable | no plan) for a given epsilon and mu.
#[no_mangle]
pub unsafe extern "C" fn sp_gamma_for_epsilon(
    epsilon: f64,
    mu: f64,
    out_gamma: *mut f64,
) -> SpStatus {
    guard(|| {
        if out_gamma.is_null() {
            set_error("null output pointer");
            return SpStatus::SpInvalidArgument;
        }
        match gamma_for_epsilon(epsilon, mu) {
            Ok(g) => {
                *out_gamma = g;
                SpStatus::SpOk
            }
            Err(e) => {
                set_error(e.to_string());
                SpStatus::SpInvalidArgument
            }
        }
    })
}

/// The solvability probability table as JSON.
#[no_mangle]
pub unsafe extern "C" fn sp_solvability_table(
    mu: f64,
    epsilon: f64,
    out_json: *mut *mut c_char,
) -> SpStatus {
    guard(|| match solvability_table(mu, epsilon) {
        Ok(table) => write_string(out_json, format!("{}\n", json_of(&table))),
        Err(e) => {
            set_error(e.to_string());
            SpStatus::SpInvalidArgument
        }
    })
}
