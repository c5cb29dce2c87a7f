//! C ABI over the document-level operations of the toolkit: parse and
//! validate MDP JSON into an opaque handle, classify, evaluate policies,
//! solve for optimal policy sets, estimate critical discount factors, and
//! convert between the absorbing ("zrat") and resetting ("rst") encodings.
//!
//! Conventions: every fallible call returns an [`MdpcritStatus`]; on failure
//! a thread-local message is readable via [`mdpcrit_last_error_message`].
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`mdpcrit_string_free`]; models with
//! [`mdpcrit_model_free`].
//!
//! Safety: pointer arguments must be valid for the stated lengths and
//! lifetimes; handles must come from this library and not be used after
//! free. These shared preconditions are not repeated per function.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use mdpcrit::error::Error;
use mdpcrit::learn::exact_gain_metric;
use mdpcrit::mdp::{parse_mdp, serialize_mdp, Distinguished, Mdp, PolicyTable};
use mdpcrit::solve;
use mdpcrit::transform::{
    to_absorbing_model, to_reset_model, to_reset_model_unchecked, AbsorbingModel, ResetModel,
};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MdpcritStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    DomainError = 5,
    SolverError = 6,
}

/// Optimality criterion selector for `mdpcrit_solve_json`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MdpcritCriterion {
    Discounted = 0,
    Gain = 1,
    NDiscount = 2,
    Total = 3,
}

/// Opaque MDP handle: the validated model plus its optional distinguished
/// terminal/reset marker.
pub struct MdpcritModel {
    mdp: Mdp,
    distinguished: Option<Distinguished>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let safe = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = safe);
}

fn status_of(err: &Error) -> MdpcritStatus {
    match err {
        Error::Json(_) => MdpcritStatus::ParseError,
        Error::Domain(_) => MdpcritStatus::DomainError,
        Error::NoConvergence { .. } | Error::IllConditioned { .. } | Error::Singular => {
            MdpcritStatus::SolverError
        }
        _ => MdpcritStatus::ValidationError,
    }
}

fn fail(err: Error) -> MdpcritStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, MdpcritStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(MdpcritStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        MdpcritStatus::InvalidUtf8
    })
}

fn string_out(out: *mut *mut c_char, text: String) -> MdpcritStatus {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("result contained an interior NUL byte");
            return MdpcritStatus::ValidationError;
        }
    };
    unsafe { *out = c.into_raw() };
    MdpcritStatus::Ok
}

/// Version string of the library; static storage, do not free.
#[no_mangle]
pub extern "C" fn mdpcrit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread; the buffer stays owned
/// by the library and is overwritten by the next failure.
#[no_mangle]
pub extern "C" fn mdpcrit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned through an out-parameter.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Parse and validate an MDP JSON document into a model handle.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_model_parse_json(
    json: *const c_char,
    out: *mut *mut MdpcritModel,
) -> MdpcritStatus {
    if out.is_null() {
        set_error("null output pointer");
        return MdpcritStatus::NullPointer;
    }
    let text = match cstr_arg(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_mdp(text) {
        Ok(parsed) => {
            let handle = Box::new(MdpcritModel {
                mdp: parsed.mdp,
                distinguished: parsed.distinguished,
            });
            *out = Box::into_raw(handle);
            MdpcritStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Release a model handle.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_model_free(model: *mut MdpcritModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mdpcrit_model_num_states(model: *const MdpcritModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).mdp.num_states()
}

#[no_mangle]
pub unsafe extern "C" fn mdpcrit_model_num_actions(model: *const MdpcritModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).mdp.num_actions()
}

/// Serialize the model back to canonical JSON.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_model_to_json(
    model: *const MdpcritModel,
    out: *mut *mut c_char,
) -> MdpcritStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let handle = &*model;
    string_out(
        out,
        serialize_mdp(&handle.mdp, handle.distinguished.as_ref()),
    )
}

/// Chain-pattern and accessibility classification as a JSON object.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_classify_json(
    model: *const MdpcritModel,
    max_enum: u64,
    out: *mut *mut c_char,
) -> MdpcritStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let report = mdpcrit::chain::classify_mdp(&(*model).mdp, max_enum as u128);
    match serde_json::to_string_pretty(&report) {
        Ok(text) => string_out(out, text),
        Err(err) => fail(err.into()),
    }
}

/// Discounted values of the deterministic policy `actions` (length
/// `num_states`), written into `values` (length `num_states`).
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_eval_discounted(
    model: *const MdpcritModel,
    actions: *const usize,
    actions_len: usize,
    gamma: f64,
    values: *mut f64,
) -> MdpcritStatus {
    if model.is_null() || actions.is_null() || values.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let mdp = &(*model).mdp;
    if actions_len != mdp.num_states() {
        set_error("actions length must equal the number of states");
        return MdpcritStatus::DomainError;
    }
    let actions = std::slice::from_raw_parts(actions, actions_len);
    let result = (|| -> Result<(), Error> {
        let policy = PolicyTable::from_actions(actions, mdp.num_actions())?;
        policy.validate_against(mdp)?;
        let chain = mdpcrit::induce_chain(mdp, &policy)?;
        let v = mdpcrit::eval::discounted_values(&chain, gamma)?;
        let out = std::slice::from_raw_parts_mut(values, actions_len);
        out.copy_from_slice(v.as_slice().expect("contiguous"));
        Ok(())
    })();
    match result {
        Ok(()) => MdpcritStatus::Ok,
        Err(err) => fail(err),
    }
}

/// isd-weighted gain of the deterministic policy `actions`.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_eval_gain(
    model: *const MdpcritModel,
    actions: *const usize,
    actions_len: usize,
    gain: *mut f64,
) -> MdpcritStatus {
    if model.is_null() || actions.is_null() || gain.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let mdp = &(*model).mdp;
    if actions_len != mdp.num_states() {
        set_error("actions length must equal the number of states");
        return MdpcritStatus::DomainError;
    }
    let actions = std::slice::from_raw_parts(actions, actions_len);
    match exact_gain_metric(mdp, actions) {
        Ok(g) => {
            *gain = g;
            MdpcritStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Solve for an optimal policy set; the result (criterion, optimal value,
/// policy set, iterations, residual) is returned as JSON. `gamma` applies to
/// the discounted criterion, `n` to the n-discount one.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_solve_json(
    model: *const MdpcritModel,
    criterion: MdpcritCriterion,
    gamma: f64,
    n: i32,
    max_enum: u64,
    out: *mut *mut c_char,
) -> MdpcritStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let mdp = &(*model).mdp;
    let result = (|| -> Result<String, Error> {
        let res = match criterion {
            MdpcritCriterion::Discounted => solve::policy_iteration_discounted(mdp, gamma)?,
            MdpcritCriterion::Gain => solve::policy_iteration_average(mdp)?,
            MdpcritCriterion::NDiscount => solve::n_discount_optimal_sets(mdp, n, max_enum as u128)?
                .pop()
                .expect("nonempty for n >= -1"),
            MdpcritCriterion::Total => solve::total_optimal_set(mdp, max_enum as u128)?,
        };
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "criterion": res.criterion,
            "optimal_value": res.optimal_value.to_vec(),
            "policy_set": res.policy_set,
            "iterations": res.iterations,
            "residual": res.residual,
        }))?)
    })();
    match result {
        Ok(text) => string_out(out, text),
        Err(err) => fail(err),
    }
}

/// Estimate the critical discount factor; `use_gain_estimator != 0` selects
/// the gain-optimality threshold instead of argmax-set stability. Returns a
/// JSON object.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_blackwell_json(
    model: *const MdpcritModel,
    tol: f64,
    grid_size: usize,
    use_gain_estimator: u8,
    out: *mut *mut c_char,
) -> MdpcritStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let mdp = &(*model).mdp;
    let result = (|| -> Result<String, Error> {
        let value = if use_gain_estimator != 0 {
            let est = solve::gain_threshold_gamma(
                mdp,
                None,
                solve::GainThresholdConfig {
                    tol,
                    grid_size,
                    ..solve::GainThresholdConfig::default()
                },
            )?;
            serde_json::json!({
                "estimator": "gain",
                "gamma_bw": est.gamma_threshold,
                "bracket": est.bracket,
                "optimal_gain": est.optimal_gain,
            })
        } else {
            let est = solve::blackwell_gamma(
                mdp,
                solve::BlackwellConfig {
                    tol,
                    grid_size,
                    ..solve::BlackwellConfig::default()
                },
            )?;
            serde_json::json!({
                "estimator": "set",
                "gamma_bw": est.gamma_bw,
                "bracket": est.bracket,
                "tolerance_warning": est.tolerance_warning,
                "blackwell_set": est.blackwell_set,
            })
        };
        Ok(serde_json::to_string_pretty(&value)?)
    })();
    match result {
        Ok(text) => string_out(out, text),
        Err(err) => fail(err),
    }
}

/// Convert between episodic encodings: `to_reset != 0` rewires the
/// absorbing ("zrat") model into the resetting ("rst") one, otherwise the
/// reverse. `force != 0` skips the inevitable-termination precondition of
/// the forward direction. The input handle must carry a matching
/// `distinguished` marker; a new handle is returned.
#[no_mangle]
pub unsafe extern "C" fn mdpcrit_convert(
    model: *const MdpcritModel,
    to_reset: u8,
    force: u8,
    out: *mut *mut MdpcritModel,
) -> MdpcritStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MdpcritStatus::NullPointer;
    }
    let handle = &*model;
    let result = (|| -> Result<MdpcritModel, Error> {
        let marker = handle.distinguished.clone().ok_or_else(|| {
            Error::Validation("model has no distinguished marker".into())
        })?;
        match (marker.kind.as_str(), to_reset != 0) {
            ("zrat", true) => {
                let absorbing =
                    AbsorbingModel::new(handle.mdp.clone(), marker.state, marker.action)?;
                let reset = if force != 0 {
                    to_reset_model_unchecked(&absorbing)?
                } else {
                    to_reset_model(&absorbing)?
                };
                Ok(MdpcritModel {
                    mdp: reset.mdp().clone(),
                    distinguished: Some(reset.distinguished()),
                })
            }
            ("rst", false) => {
                let reset = ResetModel::new(handle.mdp.clone(), marker.state, marker.action)?;
                let absorbing = to_absorbing_model(&reset)?;
                Ok(MdpcritModel {
                    mdp: absorbing.mdp().clone(),
                    distinguished: Some(absorbing.distinguished()),
                })
            }
            (kind, _) => Err(Error::Validation(format!(
                "cannot convert a '{kind}' model in that direction"
            ))),
        }
    })();
    match result {
        Ok(converted) => {
            *out = Box::into_raw(Box::new(converted));
            MdpcritStatus::Ok
        }
        Err(err) => fail(err),
    }
}
