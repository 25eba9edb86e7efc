//! C ABI over the ofdi toolkit.
//!
//! Conventions: functions return an [`OfdiStatus`] code (or NULL for
//! pointer-returning calls) and write results through out-pointers. The last
//! failure message is kept per thread and read back with
//! [`ofdi_last_error_message`]. Strings returned by `*_json` functions are
//! owned by the caller and must be released with [`ofdi_string_free`]; panels
//! are opaque handles released with [`ofdi_panel_free`]. JSON payloads use
//! the same schemas as the `ofdi` CLI configuration blocks and reports.
//!
//! Pointer contract: every entry point checks its pointer arguments for NULL
//! and returns [`OfdiStatus::NullPointer`] (or NULL) instead of dereferencing;
//! non-NULL pointers must be valid for the documented type, as usual for a C
//! API.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use ofdi::did::{self, DidSpec};
use ofdi::market::{policy_experiment, MarketConfig};
use ofdi::model::{
    cutoffs, marginal_effect_delta, ofdi_probability, saturation_threshold, FirmTechnology,
    InputCosts, ModelParams, Preferences,
};
use ofdi::numerics::ParetoDist;
use ofdi::panel::{export_csv, import_csv, simulate_panel, PanelConfig, PanelData};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfdiStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Arguments violate a documented precondition.
    InvalidArgument = 2,
    /// A solver or estimator failed on valid-looking input.
    NumericalError = 3,
    /// File input/output failed.
    IoError = 4,
    /// A JSON or CSV payload did not parse or validate.
    ParseError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let text =
        CString::new(message).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &ofdi::Error) -> OfdiStatus {
    use ofdi::Error::*;
    match err {
        Io(_) => OfdiStatus::IoError,
        Json(_) | Csv(_) | Schema { .. } => OfdiStatus::ParseError,
        NoSignChange { .. }
        | NonFinite { .. }
        | SingularMatrix(_)
        | DegenerateRegression(_)
        | DivergentIntegral(_) => OfdiStatus::NumericalError,
        _ => OfdiStatus::InvalidArgument,
    }
}

fn fail(err: ofdi::Error) -> OfdiStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ofdi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ofdi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(text) => text.as_ptr(),
        None => ptr::null(),
    })
}

/// Release a string returned by one of the `*_json` functions.
#[no_mangle]
pub extern "C" fn ofdi_string_free(text: *mut c_char) {
    if !text.is_null() {
        unsafe {
            drop(CString::from_raw(text));
        }
    }
}

/// Flat model parameterization for the closed-form calls.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OfdiModelParams {
    /// CES preference parameter, in (0, 1).
    pub rho: f64,
    /// Demand shifter, > 0.
    pub demand_shifter: f64,
    /// Pareto scale of the productivity distribution, > 0.
    pub pareto_scale: f64,
    /// Pareto shape; must exceed rho/(1-rho).
    pub pareto_shape: f64,
    /// Domestic unit input cost, >= 0.
    pub domestic_cost: f64,
    /// Foreign-subsidiary unit input cost, > 0.
    pub foreign_cost: f64,
    /// Intermediate-input intensity, >= 0.
    pub input_intensity: f64,
    /// Fixed production cost, > 0.
    pub fixed_cost: f64,
    /// Fixed investment cost of going abroad, > 0.
    pub ofdi_fixed_cost: f64,
}

fn model_params(raw: &OfdiModelParams) -> ofdi::Result<ModelParams> {
    ModelParams::new(
        Preferences::new(raw.rho, raw.demand_shifter)?,
        ParetoDist::new(raw.pareto_scale, raw.pareto_shape)?,
        InputCosts::new(raw.domestic_cost, raw.foreign_cost)?,
        FirmTechnology::new(raw.input_intensity, raw.fixed_cost, raw.ofdi_fixed_cost)?,
    )
}

macro_rules! require_non_null {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            set_error(concat!($name, " must not be NULL"));
            return OfdiStatus::NullPointer;
        }
    };
}

/// Probability that an entrant invests abroad under `params`.
#[no_mangle]
pub extern "C" fn ofdi_investment_probability(
    params: *const OfdiModelParams,
    out: *mut f64,
) -> OfdiStatus {
    require_non_null!(params, "params");
    require_non_null!(out, "out");
    match model_params(unsafe { &*params }) {
        Ok(p) => {
            unsafe { *out = ofdi_probability(&p) };
            OfdiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Entry and investment cutoffs. `out_has_investment_cutoff` is false when
/// the domestic input is weakly cheaper (the investment cutoff is absent) and
/// `out_investment` is then left untouched.
#[no_mangle]
pub extern "C" fn ofdi_cutoffs(
    params: *const OfdiModelParams,
    out_entry: *mut f64,
    out_investment: *mut f64,
    out_has_investment_cutoff: *mut bool,
) -> OfdiStatus {
    require_non_null!(params, "params");
    require_non_null!(out_entry, "out_entry");
    require_non_null!(out_investment, "out_investment");
    require_non_null!(out_has_investment_cutoff, "out_has_investment_cutoff");
    match model_params(unsafe { &*params }) {
        Ok(p) => {
            let cut = cutoffs(&p);
            unsafe {
                *out_entry = cut.entry;
                *out_has_investment_cutoff = cut.ofdi.is_some();
                if let Some(star) = cut.ofdi {
                    *out_investment = star;
                }
            }
            OfdiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Domestic cost level at which every entrant invests abroad.
#[no_mangle]
pub extern "C" fn ofdi_saturation_cost(
    params: *const OfdiModelParams,
    out: *mut f64,
) -> OfdiStatus {
    require_non_null!(params, "params");
    require_non_null!(out, "out");
    match model_params(unsafe { &*params }).and_then(|p| saturation_threshold(&p)) {
        Ok(v) => {
            unsafe { *out = v };
            OfdiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Derivative of the investment probability in the domestic cost.
#[no_mangle]
pub extern "C" fn ofdi_marginal_effect(
    params: *const OfdiModelParams,
    out: *mut f64,
) -> OfdiStatus {
    require_non_null!(params, "params");
    require_non_null!(out, "out");
    match model_params(unsafe { &*params }) {
        Ok(p) => {
            unsafe { *out = marginal_effect_delta(&p) };
            OfdiStatus::Ok
        }
        Err(e) => fail(e),
    }
}

fn read_c_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().ok()
}

fn json_out<T: serde::Serialize>(value: &T) -> *mut c_char {
    match serde_json::to_string(value) {
        Ok(text) => match CString::new(text) {
            Ok(c) => c.into_raw(),
            Err(_) => {
                set_error("result contained an interior NUL byte");
                ptr::null_mut()
            }
        },
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Run the import-ban experiment. `market_json` is a market configuration
/// (same schema as the CLI `market` block); the result is a policy-outcome
/// JSON document. Returns NULL on failure.
#[no_mangle]
pub extern "C" fn ofdi_policy_experiment_json(market_json: *const c_char) -> *mut c_char {
    let Some(text) = read_c_str(market_json) else {
        set_error("market_json must be valid UTF-8 and not NULL");
        return ptr::null_mut();
    };
    let market: MarketConfig = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => {
            set_error(e.to_string());
            return ptr::null_mut();
        }
    };
    match policy_experiment(&market) {
        Ok(outcome) => json_out(&outcome),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Opaque firm-year panel handle.
pub struct OfdiPanel {
    inner: PanelData,
}

/// Simulate a panel from a configuration JSON document (the CLI `panel`
/// block schema). Returns NULL on failure; free with [`ofdi_panel_free`].
#[no_mangle]
pub extern "C" fn ofdi_panel_simulate(config_json: *const c_char) -> *mut OfdiPanel {
    let Some(text) = read_c_str(config_json) else {
        set_error("config_json must be valid UTF-8 and not NULL");
        return ptr::null_mut();
    };
    let config: PanelConfig = match serde_json::from_str(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return ptr::null_mut();
        }
    };
    match simulate_panel(&config) {
        Ok(panel) => Box::into_raw(Box::new(OfdiPanel { inner: panel })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load and validate a panel CSV. Returns NULL on failure.
#[no_mangle]
pub extern "C" fn ofdi_panel_from_csv(path: *const c_char) -> *mut OfdiPanel {
    let Some(path) = read_c_str(path) else {
        set_error("path must be valid UTF-8 and not NULL");
        return ptr::null_mut();
    };
    match import_csv(PathBuf::from(path)) {
        Ok(panel) => Box::into_raw(Box::new(OfdiPanel { inner: panel })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Write a panel to a CSV file in the canonical schema.
#[no_mangle]
pub extern "C" fn ofdi_panel_to_csv(panel: *const OfdiPanel, path: *const c_char) -> OfdiStatus {
    require_non_null!(panel, "panel");
    let Some(path) = read_c_str(path) else {
        set_error("path must be valid UTF-8 and not NULL");
        return OfdiStatus::NullPointer;
    };
    match export_csv(&unsafe { &*panel }.inner, PathBuf::from(path)) {
        Ok(()) => OfdiStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Number of firm-year rows, or 0 for a NULL handle.
#[no_mangle]
pub extern "C" fn ofdi_panel_row_count(panel: *const OfdiPanel) -> usize {
    if panel.is_null() {
        return 0;
    }
    unsafe { &*panel }.inner.rows.len()
}

/// Release a panel handle.
#[no_mangle]
pub extern "C" fn ofdi_panel_free(panel: *mut OfdiPanel) {
    if !panel.is_null() {
        unsafe {
            drop(Box::from_raw(panel));
        }
    }
}

fn parse_spec(spec_json: *const c_char) -> Option<DidSpec> {
    let text = read_c_str(spec_json)?;
    match serde_json::from_str(text) {
        Ok(s) => Some(s),
        Err(e) => {
            set_error(e.to_string());
            None
        }
    }
}

/// Firm-level treatment-effect estimate; `spec_json` follows the CLI `did`
/// block schema. Returns a result JSON document or NULL on failure.
#[no_mangle]
pub extern "C" fn ofdi_panel_estimate_json(
    panel: *const OfdiPanel,
    spec_json: *const c_char,
) -> *mut c_char {
    if panel.is_null() {
        set_error("panel must not be NULL");
        return ptr::null_mut();
    }
    let Some(spec) = parse_spec(spec_json) else {
        return ptr::null_mut();
    };
    match did::estimate_did(&unsafe { &*panel }.inner, &spec) {
        Ok(result) => json_out(&result),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Aggregate-level (group relative frequency) estimate.
#[no_mangle]
pub extern "C" fn ofdi_panel_estimate_aggregate_json(
    panel: *const OfdiPanel,
    spec_json: *const c_char,
) -> *mut c_char {
    if panel.is_null() {
        set_error("panel must not be NULL");
        return ptr::null_mut();
    }
    let Some(spec) = parse_spec(spec_json) else {
        return ptr::null_mut();
    };
    match did::estimate_aggregate(&unsafe { &*panel }.inner, &spec) {
        Ok(result) => json_out(&result),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Event-study coefficients and the joint pre-policy test. `base_year` below
/// the panel range (for example -1) selects the first sample year.
#[no_mangle]
pub extern "C" fn ofdi_panel_event_study_json(
    panel: *const OfdiPanel,
    spec_json: *const c_char,
    base_year: i32,
) -> *mut c_char {
    if panel.is_null() {
        set_error("panel must not be NULL");
        return ptr::null_mut();
    }
    let Some(spec) = parse_spec(spec_json) else {
        return ptr::null_mut();
    };
    let panel = &unsafe { &*panel }.inner;
    let base = panel.year_range().map(|(lo, _)| lo);
    let requested = if base.is_some_and(|lo| base_year >= lo) {
        Some(base_year)
    } else {
        None
    };
    match did::event_study(panel, &spec, requested) {
        Ok(result) => json_out(&result),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}
