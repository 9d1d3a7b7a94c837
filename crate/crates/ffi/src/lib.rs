//! C ABI for asmprop.
//!
//! Objects are opaque handles created by `asmprop_spec_parse` and `asmprop_spec_check` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`AsmpropStatus`]; on failure the message is available from
//! [`asmprop_last_error`] on the same thread. Strings returned through out
//! parameters are owned by the caller and released with
//! [`asmprop_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use asmprop::agent::{Agent, AgentConfig};
use asmprop::bridge::{enrich_spec, trace_to_avalla, witness_to_avalla};
use asmprop::checker::{verify_spec, Limits, Outcome, PropertyReport};
use asmprop::interp::{run_scenario, Machine};
use asmprop::lang::{parse_asm, parse_avalla, parse_property, print_asm, print_avalla, print_formula, AsmSpecification, FormulaStyle, Logic, Origin, PropertyDecl};
use asmprop::smv::emit_smv;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsmpropStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Syntax or type errors in a specification, property or scenario.
    Invalid = 4,
    /// A state, time or cancellation limit was hit.
    Limit = 5,
    /// The completion backend failed (network, HTTP, fixtures).
    Backend = 6,
    /// The agent gave up without a valid answer.
    Agent = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsmpropLogic {
    Ctl = 0,
    Ltl = 1,
}

impl From<AsmpropLogic> for Logic {
    fn from(l: AsmpropLogic) -> Logic {
        match l {
            AsmpropLogic::Ctl => Logic::Ctl,
            AsmpropLogic::Ltl => Logic::Ltl,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsmpropVerdict {
    Holds = 0,
    Fails = 1,
    /// Bounded LTL search found no violation.
    NoViolationUpTo = 2,
    Error = 3,
}

/// A parsed and type-checked specification.
pub struct AsmpropSpec {
    spec: AsmSpecification,
}

/// Verdicts for every property of a specification.
pub struct AsmpropReport {
    spec: AsmSpecification,
    reports: Vec<PropertyReport>,
}

/// Model checking limits. Zero fields keep the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AsmpropLimits {
    pub max_states: u64,
    pub max_time_ms: u64,
    pub ltl_bound: u32,
}

impl From<&AsmpropLimits> for Limits {
    fn from(l: &AsmpropLimits) -> Limits {
        let mut out = Limits::default();
        if l.max_states > 0 {
            out.max_states = l.max_states as usize;
        }
        if l.max_time_ms > 0 {
            out.max_time = Duration::from_millis(l.max_time_ms);
        }
        if l.ltl_bound > 0 {
            out.ltl_bound = l.ltl_bound as usize;
        }
        out
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AsmpropStatus, String);

impl Failure {
    fn new(status: AsmpropStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> AsmpropStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AsmpropStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            AsmpropStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::new(AsmpropStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(AsmpropStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Failure::new(AsmpropStatus::NullArgument, "null handle"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::new(AsmpropStatus::NullArgument, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).map_err(|_| Failure::new(AsmpropStatus::InvalidArgument, "string contains a NUL byte"))?;
    write_out(out, c.into_raw())
}

fn invalid(d: impl ToString) -> Failure {
    Failure::new(AsmpropStatus::Invalid, d)
}

fn report_at(r: &AsmpropReport, index: usize) -> FfiResult<&PropertyReport> {
    r.reports.get(index).ok_or_else(|| {
        Failure::new(AsmpropStatus::InvalidArgument, format!("property index {index} out of range ({} properties)", r.reports.len()))
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn asmprop_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn asmprop_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn asmprop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and type-checks an AsmetaL specification.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_parse(source: *const c_char, out: *mut *mut AsmpropSpec) -> AsmpropStatus {
    guard(|| {
        let source = text(source)?;
        let spec = parse_asm(source).map_err(invalid)?;
        Machine::new(&spec).map_err(|e| invalid(e.to_diagnostics()))?;
        write_out(out, Box::into_raw(Box::new(AsmpropSpec { spec })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_free(spec: *mut AsmpropSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Canonical AsmetaL text of the specification.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_print(spec: *const AsmpropSpec, out: *mut *mut c_char) -> AsmpropStatus {
    guard(|| write_string(out, print_asm(&handle(spec)?.spec)))
}

#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_property_count(spec: *const AsmpropSpec, out: *mut usize) -> AsmpropStatus {
    guard(|| write_out(out, handle(spec)?.spec.properties.len()))
}

/// Type-checks a property and appends it to the specification. A
/// structurally identical property is not added twice.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_add_property(
    spec: *mut AsmpropSpec,
    formula: *const c_char,
    logic: AsmpropLogic,
) -> AsmpropStatus {
    guard(|| {
        let formula = text(formula)?;
        let handle = spec.as_mut().ok_or_else(|| Failure::new(AsmpropStatus::NullArgument, "null handle"))?;
        let logic = Logic::from(logic);
        let parsed = parse_property(formula, logic, true).map_err(invalid)?;
        let decl = PropertyDecl::new(logic, parsed, formula, Origin::HandWritten);
        handle.spec = enrich_spec(&handle.spec, &[decl]).map_err(invalid)?;
        Ok(())
    })
}

/// Translates the specification to a NuSMV model.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_emit_smv(spec: *const AsmpropSpec, out: *mut *mut c_char) -> AsmpropStatus {
    guard(|| {
        let model = emit_smv(&handle(spec)?.spec).map_err(invalid)?;
        write_string(out, model.text)
    })
}

/// Runs an Avalla scenario. `passed` receives 1 when every check holds.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_run_scenario(
    spec: *const AsmpropSpec,
    scenario: *const c_char,
    passed: *mut i32,
) -> AsmpropStatus {
    guard(|| {
        let spec = &handle(spec)?.spec;
        let scenario = parse_avalla(text(scenario)?).map_err(invalid)?;
        let machine = Machine::new(spec).map_err(|e| invalid(e.to_diagnostics()))?;
        let result = run_scenario(&machine, &scenario).map_err(|e| invalid(e.to_diagnostics()))?;
        write_out(passed, i32::from(result.passed))
    })
}

/// Model-checks every embedded property. `limits` may be null.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_check(
    spec: *const AsmpropSpec,
    limits: *const AsmpropLimits,
    out: *mut *mut AsmpropReport,
) -> AsmpropStatus {
    guard(|| {
        let spec = handle(spec)?.spec.clone();
        let limits = limits.as_ref().map(Limits::from).unwrap_or_default();
        let reports = verify_spec(&spec, &limits);
        write_out(out, Box::into_raw(Box::new(AsmpropReport { spec, reports })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn asmprop_report_free(report: *mut AsmpropReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn asmprop_report_count(report: *const AsmpropReport, out: *mut usize) -> AsmpropStatus {
    guard(|| write_out(out, handle(report)?.reports.len()))
}

/// Verdict of the property at a 0-based index. When the check itself
/// failed the verdict is `Error`, the status is still `Ok`, and the reason
/// is available from [`asmprop_report_error`].
#[no_mangle]
pub unsafe extern "C" fn asmprop_report_verdict(
    report: *const AsmpropReport,
    index: usize,
    out: *mut AsmpropVerdict,
) -> AsmpropStatus {
    guard(|| {
        let verdict = match &report_at(handle(report)?, index)?.result {
            Ok(v) => match v.outcome {
                Outcome::Holds => AsmpropVerdict::Holds,
                Outcome::Fails => AsmpropVerdict::Fails,
                Outcome::NoViolationUpTo(_) => AsmpropVerdict::NoViolationUpTo,
            },
            Err(_) => AsmpropVerdict::Error,
        };
        write_out(out, verdict)
    })
}

/// Reason a property could not be checked. Fails with `InvalidArgument`
/// when the property was checked.
#[no_mangle]
pub unsafe extern "C" fn asmprop_report_error(
    report: *const AsmpropReport,
    index: usize,
    out: *mut *mut c_char,
) -> AsmpropStatus {
    guard(|| match &report_at(handle(report)?, index)?.result {
        Err(e) => write_string(out, format!("{}: {e}", e.code())),
        Ok(_) => Err(Failure::new(AsmpropStatus::InvalidArgument, "property was checked")),
    })
}

/// Exports the counterexample (or, with `witness` nonzero, the witness)
/// of a property as Avalla text.
#[no_mangle]
pub unsafe extern "C" fn asmprop_report_export(
    report: *const AsmpropReport,
    index: usize,
    witness: i32,
    out: *mut *mut c_char,
) -> AsmpropStatus {
    guard(|| {
        let r = handle(report)?;
        let verdict = match &report_at(r, index)?.result {
            Ok(v) => v,
            Err(e) => return Err(if e.is_limit() { Failure::new(AsmpropStatus::Limit, e) } else { invalid(e) }),
        };
        let name = format!("{}_{}_{}", r.spec.name, if witness != 0 { "witness" } else { "cex" }, index + 1);
        let scenario = if witness != 0 {
            let trace = verdict
                .witness()
                .ok_or_else(|| Failure::new(AsmpropStatus::InvalidArgument, "property has no witness"))?;
            witness_to_avalla(trace, &r.spec, &name)
        } else {
            let trace = verdict
                .counterexample()
                .ok_or_else(|| Failure::new(AsmpropStatus::InvalidArgument, "property has no counterexample"))?;
            trace_to_avalla(trace, &r.spec, &name)
        }
        .map_err(invalid)?;
        write_string(out, print_avalla(&scenario))
    })
}

/// Formalizes a requirement with the agent and adds the resulting property
/// to the specification. With `fixtures` non-null responses are replayed
/// from that directory; otherwise the live endpoint configured through the
/// environment is used. The formula text is written to `formula` when it
/// is non-null.
#[no_mangle]
pub unsafe extern "C" fn asmprop_spec_formalize(
    spec: *mut AsmpropSpec,
    requirement: *const c_char,
    logic: AsmpropLogic,
    fixtures: *const c_char,
    formula: *mut *mut c_char,
) -> AsmpropStatus {
    guard(|| {
        let requirement = text(requirement)?;
        let config = if fixtures.is_null() {
            AgentConfig::layered(None, |k| std::env::var(k).ok())
        } else {
            AgentConfig::replay(text(fixtures)?)
        };
        let handle = spec.as_mut().ok_or_else(|| Failure::new(AsmpropStatus::NullArgument, "null handle"))?;
        let agent_failure = |e: asmprop::agent::AgentError| {
            let status = if e.is_backend() { AsmpropStatus::Backend } else { AsmpropStatus::Agent };
            Failure::new(status, format!("{}: {e}", e.code()))
        };
        let mut agent = Agent::new(config).map_err(agent_failure)?;
        let session = agent.formalize(&handle.spec, requirement, logic.into());
        let done = session.result.map_err(agent_failure)?;
        handle.spec = done.enriched;
        if !formula.is_null() {
            write_string(formula, print_formula(&done.property.formula, FormulaStyle::Uppercase))?;
        }
        Ok(())
    })
}
