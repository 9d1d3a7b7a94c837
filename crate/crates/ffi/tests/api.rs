use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use asmprop_ffi::*;

const CLOCK: &str = include_str!("../../core/tests/corpus/Clock.asm");
const SCENARIO: &str = include_str!("../../core/tests/corpus/ClockScenario.avalla");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = asmprop_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    asmprop_string_free(p);
    s
}

unsafe fn parse(text: &str) -> *mut AsmpropSpec {
    let mut spec = ptr::null_mut();
    assert_eq!(asmprop_spec_parse(c(text).as_ptr(), &mut spec), AsmpropStatus::Ok);
    assert!(!spec.is_null());
    spec
}

#[test]
fn parse_print_roundtrip() {
    unsafe {
        let spec = parse(CLOCK);
        let mut out = ptr::null_mut();
        assert_eq!(asmprop_spec_print(spec, &mut out), AsmpropStatus::Ok);
        let printed = take(out);
        asmprop_spec_free(spec);
        let again = parse(&printed);
        let mut out = ptr::null_mut();
        assert_eq!(asmprop_spec_print(again, &mut out), AsmpropStatus::Ok);
        assert_eq!(take(out), printed);
        asmprop_spec_free(again);
    }
}

#[test]
fn parse_error_sets_last_error() {
    unsafe {
        let mut spec = ptr::null_mut();
        let status = asmprop_spec_parse(c("asm Broken\nsignature:\n").as_ptr(), &mut spec);
        assert_eq!(status, AsmpropStatus::Invalid);
        assert!(spec.is_null());
        assert!(!last_error().is_empty());
        let ok = parse(CLOCK);
        assert!(asmprop_last_error().is_null());
        asmprop_spec_free(ok);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        let mut spec = ptr::null_mut();
        assert_eq!(asmprop_spec_parse(ptr::null(), &mut spec), AsmpropStatus::NullArgument);
        assert_eq!(asmprop_spec_parse(c(CLOCK).as_ptr(), ptr::null_mut()), AsmpropStatus::NullArgument);
        let mut n = 0usize;
        assert_eq!(asmprop_spec_property_count(ptr::null(), &mut n), AsmpropStatus::NullArgument);
        asmprop_spec_free(ptr::null_mut());
        asmprop_report_free(ptr::null_mut());
        asmprop_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    unsafe {
        let bytes = [0xffu8, 0xfe, 0];
        let mut spec = ptr::null_mut();
        assert_eq!(asmprop_spec_parse(bytes.as_ptr().cast(), &mut spec), AsmpropStatus::InvalidUtf8);
    }
}

#[test]
fn add_check_and_export() {
    unsafe {
        let spec = parse(CLOCK);
        let formula = c("AG(min = 59 implies AX(min = 0))");
        assert_eq!(asmprop_spec_add_property(spec, formula.as_ptr(), AsmpropLogic::Ctl), AsmpropStatus::Ok);
        assert_eq!(asmprop_spec_add_property(spec, formula.as_ptr(), AsmpropLogic::Ctl), AsmpropStatus::Ok);
        assert_eq!(
            asmprop_spec_add_property(spec, c("EF(min = 1)").as_ptr(), AsmpropLogic::Ctl),
            AsmpropStatus::Ok
        );
        assert_eq!(
            asmprop_spec_add_property(spec, c("AG(minute = 0)").as_ptr(), AsmpropLogic::Ctl),
            AsmpropStatus::Invalid
        );
        assert!(last_error().contains("minute"));
        let mut n = 0usize;
        assert_eq!(asmprop_spec_property_count(spec, &mut n), AsmpropStatus::Ok);
        assert_eq!(n, 2);

        let mut report = ptr::null_mut();
        assert_eq!(asmprop_spec_check(spec, ptr::null(), &mut report), AsmpropStatus::Ok);
        assert_eq!(asmprop_report_count(report, &mut n), AsmpropStatus::Ok);
        assert_eq!(n, 2);
        let mut v = AsmpropVerdict::Error;
        assert_eq!(asmprop_report_verdict(report, 0, &mut v), AsmpropStatus::Ok);
        assert_eq!(v, AsmpropVerdict::Fails);
        assert_eq!(asmprop_report_verdict(report, 1, &mut v), AsmpropStatus::Ok);
        assert_eq!(v, AsmpropVerdict::Holds);
        assert_eq!(asmprop_report_verdict(report, 2, &mut v), AsmpropStatus::InvalidArgument);

        let mut text = ptr::null_mut();
        assert_eq!(asmprop_report_export(report, 0, 0, &mut text), AsmpropStatus::Ok);
        let cex = take(text);
        assert!(cex.starts_with("scenario Clock_cex_1"));
        let mut passed = 0;
        assert_eq!(asmprop_spec_run_scenario(spec, c(&cex).as_ptr(), &mut passed), AsmpropStatus::Ok);
        assert_eq!(passed, 1);

        assert_eq!(asmprop_report_export(report, 1, 1, &mut text), AsmpropStatus::Ok);
        let witness = take(text);
        assert_eq!(witness.matches("step;").count(), 60);
        assert_eq!(asmprop_spec_run_scenario(spec, c(&witness).as_ptr(), &mut passed), AsmpropStatus::Ok);
        assert_eq!(passed, 1);
        assert_eq!(asmprop_report_export(report, 1, 0, &mut text), AsmpropStatus::InvalidArgument);

        asmprop_report_free(report);
        asmprop_spec_free(spec);
    }
}

#[test]
fn state_limit_is_reported_per_property() {
    unsafe {
        let spec = parse(CLOCK);
        assert_eq!(asmprop_spec_add_property(spec, c("AG(h < 24)").as_ptr(), AsmpropLogic::Ctl), AsmpropStatus::Ok);
        let limits = AsmpropLimits { max_states: 10, max_time_ms: 0, ltl_bound: 0 };
        let mut report = ptr::null_mut();
        assert_eq!(asmprop_spec_check(spec, &limits, &mut report), AsmpropStatus::Ok);
        let mut v = AsmpropVerdict::Holds;
        assert_eq!(asmprop_report_verdict(report, 0, &mut v), AsmpropStatus::Ok);
        assert_eq!(v, AsmpropVerdict::Error);
        let mut text = ptr::null_mut();
        assert_eq!(asmprop_report_error(report, 0, &mut text), AsmpropStatus::Ok);
        assert!(take(text).starts_with("state-limit-exceeded"));
        assert_eq!(asmprop_report_export(report, 0, 0, &mut text), AsmpropStatus::Limit);
        asmprop_report_free(report);
        asmprop_spec_free(spec);
    }
}

#[test]
fn scenario_and_smv() {
    unsafe {
        let spec = parse(CLOCK);
        let mut passed = 0;
        assert_eq!(asmprop_spec_run_scenario(spec, c(SCENARIO).as_ptr(), &mut passed), AsmpropStatus::Ok);
        assert_eq!(passed, 1);
        let failing = SCENARIO.replacen("check sec = 1", "check sec = 2", 1);
        assert_eq!(asmprop_spec_run_scenario(spec, c(&failing).as_ptr(), &mut passed), AsmpropStatus::Ok);
        assert_eq!(passed, 0);
        let mut text = ptr::null_mut();
        assert_eq!(asmprop_spec_emit_smv(spec, &mut text), AsmpropStatus::Ok);
        assert!(take(text).starts_with("MODULE main"));
        asmprop_spec_free(spec);
    }
}

#[test]
fn formalize_with_replayed_answers() {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/repair");
    unsafe {
        let spec = parse(CLOCK);
        let mut formula = ptr::null_mut();
        let status = asmprop_spec_formalize(
            spec,
            c("When the minutes reach 59, the next minute value is 0").as_ptr(),
            AsmpropLogic::Ctl,
            c(fixtures).as_ptr(),
            &mut formula,
        );
        assert_eq!(status, AsmpropStatus::Ok, "{}", last_error());
        assert_eq!(take(formula), "AG(min = 59 implies AX(min = 0))");
        let mut n = 0usize;
        asmprop_spec_property_count(spec, &mut n);
        assert_eq!(n, 1);

        let status = asmprop_spec_formalize(spec, c("x").as_ptr(), AsmpropLogic::Ctl, c("/nonexistent").as_ptr(), ptr::null_mut());
        assert_eq!(status, AsmpropStatus::Backend);
        asmprop_spec_free(spec);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(asmprop_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
