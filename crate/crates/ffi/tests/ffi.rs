use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use sclab_ffi::*;

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    sclab_string_free(p);
    s
}

#[test]
fn lists_catalogue() {
    assert_eq!(sclab_experiment_count(), 13);
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(sclab_experiment_id(0, &mut out), SclabStatus::Ok);
        assert!(!take_string(out).is_empty());
        assert_eq!(sclab_experiment_id(99, &mut out), SclabStatus::OutOfRange);
        assert!(!sclab_last_error().is_null());
    }
}

#[test]
fn runs_an_experiment_and_returns_json() {
    let id = CString::new("seq-discontinuity").unwrap();
    let cfg = CString::new(r#"{"seed": 11}"#).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(sclab_run(id.as_ptr(), cfg.as_ptr(), &mut report), SclabStatus::Ok);
        assert_eq!(sclab_report_passed(report), 1);
        assert!(sclab_report_check_count(report) > 0);
        let mut json = ptr::null_mut();
        assert_eq!(sclab_report_json(report, &mut json), SclabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["experiment"], "seq-discontinuity");
        assert_eq!(v["config"]["seed"], 11);
        sclab_report_free(report);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new("nope").unwrap();
    let cfg = CString::new(r#"{"not_a_field": 1}"#).unwrap();
    let good = CString::new("seq-tail-bounds").unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(
            sclab_run(bad.as_ptr(), ptr::null(), &mut report),
            SclabStatus::UnknownExperiment
        );
        assert_eq!(
            sclab_run(good.as_ptr(), cfg.as_ptr(), &mut report),
            SclabStatus::InvalidConfig
        );
        let msg = CStr::from_ptr(sclab_last_error()).to_str().unwrap();
        assert!(msg.contains("not_a_field"));
        assert_eq!(sclab_run(ptr::null(), ptr::null(), &mut report), SclabStatus::NullPointer);
        assert_eq!(sclab_run(good.as_ptr(), ptr::null(), ptr::null_mut()), SclabStatus::NullPointer);
        assert_eq!(sclab_report_passed(ptr::null()), -1);
        sclab_report_free(ptr::null_mut());
        sclab_string_free(ptr::null_mut());
    }
}

#[test]
fn gate_in_log_form() {
    let (mut sign, mut log) = (0i8, 0.0f64);
    unsafe {
        assert_eq!(sclab_phi_gate(0.5, &mut sign, &mut log), SclabStatus::Ok);
        assert_eq!(sign, 1);
        assert!((log + 4f64.exp()).abs() < 1e-12);
        assert_eq!(sclab_phi_gate(-1.0, &mut sign, &mut log), SclabStatus::Ok);
        assert_eq!(sign, 0);
        assert_eq!(sclab_phi_gate(f64::NAN, &mut sign, &mut log), SclabStatus::InvalidArgument);
    }
}

#[test]
fn sequence_handles() {
    let coeffs = [0.0, 0.0, 1.0];
    let mut x = ptr::null_mut();
    let mut y = ptr::null_mut();
    let mut n = 0.0;
    unsafe {
        assert_eq!(sclab_seq_new(coeffs.as_ptr(), 3, &mut x), SclabStatus::Ok);
        assert_eq!(sclab_seq_norm(x, 1, &mut n), SclabStatus::Ok);
        assert_eq!(n, 27.0);
        // plateau value 1/2 of f_3 at t = 1/3
        assert_eq!(sclab_seq_diffeo(x, 1.0 / 3.0, &mut y), SclabStatus::Ok);
        assert_eq!(sclab_seq_norm(y, 0, &mut n), SclabStatus::Ok);
        assert_eq!(n, 0.5);
        let bad = [f64::INFINITY];
        let mut z = ptr::null_mut();
        assert_eq!(sclab_seq_new(bad.as_ptr(), 1, &mut z), SclabStatus::InvalidArgument);
        assert_eq!(sclab_seq_new(ptr::null(), 2, &mut z), SclabStatus::NullPointer);
        sclab_seq_free(x);
        sclab_seq_free(y);
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sclab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "typedef struct SclabReport SclabReport",
        "typedef struct SclabSeq SclabSeq",
        "SCLAB_STATUS_OK = 0",
        "sclab_run(",
        "sclab_report_json(",
        "sclab_report_free(",
        "sclab_string_free(",
        "sclab_phi_gate(",
        "sclab_seq_norm(",
        "sclab_last_error(",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // syntax check with the system C compiler when one is installed
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
