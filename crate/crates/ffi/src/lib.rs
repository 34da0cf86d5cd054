//! C ABI over the experiment runner and a few core primitives.
//!
//! Every fallible entry point returns a [`SclabStatus`]; details of the last
//! failure on the calling thread are available from [`sclab_last_error`].
//! Strings handed out must be released with [`sclab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sclab::bump::phi_gate;
use sclab::experiments::{self, catalogue, ExperimentConfig, ExperimentReport};
use sclab::scale::{Level, SeqVector};
use sclab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownExperiment = 3,
    InvalidConfig = 4,
    InvalidArgument = 5,
    Unrepresentable = 6,
    OutOfRange = 7,
    Internal = 8,
}

/// Opaque experiment report.
pub struct SclabReport(ExperimentReport);

/// Opaque finite sequence vector.
pub struct SclabSeq(SeqVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &LabError) -> SclabStatus {
    match e {
        LabError::UnknownExperiment(_) => SclabStatus::UnknownExperiment,
        LabError::Config(_) | LabError::Json(_) => SclabStatus::InvalidConfig,
        LabError::Unrepresentable(_) => SclabStatus::Unrepresentable,
        LabError::Io(_) => SclabStatus::Internal,
        _ => SclabStatus::InvalidArgument,
    }
}

fn fail(status: SclabStatus, msg: impl Into<String>) -> SclabStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting panics and library errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), SclabStatus>) -> SclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SclabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SclabStatus::Internal, "panic inside sclab"),
    }
}

fn lab<T>(r: sclab::Result<T>) -> Result<T, SclabStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, SclabStatus> {
    if p.is_null() {
        return Err(fail(SclabStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SclabStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), SclabStatus> {
    let c = CString::new(s).map_err(|_| fail(SclabStatus::Internal, "interior nul byte"))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), SclabStatus> {
    if out.is_null() {
        return Err(fail(SclabStatus::NullPointer, "null output pointer"));
    }
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sclab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn sclab_experiment_count() -> usize {
    catalogue().len()
}

/// Id of catalogue entry `index`, as a newly allocated string.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sclab_experiment_id(index: usize, out: *mut *mut c_char) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let e = catalogue()
            .get(index)
            .ok_or_else(|| fail(SclabStatus::OutOfRange, format!("no experiment {index}")))?;
        out_string(e.id.to_string(), out)
    })
}

/// Runs experiment `id` with an optional flat JSON config (null for defaults).
///
/// # Safety
/// `id` must be a nul-terminated string, `config_json` null or a
/// nul-terminated string, `out` writable. Release the report with
/// [`sclab_report_free`].
#[no_mangle]
pub unsafe extern "C" fn sclab_run(
    id: *const c_char,
    config_json: *const c_char,
    out: *mut *mut SclabReport,
) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let id = read_str(id)?;
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            lab(ExperimentConfig::from_json(read_str(config_json)?))?
        };
        let report = lab(experiments::run(id, &cfg))?;
        *out = Box::into_raw(Box::new(SclabReport(report)));
        Ok(())
    })
}

/// 1 when every check passed, 0 otherwise, -1 for a null report.
///
/// # Safety
/// `report` must be null or a live report from [`sclab_run`].
#[no_mangle]
pub unsafe extern "C" fn sclab_report_passed(report: *const SclabReport) -> i32 {
    match report.as_ref() {
        Some(r) => i32::from(r.0.pass),
        None => -1,
    }
}

/// Number of check records, 0 for a null report.
///
/// # Safety
/// `report` must be null or a live report from [`sclab_run`].
#[no_mangle]
pub unsafe extern "C" fn sclab_report_check_count(report: *const SclabReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.checks.len())
}

/// The report as pretty JSON in a newly allocated string.
///
/// # Safety
/// `report` must be a live report, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sclab_report_json(
    report: *const SclabReport,
    out: *mut *mut c_char,
) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let r = report
            .as_ref()
            .ok_or_else(|| fail(SclabStatus::NullPointer, "null report"))?;
        out_string(lab(r.0.to_json())?, out)
    })
}

/// # Safety
/// `report` must be null or a report from [`sclab_run`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn sclab_report_free(report: *mut SclabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn sclab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `e^{-e^{1/t^2}}` in log form: `sign` is 0 for an exact zero.
///
/// # Safety
/// `sign` and `logmag` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sclab_phi_gate(t: f64, sign: *mut i8, logmag: *mut f64) -> SclabStatus {
    guard(|| {
        check_out(sign)?;
        check_out(logmag)?;
        if t.is_nan() {
            return Err(fail(SclabStatus::InvalidArgument, "t is NaN"));
        }
        let g = phi_gate(t);
        *sign = g.sign();
        *logmag = g.logmag();
        Ok(())
    })
}

/// Sequence vector with coefficients of `e_1, ..., e_len`.
///
/// # Safety
/// `coeffs` must point to `len` readable doubles (or be null with
/// `len == 0`); `out` writable. Release with [`sclab_seq_free`].
#[no_mangle]
pub unsafe extern "C" fn sclab_seq_new(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut SclabSeq,
) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let v = if len == 0 {
            Vec::new()
        } else if coeffs.is_null() {
            return Err(fail(SclabStatus::NullPointer, "null coefficient array"));
        } else {
            std::slice::from_raw_parts(coeffs, len).to_vec()
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(fail(SclabStatus::InvalidArgument, "non-finite coefficient"));
        }
        *out = Box::into_raw(Box::new(SclabSeq(SeqVector::from_coeffs(v))));
        Ok(())
    })
}

/// Level-`level` norm of the sequence vector.
///
/// # Safety
/// `seq` must be a live vector, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sclab_seq_norm(seq: *const SclabSeq, level: u32, out: *mut f64) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let s = seq
            .as_ref()
            .ok_or_else(|| fail(SclabStatus::NullPointer, "null sequence"))?;
        *out = s.0.norm(Level(level));
        Ok(())
    })
}

/// `s_t(x)` as a new sequence vector.
///
/// # Safety
/// `seq` must be a live vector, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sclab_seq_diffeo(
    seq: *const SclabSeq,
    t: f64,
    out: *mut *mut SclabSeq,
) -> SclabStatus {
    guard(|| {
        check_out(out)?;
        let s = seq
            .as_ref()
            .ok_or_else(|| fail(SclabStatus::NullPointer, "null sequence"))?;
        if t.is_nan() {
            return Err(fail(SclabStatus::InvalidArgument, "t is NaN"));
        }
        *out = Box::into_raw(Box::new(SclabSeq(sclab::gallery::seq_diffeo(t, &s.0))));
        Ok(())
    })
}

/// # Safety
/// `seq` must be null or a vector from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn sclab_seq_free(seq: *mut SclabSeq) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}
