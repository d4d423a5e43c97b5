//! C ABI over the keycast library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free`. Every fallible call returns a [`KcStatus`]; the
//! message for the last failure on the calling thread is available through
//! [`kc_last_error`]. Strings are copied into caller buffers: a call reports
//! the required size (including the terminating NUL) in `needed` and
//! returns `KC_BUFFER_TOO_SMALL` when the buffer is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use keycast::io::{emit_instance, generate_canonical, parse_instance, CanonicalKind, CanonicalParams, IoError};
use keycast::network::{default_d, NetworkInstance};
use keycast::protocol::{compile, CompiledScheme, SchemeError, SchemeKind, SchemeParams, SchemeResult};
use keycast::security::{audit_scheme, AuditOptions, SecurityError, SecurityReport};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    KcOk = 0,
    KcNullPointer = 1,
    KcInvalidUtf8 = 2,
    KcParseError = 3,
    KcBadParams = 4,
    KcInfeasible = 5,
    KcBudgetExceeded = 6,
    KcVerdictFailure = 7,
    KcBufferTooSmall = 8,
    KcOutOfRange = 9,
    KcPanic = 10,
}

pub struct KcInstance(NetworkInstance);
pub struct KcScheme(CompiledScheme);
pub struct KcRun(SchemeResult);
pub struct KcReport(SecurityReport);

/// Optional scheme parameters; a negative value selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KcParams {
    pub d: i64,
    pub ell: i64,
    pub x: i64,
    pub z: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: KcStatus, msg: impl Into<String>) -> KcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> KcStatus) -> KcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(KcStatus::KcPanic, "internal panic"),
    }
}

fn scheme_status(e: &SchemeError) -> KcStatus {
    match e {
        SchemeError::BadParams(_) => KcStatus::KcBadParams,
        SchemeError::ShareMismatch { .. } | SchemeError::KeyDisagreement { .. } => KcStatus::KcVerdictFailure,
        _ => KcStatus::KcInfeasible,
    }
}

fn io_status(e: &IoError) -> KcStatus {
    match e {
        IoError::Parse(_) | IoError::Validation(_) => KcStatus::KcParseError,
        IoError::BadParams(_) => KcStatus::KcBadParams,
        IoError::GenerationFailed { .. } => KcStatus::KcInfeasible,
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, KcStatus> {
    if p.is_null() {
        return Err(fail(KcStatus::KcNullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(KcStatus::KcInvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> KcStatus {
    let want = s.len() + 1;
    if !needed.is_null() {
        *needed = want;
    }
    if buf.is_null() || len < want {
        return fail(KcStatus::KcBufferTooSmall, format!("buffer of {len} bytes, {want} needed"));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    KcStatus::KcOk
}

fn opt(v: i64) -> Option<usize> {
    (v >= 0).then_some(v as usize)
}

/// Copies the last error message of the calling thread.
///
/// # Safety
/// `buf` must be valid for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn kc_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> KcStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_out(&msg, buf, len, needed)
}

/// Parses a `keycast v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_instance_parse(text: *const c_char, out: *mut *mut KcInstance) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return fail(KcStatus::KcNullPointer, "null output pointer");
        }
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_instance(text) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(KcInstance(inst)));
                KcStatus::KcOk
            }
            Err(e) => fail(io_status(&e), e.to_string()),
        }
    })
}

/// Builds a canonical fixture such as `fig2` or `partial_mix`.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_instance_generate(
    kind: *const c_char,
    d: usize,
    q: u32,
    ell: usize,
    out: *mut *mut KcInstance,
) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return fail(KcStatus::KcNullPointer, "null output pointer");
        }
        let name = match str_arg(kind) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(kind) = CanonicalKind::from_name(name) else {
            return fail(KcStatus::KcBadParams, format!("unknown kind `{name}`"));
        };
        match generate_canonical(kind, CanonicalParams::d(d).q(q).ell(ell)) {
            Ok(inst) => {
                *out = Box::into_raw(Box::new(KcInstance(inst)));
                KcStatus::KcOk
            }
            Err(e) => fail(io_status(&e), e.to_string()),
        }
    })
}

/// Canonical text of an instance.
///
/// # Safety
/// `inst` must come from this library; `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kc_instance_emit(
    inst: *const KcInstance,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> KcStatus {
    guard(|| match inst.as_ref() {
        Some(i) => copy_out(&emit_instance(&i.0), buf, len, needed),
        None => fail(KcStatus::KcNullPointer, "null instance"),
    })
}

/// Minimum source-to-terminal connectivity, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn kc_instance_default_d(inst: *const KcInstance) -> usize {
    inst.as_ref().map_or(0, |i| default_d(&i.0))
}

/// # Safety
/// `inst` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kc_instance_free(inst: *mut KcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Compiles a scheme (`full`, `multisource`, `partial`,
/// `partial-multisource`, `unstructured`) for an instance.
///
/// # Safety
/// `inst` must come from this library, `scheme` must be a NUL-terminated
/// string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_compile(
    inst: *const KcInstance,
    scheme: *const c_char,
    params: KcParams,
    out: *mut *mut KcScheme,
) -> KcStatus {
    guard(|| {
        let (Some(inst), false) = (inst.as_ref(), out.is_null()) else {
            return fail(KcStatus::KcNullPointer, "null instance or output pointer");
        };
        let name = match str_arg(scheme) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(kind) = SchemeKind::from_name(name).filter(|k| *k != SchemeKind::ShamirUnicast) else {
            return fail(KcStatus::KcBadParams, format!("unknown scheme `{name}`"));
        };
        let p = SchemeParams { d: opt(params.d), ell: opt(params.ell), x: opt(params.x), z: opt(params.z) };
        match compile(&inst.0, kind, p) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(KcScheme(s)));
                KcStatus::KcOk
            }
            Err(e) => fail(scheme_status(&e), e.to_string()),
        }
    })
}

/// Guaranteed rate of the compiled scheme as a reduced fraction.
///
/// # Safety
/// `scheme` must come from this library; `num` and `den` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_formula(scheme: *const KcScheme, num: *mut u64, den: *mut u64) -> KcStatus {
    guard(|| {
        let (Some(s), false, false) = (scheme.as_ref(), num.is_null(), den.is_null()) else {
            return fail(KcStatus::KcNullPointer, "null argument");
        };
        *num = *s.0.formula.numer();
        *den = *s.0.formula.denom();
        KcStatus::KcOk
    })
}

/// Number of terminal sets, i.e. of keys per run.
///
/// # Safety
/// `scheme` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_key_count(scheme: *const KcScheme) -> usize {
    scheme.as_ref().map_or(0, |s| s.0.instance().terminal_set_count())
}

/// # Safety
/// `scheme` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_free(scheme: *mut KcScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Executes the scheme with randomness derived from `seed`.
///
/// # Safety
/// `scheme` must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_run(scheme: *const KcScheme, seed: u64, out: *mut *mut KcRun) -> KcStatus {
    guard(|| {
        let (Some(s), false) = (scheme.as_ref(), out.is_null()) else {
            return fail(KcStatus::KcNullPointer, "null scheme or output pointer");
        };
        match s.0.run(seed) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(KcRun(r)));
                KcStatus::KcOk
            }
            Err(e) => fail(scheme_status(&e), e.to_string()),
        }
    })
}

/// Length of every key in field symbols.
///
/// # Safety
/// `run` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn kc_run_key_len(run: *const KcRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.key_len)
}

/// Copies the key of terminal set `set` (0-based) into `buf`.
///
/// # Safety
/// `run` must come from this library; `buf` must be valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn kc_run_key(run: *const KcRun, set: usize, buf: *mut u32, len: usize) -> KcStatus {
    guard(|| {
        let Some(r) = run.as_ref() else {
            return fail(KcStatus::KcNullPointer, "null run");
        };
        let Some(key) = r.0.keys.get(set) else {
            return fail(KcStatus::KcOutOfRange, format!("terminal set {set} of {}", r.0.keys.len()));
        };
        if buf.is_null() || len < key.len() {
            return fail(KcStatus::KcBufferTooSmall, format!("buffer of {len} symbols, {} needed", key.len()));
        }
        ptr::copy_nonoverlapping(key.as_ptr(), buf, key.len());
        KcStatus::KcOk
    })
}

/// Achieved rate as `key_len / blocklength` (not reduced), and whether it
/// meets the scheme's guarantee.
///
/// # Safety
/// `run` must come from this library; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn kc_run_rate(run: *const KcRun, key_len: *mut u64, blocklength: *mut u64, met: *mut bool) -> KcStatus {
    guard(|| {
        let (Some(r), false, false, false) = (run.as_ref(), key_len.is_null(), blocklength.is_null(), met.is_null()) else {
            return fail(KcStatus::KcNullPointer, "null argument");
        };
        *key_len = r.0.key_len as u64;
        *blocklength = r.0.blocklength as u64;
        *met = r.0.formula_met;
        KcStatus::KcOk
    })
}

/// # Safety
/// `run` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kc_run_free(run: *mut KcRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Exhaustive security audit. `budget` caps the number of randomness
/// states; 0 selects the library default. A leak is not an error: check
/// [`kc_report_passed`].
///
/// # Safety
/// `scheme` must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kc_scheme_audit(scheme: *const KcScheme, budget: u64, out: *mut *mut KcReport) -> KcStatus {
    guard(|| {
        let (Some(s), false) = (scheme.as_ref(), out.is_null()) else {
            return fail(KcStatus::KcNullPointer, "null scheme or output pointer");
        };
        let mut opts = AuditOptions::default();
        if budget > 0 {
            opts.budget = budget as u128;
        }
        match audit_scheme(&s.0, &opts) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(KcReport(r)));
                KcStatus::KcOk
            }
            Err(e @ SecurityError::BudgetExceeded { .. }) => fail(KcStatus::KcBudgetExceeded, e.to_string()),
            Err(SecurityError::Scheme(e)) => fail(scheme_status(&e), e.to_string()),
            Err(e) => fail(KcStatus::KcBadParams, e.to_string()),
        }
    })
}

/// True when every admissible eavesdropper set has zero mutual information
/// with the key and every key is uniform.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn kc_report_passed(report: *const KcReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.passed())
}

/// Human-readable report text.
///
/// # Safety
/// `report` must come from this library; `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kc_report_text(report: *const KcReport, buf: *mut c_char, len: usize, needed: *mut usize) -> KcStatus {
    guard(|| match report.as_ref() {
        Some(r) => copy_out(&r.0.to_text(), buf, len, needed),
        None => fail(KcStatus::KcNullPointer, "null report"),
    })
}

/// # Safety
/// `report` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kc_report_free(report: *mut KcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
