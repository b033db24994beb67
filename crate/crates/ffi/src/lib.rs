//! C ABI over `permid`. Every entry point returns a [`PermidStatus`]; on
//! failure the message is available from [`permid_last_error`] on the same
//! thread. Strings handed out must be released with [`permid_string_free`],
//! code handles with [`permid_code_free`].

use permid::feedback::{build_feedback_code, eval_feedback_exact, eval_feedback_mc, target_test, DEFAULT_TABLE_BUDGET};
use permid::idcode::{eval_noiseless, eval_noiseless_mc, eval_perm_exact, eval_perm_mc, EvalOptions, NoiselessIdCode};
use permid::io::{self, Document};
use permid::rng::RootSeed;
use permid::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermidStatus {
    Ok = 0,
    InvalidParameter = 1,
    Overflow = 2,
    DimensionMismatch = 3,
    SymbolOutOfRange = 4,
    InvalidCode = 5,
    Hypothesis = 6,
    Infeasible = 7,
    Inapplicable = 8,
    Budget = 9,
    BoundViolation = 10,
    Format = 11,
    NullPointer = 12,
    Utf8 = 13,
    Panic = 14,
}

impl From<&Error> for PermidStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => PermidStatus::InvalidParameter,
            Error::Overflow(_) => PermidStatus::Overflow,
            Error::DimensionMismatch(_) => PermidStatus::DimensionMismatch,
            Error::SymbolOutOfRange { .. } => PermidStatus::SymbolOutOfRange,
            Error::InvalidCode(_) => PermidStatus::InvalidCode,
            Error::Hypothesis(_) => PermidStatus::Hypothesis,
            Error::Infeasible(_) => PermidStatus::Infeasible,
            Error::Inapplicable(_) => PermidStatus::Inapplicable,
            Error::Budget(_) => PermidStatus::Budget,
            Error::BoundViolation(_) => PermidStatus::BoundViolation,
            Error::Format(_) => PermidStatus::Format,
        }
    }
}

/// Opaque handle to any loaded document.
pub struct PermidCode {
    doc: Document,
    seed: Option<u64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(PermidStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PermidStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PermidStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PermidStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PermidStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PermidStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn code_arg<'a>(p: *const PermidCode) -> Result<&'a PermidCode, Fail> {
    p.as_ref().ok_or_else(|| null("code"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s).expect("JSON has no nul").into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn permid_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn permid_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a code document (perm, noiseless, feedback or setsystem).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_code_from_json(json: *const c_char, out: *mut *mut PermidCode) -> PermidStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let (doc, seed) = io::parse_document(text)?;
        *out = Box::into_raw(Box::new(PermidCode { doc, seed }));
        Ok(())
    })
}

/// Serializes a code back to its document form.
///
/// # Safety
/// `code` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_code_to_json(code: *const PermidCode, out: *mut *mut c_char) -> PermidStatus {
    guard(|| {
        let c = code_arg(code)?;
        put_string(out, io::render_document(&c.doc, c.seed))
    })
}

/// Releases a code handle. Null is ignored.
///
/// # Safety
/// `code` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn permid_code_free(code: *mut PermidCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Number of messages of a code.
///
/// # Safety
/// `code` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_code_messages(code: *const PermidCode, out: *mut usize) -> PermidStatus {
    guard(|| {
        let c = code_arg(code)?;
        let m = match &c.doc {
            Document::Perm(p) => p.m(),
            Document::Noiseless(p) => p.m(),
            Document::Feedback(f) => f.m(),
            Document::SetSystem(s) => s.len(),
            Document::ApproxMap(_) => return Err(Fail(PermidStatus::InvalidCode, "an approxmap is not a code".into())),
        };
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = m;
        Ok(())
    })
}

fn noiseless_of(doc: &Document) -> Result<Option<NoiselessIdCode>, Fail> {
    Ok(match doc {
        Document::Noiseless(c) => Some(c.clone()),
        Document::SetSystem(s) => Some(NoiselessIdCode::from_supports(s.ground(), s.sets(), s.sets().to_vec())?),
        _ => None,
    })
}

fn not_a_code(doc: &Document) -> Fail {
    Fail(PermidStatus::InvalidCode, format!("cannot evaluate a {} document", doc.kind()))
}

/// Exact error report as JSON. At most `matrix_cap` matrix entries are listed.
///
/// # Safety
/// `code` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_eval_exact(code: *const PermidCode, matrix_cap: usize, out: *mut *mut c_char) -> PermidStatus {
    guard(|| {
        let c = code_arg(code)?;
        let opts = EvalOptions { matrix_cap };
        let v = match (&c.doc, noiseless_of(&c.doc)?) {
            (Document::Perm(p), _) => io::exact_report_json(&eval_perm_exact(p, opts)),
            (Document::Feedback(f), _) => io::collision_report_json(&eval_feedback_exact(f, matrix_cap)),
            (_, Some(n)) => io::exact_report_json(&eval_noiseless(&n, opts)),
            _ => return Err(not_a_code(&c.doc)),
        };
        put_string(out, serde_json::to_string(&v).expect("serializable"))
    })
}

/// Monte Carlo error report as JSON; identical arguments give identical output.
///
/// # Safety
/// `code` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_eval_mc(
    code: *const PermidCode,
    trials: u64,
    seed: u64,
    matrix_cap: usize,
    out: *mut *mut c_char,
) -> PermidStatus {
    guard(|| {
        let c = code_arg(code)?;
        let opts = EvalOptions { matrix_cap };
        let r = match (&c.doc, noiseless_of(&c.doc)?) {
            (Document::Perm(p), _) => eval_perm_mc(p, trials, &RootSeed(seed).stream("eval-mc"), opts)?,
            (Document::Feedback(f), _) => eval_feedback_mc(f, trials, &RootSeed(seed).stream("feedback-mc"), matrix_cap)?,
            (_, Some(n)) => eval_noiseless_mc(&n, trials, &RootSeed(seed).stream("eval-mc"), opts)?,
            _ => return Err(not_a_code(&c.doc)),
        };
        put_string(out, serde_json::to_string(&io::mc_report_json(&r)).expect("serializable"))
    })
}

/// Draws a feedback code with `l` blocks of length `n` over `q` symbols.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_feedback_build(
    n: usize,
    q: usize,
    l: usize,
    m: usize,
    seed: u64,
    out: *mut *mut PermidCode,
) -> PermidStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let code = build_feedback_code(n, q, l, m, &RootSeed(seed).stream("feedback"), DEFAULT_TABLE_BUDGET)?;
        *out = Box::into_raw(Box::new(PermidCode {
            doc: Document::Feedback(code),
            seed: Some(seed),
        }));
        Ok(())
    })
}

/// Checks `λ2 ≤ 2/N` on a feedback code; `pass` receives the verdict and
/// `report` (if not null) the full JSON report.
///
/// # Safety
/// `code` must be a live handle; `pass` must be writable; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn permid_feedback_target_test(
    code: *const PermidCode,
    early_exit: bool,
    pass: *mut bool,
    report: *mut *mut c_char,
) -> PermidStatus {
    guard(|| {
        let c = code_arg(code)?;
        let Document::Feedback(f) = &c.doc else {
            return Err(Fail(PermidStatus::InvalidCode, "not a feedback code".into()));
        };
        if pass.is_null() {
            return Err(null("pass"));
        }
        let r = target_test(f, early_exit)?;
        *pass = r.pass;
        if !report.is_null() {
            put_string(report, serde_json::to_string(&io::collision_report_json(&r)).expect("serializable"))?;
        }
        Ok(())
    })
}

/// Number of types of length-`n` vectors over `q` symbols, in decimal.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_count_types(n: usize, q: usize, out: *mut *mut c_char) -> PermidStatus {
    guard(|| put_string(out, permid::combinatorics::count_types(n, q)?.to_string()))
}

/// Inverse of the binary entropy on `[0, 1/2]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn permid_h2_inv(v: f64, out: *mut f64) -> PermidStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = permid::entropy::h2_inv(v)?;
        Ok(())
    })
}
