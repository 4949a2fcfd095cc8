//! C interface to the engine, the proof tools and checkpoint averaging.
//!
//! Every fallible call returns a [`TlpStatus`]. On failure a message is
//! kept per thread and can be read with [`tlp_last_error`]. Handles are
//! opaque and must be released with their `_free` function; strings handed
//! out to the caller are released with [`tlp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tlp::checkpoint::{average_checkpoints, Checkpoint};
use tlp::{check_proof, parse_program, parse_query, parse_tree, prove_trajectories, serialize_tree, solve_all};
use tlp::{LimitHit, SolveLimits, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EngineError = 4,
    OutOfRange = 5,
    InvalidLimits = 6,
    CheckpointError = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlpLimitHit {
    None = 0,
    Depth = 1,
    Steps = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TlpLimits {
    pub max_solutions: usize,
    pub max_depth: u32,
    pub max_steps: u64,
    pub occurs_check: bool,
}

impl From<TlpLimits> for SolveLimits {
    fn from(l: TlpLimits) -> Self {
        SolveLimits {
            max_solutions: l.max_solutions,
            max_depth: l.max_depth,
            max_steps: l.max_steps,
            occurs_check: l.occurs_check,
        }
    }
}

/// A parsed program.
pub struct TlpProgram {
    inner: tlp::Program,
}

/// Answers to a query, already rendered as text.
pub struct TlpSolutions {
    answers: Vec<CString>,
    limit: TlpLimitHit,
}

/// Distinct proof trees of a query in serialized form.
pub struct TlpProofs {
    trees: Vec<CString>,
    exhausted: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(TlpStatus, String);

impl Fail {
    fn new(status: TlpStatus, msg: impl std::fmt::Display) -> Self {
        Fail(status, msg.to_string())
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> TlpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TlpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            TlpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(TlpStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::new(TlpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::new(TlpStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail::new(TlpStatus::NullArgument, format!("{what} is null")))
}

fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("no interior nul")
}

unsafe fn limits_or_default(limits: *const TlpLimits) -> Result<SolveLimits, Fail> {
    let l = limits.as_ref().map(|l| SolveLimits::from(*l)).unwrap_or_default();
    l.validate().map_err(|e| Fail::new(TlpStatus::InvalidLimits, e))?;
    Ok(l)
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn tlp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tlp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tlp_limits_default() -> TlpLimits {
    let d = SolveLimits::default();
    TlpLimits {
        max_solutions: d.max_solutions,
        max_depth: d.max_depth,
        max_steps: d.max_steps,
        occurs_check: d.occurs_check,
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn tlp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `source` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlp_program_parse(source: *const c_char, out: *mut *mut TlpProgram) -> TlpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let src = text(source, "source")?;
        let inner = parse_program(src).map_err(|e| Fail::new(TlpStatus::ParseError, e))?;
        *out = Box::into_raw(Box::new(TlpProgram { inner }));
        Ok(())
    })
}

/// # Safety
/// `program` must be null or a handle from [`tlp_program_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn tlp_program_free(program: *mut TlpProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Number of clauses in the program.
///
/// # Safety
/// `program` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_program_len(program: *const TlpProgram) -> usize {
    program.as_ref().map_or(0, |p| p.inner.len())
}

/// Solves `query`. `limits` may be null for the defaults.
///
/// # Safety
/// Pointers must be valid as documented; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlp_solve(
    program: *const TlpProgram,
    query: *const c_char,
    limits: *const TlpLimits,
    out: *mut *mut TlpSolutions,
) -> TlpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let program = handle(program, "program")?;
        let limits = limits_or_default(limits)?;
        let q = parse_query(text(query, "query")?).map_err(|e| Fail::new(TlpStatus::ParseError, e))?;
        let sols = solve_all(&program.inner, &q, &limits).map_err(|e| Fail::new(TlpStatus::EngineError, e))?;
        let limit = match sols.limit {
            None => TlpLimitHit::None,
            Some(LimitHit::Depth) => TlpLimitHit::Depth,
            Some(LimitHit::Steps) => TlpLimitHit::Steps,
        };
        let answers = sols.answers.iter().map(|a| c_string(a.to_string())).collect();
        *out = Box::into_raw(Box::new(TlpSolutions { answers, limit }));
        Ok(())
    })
}

/// # Safety
/// `sols` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_solutions_count(sols: *const TlpSolutions) -> usize {
    sols.as_ref().map_or(0, |s| s.answers.len())
}

/// # Safety
/// `sols` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_solutions_limit_hit(sols: *const TlpSolutions) -> TlpLimitHit {
    sols.as_ref().map_or(TlpLimitHit::None, |s| s.limit)
}

/// Borrowed text of answer `index`, e.g. `X = 990.0`; valid while `sols`
/// lives. Null when out of range.
///
/// # Safety
/// `sols` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_solutions_get(sols: *const TlpSolutions, index: usize) -> *const c_char {
    sols.as_ref().and_then(|s| s.answers.get(index)).map_or(ptr::null(), |a| a.as_ptr())
}

/// # Safety
/// `sols` must be null or a handle from [`tlp_solve`], freed once.
#[no_mangle]
pub unsafe extern "C" fn tlp_solutions_free(sols: *mut TlpSolutions) {
    if !sols.is_null() {
        drop(Box::from_raw(sols));
    }
}

/// Enumerates distinct proofs of `query`, at most `limits.max_solutions`.
///
/// # Safety
/// Pointers must be valid as documented; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlp_prove(
    program: *const TlpProgram,
    query: *const c_char,
    limits: *const TlpLimits,
    out: *mut *mut TlpProofs,
) -> TlpStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let program = handle(program, "program")?;
        let limits = limits_or_default(limits)?;
        let q = parse_query(text(query, "query")?).map_err(|e| Fail::new(TlpStatus::ParseError, e))?;
        let set = prove_trajectories(&program.inner, &q, &limits).map_err(|e| Fail::new(TlpStatus::EngineError, e))?;
        let trees = set.trees.iter().map(|t| c_string(serialize_tree(t))).collect();
        *out = Box::into_raw(Box::new(TlpProofs { trees, exhausted: set.exhausted }));
        Ok(())
    })
}

/// # Safety
/// `proofs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_proofs_count(proofs: *const TlpProofs) -> usize {
    proofs.as_ref().map_or(0, |p| p.trees.len())
}

/// True when no further distinct proof exists.
///
/// # Safety
/// `proofs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_proofs_exhausted(proofs: *const TlpProofs) -> bool {
    proofs.as_ref().is_some_and(|p| p.exhausted)
}

/// Borrowed serialized tree `index`; null when out of range.
///
/// # Safety
/// `proofs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tlp_proofs_get(proofs: *const TlpProofs, index: usize) -> *const c_char {
    proofs.as_ref().and_then(|p| p.trees.get(index)).map_or(ptr::null(), |t| t.as_ptr())
}

/// # Safety
/// `proofs` must be null or a handle from [`tlp_prove`], freed once.
#[no_mangle]
pub unsafe extern "C" fn tlp_proofs_free(proofs: *mut TlpProofs) {
    if !proofs.is_null() {
        drop(Box::from_raw(proofs));
    }
}

/// Checks a serialized proof tree. `*valid` is set to the verdict; when
/// `reason` is non-null and the tree is invalid, it receives an owned
/// explanation to release with [`tlp_string_free`].
///
/// # Safety
/// Pointers must be valid as documented; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tlp_check(
    program: *const TlpProgram,
    tree: *const c_char,
    valid: *mut bool,
    reason: *mut *mut c_char,
) -> TlpStatus {
    guard(|| {
        let valid = out_ptr(valid, "valid")?;
        *valid = false;
        if let Some(r) = reason.as_mut() {
            *r = ptr::null_mut();
        }
        let program = handle(program, "program")?;
        let t = parse_tree(text(tree, "tree")?).map_err(|e| Fail::new(TlpStatus::ParseError, e))?;
        match check_proof(&program.inner, &t) {
            Verdict::Valid => *valid = true,
            v @ Verdict::Invalid { .. } => {
                if let Some(r) = reason.as_mut() {
                    *r = c_string(v.to_string()).into_raw();
                }
            }
        }
        Ok(())
    })
}

/// Writes `alpha * base + (1 - alpha) * tuned` to the directory `out`.
///
/// # Safety
/// All strings must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn tlp_average_checkpoints(
    base: *const c_char,
    tuned: *const c_char,
    alpha: f64,
    out: *const c_char,
) -> TlpStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Fail::new(TlpStatus::OutOfRange, format!("alpha must lie in [0, 1], got {alpha}")));
        }
        let ckpt = |p: &str| Checkpoint::open(p).map_err(|e| Fail::new(TlpStatus::CheckpointError, e));
        let base = ckpt(text(base, "base")?)?;
        let tuned = ckpt(text(tuned, "tuned")?)?;
        average_checkpoints(&base, &tuned, alpha, text(out, "out")?)
            .map_err(|e| Fail::new(TlpStatus::CheckpointError, e))?;
        Ok(())
    })
}
