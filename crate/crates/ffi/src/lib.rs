// SPDX-License-Identifier: Apache-2.0

//! C ABI over a loaded fixkit session.
//!
//! Values cross the boundary as S-expression text. Every function returns a
//! [`FixkitStatus`]; on failure the message is kept per thread and can be
//! read with [`fixkit_last_error`]. Strings returned through out-parameters
//! are owned by the caller and released with [`fixkit_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fixkit::kernel::{generate_typed, seeded_rng};
use fixkit::lang::Mode;
use fixkit::{read_value, Error, Session, Value};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixkitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Schema or value text could not be read.
    Parse = 3,
    /// The schema is invalid.
    Validation = 4,
    UnknownName = 5,
    /// Guarded evaluation found an ill-typed argument.
    Guard = 6,
    /// Any other evaluation failure, such as the depth limit.
    Eval = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque handle to a loaded schema with its functions and visitors.
pub struct FixkitSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let msg = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|b| *b != 0);
        CString::new(bytes).expect("interior NULs removed")
    });
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(FixkitStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match &e {
            Error::Io { .. } => FixkitStatus::Io,
            Error::Read(_) | Error::Usage(_) => FixkitStatus::Parse,
            Error::Schema(_) => FixkitStatus::Validation,
            Error::Kernel(_) => FixkitStatus::UnknownName,
            Error::Eval(fixkit::lang::EvalError::Guard { .. }) => FixkitStatus::Guard,
            Error::Eval(fixkit::lang::EvalError::UnknownFunction(_)) => FixkitStatus::UnknownName,
            Error::Semantic(m) if m.starts_with("unknown") => FixkitStatus::UnknownName,
            _ => FixkitStatus::Eval,
        };
        Failure(status, e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> Outcome<()>) -> FixkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FixkitStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FixkitStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure(FixkitStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FixkitStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `s` is null or a handle from [`fixkit_session_load`] not yet freed.
unsafe fn session<'a>(s: *const FixkitSession) -> Outcome<&'a Session> {
    s.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Failure(FixkitStatus::NullArgument, "session is null".to_string()))
}

fn value(text: &str) -> Outcome<Value> {
    read_value(text).map_err(|e| Failure(FixkitStatus::Parse, format!("value: {e}")))
}

/// # Safety
/// `out` is null or writable.
unsafe fn emit(out: *mut *mut c_char, s: String) -> Outcome<()> {
    if out.is_null() {
        return Err(Failure(FixkitStatus::NullArgument, "out is null".to_string()));
    }
    let c = CString::new(s).map_err(|_| Failure(FixkitStatus::Eval, "result contains NUL".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn type_id(s: &Session, ty: &str) -> Outcome<fixkit::schema::TypeId> {
    s.type_id(ty).map_err(Failure::from)
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fixkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates `.fty` source text.
///
/// # Safety
/// `source` is a NUL-terminated string and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn fixkit_session_load(source: *const c_char, out: *mut *mut FixkitSession) -> FixkitStatus {
    guard(|| {
        let text = text(source, "source")?;
        if out.is_null() {
            return Err(Failure(FixkitStatus::NullArgument, "out is null".to_string()));
        }
        let inner = Session::load_str(text)?;
        *out = Box::into_raw(Box::new(FixkitSession { inner }));
        Ok(())
    })
}

/// # Safety
/// `session` is null or a handle from [`fixkit_session_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fixkit_session_free(session: *mut FixkitSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fixkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the fix of `value` at type `ty`.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_fix(
    session: *const FixkitSession,
    ty: *const c_char,
    value_text: *const c_char,
    out: *mut *mut c_char,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let t = type_id(s, text(ty, "type")?)?;
        let v = value(text(value_text, "value")?)?;
        emit(out, s.schema.fix(t, &v).to_string())
    })
}

/// Sets `*out` to 1 if `value` is of type `ty`, else 0.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_recognize(
    session: *const FixkitSession,
    ty: *const c_char,
    value_text: *const c_char,
    out: *mut i32,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let t = type_id(s, text(ty, "type")?)?;
        let v = value(text(value_text, "value")?)?;
        let out = out
            .as_mut()
            .ok_or_else(|| Failure(FixkitStatus::NullArgument, "out is null".to_string()))?;
        *out = i32::from(s.schema.recognize(t, &v));
        Ok(())
    })
}

/// Sets `*out` to 1 if `a` and `b` have equal fixes at `ty`, else 0.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_equiv(
    session: *const FixkitSession,
    ty: *const c_char,
    a: *const c_char,
    b: *const c_char,
    out: *mut i32,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let t = type_id(s, text(ty, "type")?)?;
        let a = value(text(a, "a")?)?;
        let b = value(text(b, "b")?)?;
        let out = out
            .as_mut()
            .ok_or_else(|| Failure(FixkitStatus::NullArgument, "out is null".to_string()))?;
        *out = i32::from(s.schema.equiv(t, &a, &b));
        Ok(())
    })
}

/// Writes the count measure of `value` at `ty`.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_count(
    session: *const FixkitSession,
    ty: *const c_char,
    value_text: *const c_char,
    out: *mut u64,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let t = type_id(s, text(ty, "type")?)?;
        let v = value(text(value_text, "value")?)?;
        let out = out
            .as_mut()
            .ok_or_else(|| Failure(FixkitStatus::NullArgument, "out is null".to_string()))?;
        *out = s.schema.count(t, &v);
        Ok(())
    })
}

/// Evaluates a call such as `(aterm-eval (:num 1))`. `guarded` selects
/// guard-checking evaluation instead of the fixing semantics.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_eval(
    session: *const FixkitSession,
    call: *const c_char,
    guarded: bool,
    out: *mut *mut c_char,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let mode = if guarded { Mode::Guarded } else { Mode::Logic };
        let r = s.eval_text(text(call, "call")?, mode)?;
        emit(out, r.to_string())
    })
}

/// Runs a visitor by name.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_visit(
    session: *const FixkitSession,
    visitor: *const c_char,
    value_text: *const c_char,
    out: *mut *mut c_char,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let v = value(text(value_text, "value")?)?;
        let r = s.visit(text(visitor, "visitor")?, &v)?;
        emit(out, r.to_string())
    })
}

/// Writes `n` generated values of `ty`, one per line.
///
/// # Safety
/// Pointers are valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn fixkit_gen(
    session: *const FixkitSession,
    ty: *const c_char,
    n: u64,
    size: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> FixkitStatus {
    guard(|| {
        let s = self::session(session)?;
        let t = type_id(s, text(ty, "type")?)?;
        let mut rng = seeded_rng(seed);
        let mut lines = String::new();
        for _ in 0..n {
            lines.push_str(&generate_typed(&s.schema, t, size, &mut rng).to_string());
            lines.push('\n');
        }
        emit(out, lines)
    })
}
