//! C interface to the congdist toolkit.
//!
//! Algebras live behind an opaque `CdAlgebra` handle created by
//! [`cd_algebra_from_text`] or [`cd_algebra_from_corpus`] and released with
//! [`cd_algebra_free`]. Every fallible call returns a [`CdStatus`] and writes
//! its result through an out-pointer; on failure the message is available
//! from [`cd_last_error`] on the same thread until the next failing call.
//!
//! Orders are reported as `size_t`, with 0 meaning "no order".

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use congdist::congruence::{congruence_lattice, is_distributive, CongruenceLattice, DEFAULT_MAX_SIZE};
use congdist::lemmas::{check_family, check_trapezoid, jonsson_order_relational, Family, FamilyOptions};
use congdist::terms::find_jonsson_chain;
use congdist::{corpus, io, Error, FiniteAlgebra};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownCorpus = 4,
    SizeBound = 5,
    InvalidArgument = 6,
    Internal = 7,
}

/// An algebra together with its lazily computed congruence lattice.
pub struct CdAlgebra {
    name: String,
    algebra: FiniteAlgebra,
    lattice: OnceLock<CongruenceLattice>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> CdStatus {
    match err {
        Error::Format { .. } | Error::Syntax { .. } | Error::InvalidAlgebra(_) => CdStatus::Parse,
        Error::UnknownCorpus(_) => CdStatus::UnknownCorpus,
        Error::SizeBound { .. } | Error::CapExceeded { .. } => CdStatus::SizeBound,
        _ => CdStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CdStatus, String)>) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CdStatus::Internal
        }
    }
}

fn lib<T>(r: congdist::Result<T>) -> Result<T, (CdStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CdStatus, String) {
    (CdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CdStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const CdAlgebra) -> Result<&'a CdAlgebra, (CdStatus, String)> {
    p.as_ref().ok_or_else(|| null("algebra handle"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (CdStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

impl CdAlgebra {
    fn lattice(&self) -> Result<&CongruenceLattice, (CdStatus, String)> {
        if let Some(lat) = self.lattice.get() {
            return Ok(lat);
        }
        let lat = lib(congruence_lattice(&self.algebra, DEFAULT_MAX_SIZE))?;
        Ok(self.lattice.get_or_init(|| lat))
    }

    fn family(&self, deep: bool) -> Result<Family, (CdStatus, String)> {
        let opts = FamilyOptions {
            deep,
            ..FamilyOptions::default()
        };
        lib(Family::build(&self.name, &self.algebra, opts))
    }
}

fn boxed(name: String, algebra: FiniteAlgebra) -> *mut CdAlgebra {
    Box::into_raw(Box::new(CdAlgebra {
        name,
        algebra,
        lattice: OnceLock::new(),
    }))
}

/// Parses an algebra in the text format (`size N`, then `op NAME ARITY` tables).
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_algebra_from_text(source: *const c_char, out: *mut *mut CdAlgebra) -> CdStatus {
    guard(|| {
        let src = text(source, "source")?;
        let alg = lib(io::parse_algebra(src))?;
        write(out, boxed("algebra".into(), alg))
    })
}

/// Looks up a built-in algebra by name (for example `"median"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_algebra_from_corpus(name: *const c_char, out: *mut *mut CdAlgebra) -> CdStatus {
    guard(|| {
        let name = text(name, "name")?;
        let entry = corpus::lookup(name).ok_or_else(|| {
            let err = Error::UnknownCorpus(name.into());
            (status_of(&err), err.to_string())
        })?;
        write(out, boxed(name.into(), entry.algebra))
    })
}

/// Releases a handle. Passing null is a no-op.
///
/// # Safety
/// `alg` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cd_algebra_free(alg: *mut CdAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_algebra_size(alg: *const CdAlgebra, out: *mut usize) -> CdStatus {
    guard(|| write(out, handle(alg)?.algebra.size()))
}

/// Number of congruences.
///
/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_congruence_count(alg: *const CdAlgebra, out: *mut usize) -> CdStatus {
    guard(|| write(out, handle(alg)?.lattice()?.len()))
}

/// Whether every congruence lattice in the family is distributive. With
/// `deep`, the family is the algebra, its square, its quotients and its free
/// algebra on three generators; otherwise it is the algebra alone.
///
/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_is_distributive(alg: *const CdAlgebra, deep: bool, out: *mut bool) -> CdStatus {
    guard(|| {
        let a = handle(alg)?;
        let holds = if deep {
            a.family(true)?.members.iter().all(|m| is_distributive(&m.lattice).holds)
        } else {
            is_distributive(a.lattice()?).holds
        };
        write(out, holds)
    })
}

/// Trapezoid lemma on every congruence triple of the family.
///
/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_check_trapezoid(alg: *const CdAlgebra, deep: bool, out: *mut bool) -> CdStatus {
    guard(|| {
        let fam = handle(alg)?.family(deep)?;
        write(out, check_family(&fam, "trapezoid", check_trapezoid).holds)
    })
}

/// Least relational Jonsson order up to `max_n`, or 0.
///
/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_relational_order(alg: *const CdAlgebra, max_n: usize, deep: bool, out: *mut usize) -> CdStatus {
    guard(|| {
        let fam = handle(alg)?.family(deep)?;
        let report = lib(jonsson_order_relational(&fam, max_n))?;
        write(out, report.minimal_order.unwrap_or(0))
    })
}

/// Least Jonsson chain order found in the free algebra on three generators,
/// up to `max_n`, or 0.
///
/// # Safety
/// `alg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_chain_order(alg: *const CdAlgebra, max_n: usize, out: *mut usize) -> CdStatus {
    guard(|| {
        let search = lib(find_jonsson_chain(&handle(alg)?.algebra, max_n))?;
        write(out, search.chain().map_or(0, |c| c.order))
    })
}

/// Message of the last failing call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
