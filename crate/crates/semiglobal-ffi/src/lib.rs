//! C ABI over the `semiglobal` core.
//!
//! Every entry point returns an [`SgStatus`]; results are written through out
//! pointers. Contexts are opaque and owned by the caller between
//! [`sg_context_new`] and [`sg_context_free`]. The message for the most recent
//! failure on the calling thread is available from [`sg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semiglobal::action::ProblemContext;
use semiglobal::contour;
use semiglobal::potential::PotentialDef;
use semiglobal::reference;
use semiglobal::wavefunction::{self, Strategy};
use semiglobal::Error;

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    RootFindingFailed = 4,
    BranchAmbiguous = 5,
    QuadratureNoConvergence = 6,
    SectorDegenerate = 7,
    PathBlocked = 8,
    PathInvalid = 9,
    NoIndependentPair = 10,
    GridTooCoarse = 11,
    NormalizationDegenerate = 12,
    AtTurningPoint = 13,
    OutOfWindow = 14,
    BadBoundary = 15,
    IllConditionedFit = 16,
    /// Some grid points failed; their outputs are NaN.
    Partial = 17,
    Panic = 99,
}

impl From<&Error> for SgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => SgStatus::InvalidInput,
            Error::RootFindingFailed(_) => SgStatus::RootFindingFailed,
            Error::BranchAmbiguous { .. } => SgStatus::BranchAmbiguous,
            Error::QuadratureNoConvergence { .. } => SgStatus::QuadratureNoConvergence,
            Error::SectorDegenerate { .. } => SgStatus::SectorDegenerate,
            Error::PathBlocked(_) => SgStatus::PathBlocked,
            Error::PathInvalid(_) => SgStatus::PathInvalid,
            Error::NoIndependentPair(_) => SgStatus::NoIndependentPair,
            Error::GridTooCoarse(_) => SgStatus::GridTooCoarse,
            Error::NormalizationDegenerate => SgStatus::NormalizationDegenerate,
            Error::AtTurningPoint(_) => SgStatus::AtTurningPoint,
            Error::OutOfWindow(_) => SgStatus::OutOfWindow,
            Error::BadBoundary(_) => SgStatus::BadBoundary,
            Error::IllConditionedFit(_) => SgStatus::IllConditionedFit,
        }
    }
}

/// Opaque problem handle: potential, energy and ħ.
pub struct SgContext {
    inner: ProblemContext,
}

/// Normalization applied by [`sg_psi_grid`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgNormalization {
    None = 0,
    MaxAbsOne = 1,
    L2Unit = 2,
    /// Match the outgoing WKB branch at the grid point of largest |p(q)|.
    WkbMatch = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(e: Error) -> SgStatus {
    let s = SgStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null() -> SgStatus {
    set_error("null pointer argument");
    SgStatus::NullPointer
}

fn guard(f: impl FnOnce() -> SgStatus) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SgStatus::Panic
        }
    }
}

/// Create a context from a potential string such as `harmonic:1` or `poly:0,0,0.5`.
///
/// # Safety
/// `potential` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_context_new(potential: *const c_char, energy: f64, hbar: f64, out: *mut *mut SgContext) -> SgStatus {
    guard(|| {
        if potential.is_null() || out.is_null() {
            return null();
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(potential).to_str() else {
            set_error("potential string is not valid UTF-8");
            return SgStatus::InvalidUtf8;
        };
        let built = text
            .parse::<PotentialDef>()
            .and_then(|d| d.spec())
            .and_then(|spec| ProblemContext::new(spec, energy, hbar));
        match built {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SgContext { inner }));
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a context. Null is ignored.
///
/// # Safety
/// `ctx` must come from [`sg_context_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sg_context_free(ctx: *mut SgContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Put the action's anchor at the real turning point nearest `center`.
///
/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn sg_context_set_default_anchor(ctx: *mut SgContext, center: f64) -> SgStatus {
    guard(|| match ctx.as_mut() {
        Some(c) => {
            c.inner.set_default_anchor(center);
            SgStatus::Ok
        }
        None => null(),
    })
}

/// Evaluate ψ at q on an automatically planned contour.
///
/// # Safety
/// `ctx` must be a live context; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_psi(ctx: *const SgContext, q: f64, re: *mut f64, im: *mut f64) -> SgStatus {
    guard(|| {
        let (Some(c), false, false) = (ctx.as_ref(), re.is_null(), im.is_null()) else {
            return null();
        };
        match wavefunction::psi_grid(&c.inner, &[q], &Strategy::AutoPerQ).remove(0) {
            Ok(s) => {
                *re = s.psi.re;
                *im = s.psi.im;
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluate ψ on `n` grid points, normalized by an `SgNormalization` value.
/// Failed points are written as NaN and the call returns `SgStatus::Partial`.
///
/// # Safety
/// `q`, `re` and `im` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_psi_grid(
    ctx: *const SgContext,
    q: *const f64,
    n: usize,
    normalization: u32,
    re: *mut f64,
    im: *mut f64,
) -> SgStatus {
    guard(|| {
        let Some(c) = ctx.as_ref() else { return null() };
        let normalization = match normalization {
            0 => SgNormalization::None,
            1 => SgNormalization::MaxAbsOne,
            2 => SgNormalization::L2Unit,
            3 => SgNormalization::WkbMatch,
            other => {
                set_error(format!("unknown normalization {other}"));
                return SgStatus::InvalidInput;
            }
        };
        if n == 0 {
            return SgStatus::Ok;
        }
        if q.is_null() || re.is_null() || im.is_null() {
            return null();
        }
        let grid = std::slice::from_raw_parts(q, n);
        let (re, im) = (std::slice::from_raw_parts_mut(re, n), std::slice::from_raw_parts_mut(im, n));
        let results = wavefunction::psi_grid(&c.inner, grid, &Strategy::AutoPerQ);
        let mut first_err = None;
        let mut ok = Vec::with_capacity(n);
        let mut slots = Vec::with_capacity(n);
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(s) => {
                    ok.push(s);
                    slots.push(i);
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                    re[i] = f64::NAN;
                    im[i] = f64::NAN;
                }
            }
        }
        let convention = match normalization {
            SgNormalization::None => None,
            SgNormalization::MaxAbsOne => Some(wavefunction::Normalization::MaxAbsOne),
            SgNormalization::L2Unit => Some(wavefunction::Normalization::L2Unit),
            SgNormalization::WkbMatch => wavefunction::default_reference_point(&c.inner, grid)
                .map(|q_ref| wavefunction::Normalization::WkbMatch { q_ref, branch: 1 }),
        };
        if let Some(conv) = convention {
            if let Err(e) = wavefunction::normalize(&c.inner, &mut ok, conv) {
                return fail(e);
            }
        }
        for (s, i) in ok.iter().zip(slots) {
            re[i] = s.psi.re;
            im[i] = s.psi.im;
        }
        match first_err {
            None => SgStatus::Ok,
            Some(e) => {
                set_error(e.to_string());
                SgStatus::Partial
            }
        }
    })
}

/// Number of asymptotic decay sectors of the integrand at q.
///
/// # Safety
/// `ctx` must be a live context and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_sector_count(ctx: *const SgContext, q: f64, count: *mut usize) -> SgStatus {
    guard(|| {
        let (Some(c), false) = (ctx.as_ref(), count.is_null()) else { return null() };
        let radius = contour::default_scan_radius(&c.inner, q);
        match contour::scan_sectors(&c.inner, q, radius, 720) {
            Ok(map) => {
                *count = map.sectors.len();
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Airy function Ai(x) and its derivative.
///
/// # Safety
/// `ai` and `aip` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_airy(x: f64, ai: *mut f64, aip: *mut f64) -> SgStatus {
    guard(|| {
        if ai.is_null() || aip.is_null() {
            return null();
        }
        match reference::airy(x) {
            Ok((a, b)) => {
                *ai = a;
                *aip = b;
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Pearcey integral ∫ exp(i(t⁴ + x t² + y t)) dt.
///
/// # Safety
/// `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_pearcey(x: f64, y: f64, re: *mut f64, im: *mut f64) -> SgStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return null();
        }
        match reference::pearcey(x, y) {
            Ok(p) => {
                *re = p.re;
                *im = p.im;
                SgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null with `len` zero.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Static name of a status code; unknown codes give "unknown".
#[no_mangle]
pub extern "C" fn sg_status_name(status: i32) -> *const c_char {
    use SgStatus::*;
    let known = [
        Ok, NullPointer, InvalidUtf8, InvalidInput, RootFindingFailed, BranchAmbiguous, QuadratureNoConvergence,
        SectorDegenerate, PathBlocked, PathInvalid, NoIndependentPair, GridTooCoarse, NormalizationDegenerate,
        AtTurningPoint, OutOfWindow, BadBoundary, IllConditionedFit, Partial, Panic,
    ];
    let Some(&status) = known.iter().find(|s| **s as i32 == status) else {
        return c"unknown".as_ptr();
    };
    let s: &'static CStr = match status {
        SgStatus::Ok => c"ok",
        SgStatus::NullPointer => c"null pointer",
        SgStatus::InvalidUtf8 => c"invalid utf-8",
        SgStatus::InvalidInput => c"invalid input",
        SgStatus::RootFindingFailed => c"root finding failed",
        SgStatus::BranchAmbiguous => c"branch ambiguous",
        SgStatus::QuadratureNoConvergence => c"quadrature did not converge",
        SgStatus::SectorDegenerate => c"sector degenerate",
        SgStatus::PathBlocked => c"path blocked",
        SgStatus::PathInvalid => c"path invalid",
        SgStatus::NoIndependentPair => c"no independent pair",
        SgStatus::GridTooCoarse => c"grid too coarse",
        SgStatus::NormalizationDegenerate => c"normalization degenerate",
        SgStatus::AtTurningPoint => c"at turning point",
        SgStatus::OutOfWindow => c"out of window",
        SgStatus::BadBoundary => c"bad boundary",
        SgStatus::IllConditionedFit => c"ill-conditioned fit",
        SgStatus::Partial => c"partial",
        SgStatus::Panic => c"panic",
    };
    s.as_ptr()
}
