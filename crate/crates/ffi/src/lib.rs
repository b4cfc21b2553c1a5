//! C ABI over `res112`.
//!
//! Every entry point returns a [`Res112Status`]. On failure the message is
//! kept per thread and can be fetched with [`res112_last_error`]. Models are
//! opaque handles created by [`res112_model_new`] and released by
//! [`res112_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use res112::bifurcations::instability_interval;
use res112::critical_values::{classify_fiber, ComponentKind};
use res112::error::Error;
use res112::model::{detuning_lambda, CasimirValues, ModelParams};
use res112::monodromy::{generator_vector, Generator, MonodromyConfig};
use res112::reduced_dynamics::{h_min, ReducedParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Res112Status {
    Ok = 0,
    NullPointer = 1,
    Invalid = 2,
    Unsupported = 3,
    Numerical = 4,
    Panic = 5,
}

/// Component kinds, in the order used by the count array of
/// [`res112_fiber_counts`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Res112Component {
    Point = 0,
    Circle = 1,
    Torus2 = 2,
    Torus3 = 3,
    PinchedTorusTimesT1 = 4,
    FigureEightTimesT2 = 5,
    CuspPinchedT3 = 6,
}

/// Length of the count array filled by [`res112_fiber_counts`].
pub const RES112_COMPONENT_KINDS: usize = 7;

impl From<ComponentKind> for Res112Component {
    fn from(k: ComponentKind) -> Self {
        match k {
            ComponentKind::Point => Res112Component::Point,
            ComponentKind::Circle => Res112Component::Circle,
            ComponentKind::Torus2 => Res112Component::Torus2,
            ComponentKind::Torus3 => Res112Component::Torus3,
            ComponentKind::PinchedTorusTimesT1 => Res112Component::PinchedTorusTimesT1,
            ComponentKind::FigureEightTimesT2 => Res112Component::FigureEightTimesT2,
            ComponentKind::CuspPinchedT3 => Res112Component::CuspPinchedT3,
        }
    }
}

/// Opaque model handle.
pub struct Res112Model {
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Res112Status {
    match e {
        Error::Unsupported(_) => Res112Status::Unsupported,
        e if e.is_validation() => Res112Status::Invalid,
        _ => Res112Status::Numerical,
    }
}

/// Runs `f`, recording errors and containing panics.
fn guard<F: FnOnce() -> Result<(), (Res112Status, String)>>(f: F) -> Res112Status {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Res112Status::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            Res112Status::Panic
        }
    }
}

fn lib(e: Error) -> (Res112Status, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (Res112Status, String) {
    (Res112Status::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(m: *const Res112Model) -> Result<&'a Res112Model, (Res112Status, String)> {
    // SAFETY: the caller passes a handle from res112_model_new or null.
    unsafe { m.as_ref() }.ok_or_else(|| null("model"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn res112_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the length the full message needs, including
/// the NUL, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn res112_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            // SAFETY: buf holds len bytes and n <= len.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// Creates a model with detuning λ = delta + lambda1·μ + lambda2·ℓ and
/// quadratic coefficient `kappa`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn res112_model_new(
    delta: f64,
    kappa: f64,
    lambda1: f64,
    lambda2: f64,
    out: *mut *mut Res112Model,
) -> Res112Status {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams { delta, kappa, lambda1, lambda2, ..Default::default() };
        params.validate().map_err(lib)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(Res112Model { params })) };
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`res112_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn res112_model_free(model: *mut Res112Model) {
    if !model.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Detuning λ at (μ, ℓ).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn res112_detuning(model: *const Res112Model, mu: f64, ell: f64, out: *mut f64) -> Res112Status {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        unsafe { *out = detuning_lambda(&m.params, CasimirValues::new(mu, ell)) };
        Ok(())
    })
}

fn reduced(m: &Res112Model, cas: CasimirValues) -> ReducedParams {
    ReducedParams::new(detuning_lambda(&m.params, cas), m.params.kappa)
}

/// Minimum of the reduced Hamiltonian over the reduced space at (μ, ℓ).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn res112_h_min(model: *const Res112Model, mu: f64, ell: f64, out: *mut f64) -> Res112Status {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cas = CasimirValues::new(mu, ell);
        let v = h_min(cas, reduced(m, cas)).map_err(lib)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Counts the fiber components over (μ, ℓ, h) by kind. `counts` receives
/// [`RES112_COMPONENT_KINDS`] entries indexed by [`Res112Component`];
/// `flagged` (optional) is set when a root sits in the ambiguity band.
///
/// # Safety
/// `model` must be a live handle, `counts` must hold
/// [`RES112_COMPONENT_KINDS`] writable entries, `flagged` null or writable.
#[no_mangle]
pub unsafe extern "C" fn res112_fiber_counts(
    model: *const Res112Model,
    mu: f64,
    ell: f64,
    h: f64,
    counts: *mut u32,
    flagged: *mut bool,
) -> Res112Status {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if counts.is_null() {
            return Err(null("counts"));
        }
        let cas = CasimirValues::new(mu, ell);
        let rep = classify_fiber(cas, reduced(m, cas), h).map_err(lib)?;
        let mut out = [0u32; RES112_COMPONENT_KINDS];
        for (k, n) in rep.multiset() {
            out[Res112Component::from(k) as usize] = n as u32;
        }
        unsafe {
            std::ptr::copy_nonoverlapping(out.as_ptr(), counts, RES112_COMPONENT_KINDS);
            if !flagged.is_null() {
                *flagged = rep.flag.is_some();
            }
        }
        Ok(())
    })
}

/// Interval (lo, hi) of detunings λ where the tip at (μ, ℓ) is an unstable
/// equilibrium. `exists` is false for a smooth tip, and lo/hi are then left
/// untouched.
///
/// # Safety
/// `lo`, `hi` and `exists` must be writable.
#[no_mangle]
pub unsafe extern "C" fn res112_instability_interval(
    kappa: f64,
    mu: f64,
    ell: f64,
    lo: *mut f64,
    hi: *mut f64,
    exists: *mut bool,
) -> Res112Status {
    guard(|| {
        if lo.is_null() || hi.is_null() || exists.is_null() {
            return Err(null("output pointer"));
        }
        let iv = instability_interval(CasimirValues::new(mu, ell), kappa).map_err(lib)?;
        unsafe {
            *exists = iv.is_some();
            if let Some(iv) = iv {
                *lo = iv.lo.lambda;
                *hi = iv.hi.lambda;
            }
        }
        Ok(())
    })
}

/// Monodromy vector (m_N, m_J) along generator `generator` (1, 2 or 3),
/// sampled at `points` loop points.
///
/// # Safety
/// `model` must be a live handle, `m_n` and `m_j` writable.
#[no_mangle]
pub unsafe extern "C" fn res112_monodromy_generator(
    model: *const Res112Model,
    generator: u32,
    points: u32,
    m_n: *mut i64,
    m_j: *mut i64,
) -> Res112Status {
    guard(|| {
        let m = unsafe { model_ref(model) }?;
        if m_n.is_null() || m_j.is_null() {
            return Err(null("output pointer"));
        }
        let g = match generator {
            1 => Generator::Gamma1,
            2 => Generator::Gamma2,
            3 => Generator::Gamma3,
            _ => return Err((Res112Status::Invalid, format!("no generator {generator}"))),
        };
        let (_, w) =
            generator_vector(g, &m.params, points as usize, &MonodromyConfig::default()).map_err(lib)?;
        unsafe {
            *m_n = w.vector.m_n;
            *m_j = w.vector.m_j;
        }
        Ok(())
    })
}
