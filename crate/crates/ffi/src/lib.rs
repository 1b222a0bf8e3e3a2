//! C ABI over the isospec toolkit.
//!
//! Curves and circles are opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns an
//! [`IsospecStatus`]; on failure the message is available from
//! [`isospec_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use isospec::billiard::{billiard_map, PhasePoint};
use isospec::geometry::{make_circle, make_ellipse, BoundaryCurve, DomainSpec};
use isospec::quasi::{evaluate_mu, solve_recursion, BirkhoffData};
use isospec::radon::{torus_invariant, BoundaryFunction};
use isospec::tori::{action_data, circle_conjugacy_with, diophantine_kappa, disk_circle, ConjugacyOptions, InvariantCircle};
use isospec::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsospecStatus {
    Ok = 0,
    NullPointer = 1,
    /// The request is outside the operation's domain.
    InvalidArgument = 2,
    /// A well-posed computation failed to converge.
    NumericalFailure = 3,
    Panic = 4,
}

/// Boundary curve handle.
pub struct IsospecCurve {
    curve: BoundaryCurve,
}

/// Invariant circle handle; remembers nothing about its curve.
pub struct IsospecCircle {
    circle: InvariantCircle,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsospecAction {
    pub i0: f64,
    pub l0: f64,
    pub grad_l: f64,
    pub a_avg: f64,
    /// L0 − I0·gradL − A_avg
    pub identity_gap: f64,
}

/// Normal-form data of one circle. `higher_jets` may be NULL when
/// `n_jets` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsospecBirkhoff {
    pub i0: f64,
    pub omega: f64,
    pub l0: f64,
    pub hess_l: f64,
    pub higher_jets: *const f64,
    pub n_jets: usize,
    pub maslov_theta0: i64,
    pub maslov_theta: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> IsospecStatus {
    set_error(e.to_string());
    match e.kind() {
        ErrorKind::Validation => IsospecStatus::InvalidArgument,
        ErrorKind::Numerical => IsospecStatus::NumericalFailure,
    }
}

fn null(what: &str) -> IsospecStatus {
    set_error(format!("null pointer: {what}"));
    IsospecStatus::NullPointer
}

fn guard<F: FnOnce() -> IsospecStatus>(f: F) -> IsospecStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic".into());
        IsospecStatus::Panic
    })
}

fn boxed<T>(v: T, out: *mut *mut T) -> IsospecStatus {
    // SAFETY: callers check `out` for null before reaching here.
    unsafe { *out = Box::into_raw(Box::new(v)) };
    IsospecStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isospec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn isospec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a curve from a domain spec such as `{"type":"ellipse","a":2,"b":1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_from_json(json: *const c_char, out: *mut *mut IsospecCurve) -> IsospecStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(e) => return fail(Error::Parse(e.to_string())),
        };
        let spec: DomainSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(Error::Parse(e.to_string())),
        };
        match spec.build() {
            Ok(d) => boxed(IsospecCurve { curve: d.curve }, out),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_circle(r: f64, out: *mut *mut IsospecCurve) -> IsospecStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match make_circle(r) {
            Ok(curve) => boxed(IsospecCurve { curve }, out),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_ellipse(a: f64, b: f64, out: *mut *mut IsospecCurve) -> IsospecStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match make_ellipse(a, b) {
            Ok(curve) => boxed(IsospecCurve { curve }, out),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `curve` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_free(curve: *mut IsospecCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_total_length(curve: *const IsospecCurve, out: *mut f64) -> IsospecStatus {
    guard(|| {
        let (Some(c), false) = (curve.as_ref(), out.is_null()) else {
            return null("curve or out");
        };
        *out = c.curve.total_length();
        IsospecStatus::Ok
    })
}

/// Boundary point at arclength s.
///
/// # Safety
/// `curve` must be a live handle; `x` and `y` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_curve_position(curve: *const IsospecCurve, s: f64, x: *mut f64, y: *mut f64) -> IsospecStatus {
    guard(|| {
        let (Some(c), false) = (curve.as_ref(), x.is_null() || y.is_null()) else {
            return null("curve, x or y");
        };
        let p = c.curve.position(s);
        *x = p.x;
        *y = p.y;
        IsospecStatus::Ok
    })
}

/// One reflection (s, ξ) ↦ (s', ξ'); `chord_length` may be NULL.
///
/// # Safety
/// `curve` must be a live handle; `s_out` and `xi_out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_billiard_map(
    curve: *const IsospecCurve,
    s: f64,
    xi: f64,
    s_out: *mut f64,
    xi_out: *mut f64,
    chord_length: *mut f64,
) -> IsospecStatus {
    guard(|| {
        let (Some(c), false) = (curve.as_ref(), s_out.is_null() || xi_out.is_null()) else {
            return null("curve, s_out or xi_out");
        };
        match billiard_map(&c.curve, PhasePoint::new(s, xi)) {
            Ok((p, chord)) => {
                *s_out = p.s;
                *xi_out = p.xi;
                if !chord_length.is_null() {
                    *chord_length = chord.length;
                }
                IsospecStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Invariant circle of B^period through (s, ξ) with `n_modes` Fourier modes.
/// Disks use the closed form when period is 1.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_circle_fit(
    curve: *const IsospecCurve,
    s: f64,
    xi: f64,
    n_modes: usize,
    period: usize,
    out: *mut *mut IsospecCircle,
) -> IsospecStatus {
    guard(|| {
        let (Some(c), false) = (curve.as_ref(), out.is_null()) else {
            return null("curve or out");
        };
        let fitted = if c.curve.is_circle() && period == 1 {
            disk_circle(&c.curve, xi)
        } else {
            let opts = ConjugacyOptions { n_modes, period, ..Default::default() };
            circle_conjugacy_with(&c.curve, PhasePoint::new(s, xi), &opts)
        };
        match fitted {
            Ok(circle) => boxed(IsospecCircle { circle }, out),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `circle` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn isospec_circle_free(circle: *mut IsospecCircle) {
    if !circle.is_null() {
        drop(Box::from_raw(circle));
    }
}

/// Orbit rotation number ρ ∈ [0, 1).
///
/// # Safety
/// `circle` must be a live handle and `rho` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_circle_rotation(circle: *const IsospecCircle, rho: *mut f64) -> IsospecStatus {
    guard(|| {
        let (Some(c), false) = (circle.as_ref(), rho.is_null()) else {
            return null("circle or rho");
        };
        *rho = c.circle.rho();
        IsospecStatus::Ok
    })
}

/// # Safety
/// `curve` and `circle` must be live handles, the circle fitted on the curve;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_circle_action(
    curve: *const IsospecCurve,
    circle: *const IsospecCircle,
    out: *mut IsospecAction,
) -> IsospecStatus {
    guard(|| {
        let (Some(cu), Some(ci), false) = (curve.as_ref(), circle.as_ref(), out.is_null()) else {
            return null("curve, circle or out");
        };
        match action_data(&cu.curve, &ci.circle) {
            Ok(a) => {
                *out = IsospecAction { i0: a.i0, l0: a.l0, grad_l: a.grad_l, a_avg: a.a_avg, identity_gap: a.identity_gap };
                IsospecStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// ∫_Λ K/sinθ dμ for K(t) = Σ_n cos_coeffs[n] cos(nt) + sin_coeffs[n] sin(nt)
/// in the curve parameter t. `sin_coeffs` may be NULL.
///
/// # Safety
/// Handles must be live; `cos_coeffs` (and `sin_coeffs` when non-NULL) must
/// hold `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_torus_invariant(
    curve: *const IsospecCurve,
    circle: *const IsospecCircle,
    cos_coeffs: *const f64,
    sin_coeffs: *const f64,
    n: usize,
    out: *mut f64,
) -> IsospecStatus {
    guard(|| {
        let (Some(cu), Some(ci), false) = (curve.as_ref(), circle.as_ref(), out.is_null() || (cos_coeffs.is_null() && n > 0)) else {
            return null("curve, circle, cos_coeffs or out");
        };
        let a: Vec<f64> = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(cos_coeffs, n).to_vec() };
        let b: Vec<f64> = if sin_coeffs.is_null() || n == 0 { vec![0.0; n] } else { std::slice::from_raw_parts(sin_coeffs, n).to_vec() };
        let k = BoundaryFunction::in_param(&cu.curve, move |t| {
            a.iter().zip(&b).enumerate().map(|(j, (c, s))| {
                let (sn, cs) = (j as f64 * t).sin_cos();
                c * cs + s * sn
            }).sum()
        });
        match torus_invariant(std::slice::from_ref(&ci.circle), &k) {
            Ok(v) => {
                *out = v.value;
                IsospecStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Witnessed Diophantine constant κ̂ over 0 < |k| ≤ k_max.
///
/// # Safety
/// `omega` must hold `dim` doubles and `kappa` be writable.
#[no_mangle]
pub unsafe extern "C" fn isospec_diophantine_kappa(omega: *const f64, dim: usize, tau: f64, k_max: u32, kappa: *mut f64) -> IsospecStatus {
    guard(|| {
        if omega.is_null() || kappa.is_null() {
            return null("omega or kappa");
        }
        match diophantine_kappa(std::slice::from_raw_parts(omega, dim), tau, k_max) {
            Ok(w) => {
                *kappa = w.kappa_hat;
                IsospecStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Quasi-eigenvalue recursion of order M for q = (k, k_n). Writes c_0..c_M
/// into `c_out` (M + 1 doubles), b_0..b_{M+1} into `b_out` (M + 2 doubles,
/// may be NULL) and μ_q into `mu_out`.
///
/// # Safety
/// `data` must be valid with `higher_jets` holding `n_jets` doubles; output
/// buffers must have the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn isospec_quasi_recursion(
    data: *const IsospecBirkhoff,
    k: i64,
    k_n: i64,
    mu0: f64,
    order: usize,
    c_out: *mut f64,
    b_out: *mut f64,
    mu_out: *mut f64,
) -> IsospecStatus {
    guard(|| {
        let (Some(d), false) = (data.as_ref(), c_out.is_null() || mu_out.is_null()) else {
            return null("data, c_out or mu_out");
        };
        if d.n_jets > 0 && d.higher_jets.is_null() {
            return null("higher_jets");
        }
        let jets = if d.n_jets == 0 { Vec::new() } else { std::slice::from_raw_parts(d.higher_jets, d.n_jets).to_vec() };
        let bd = BirkhoffData {
            i0: d.i0,
            omega: d.omega,
            l0: d.l0,
            hess_l: d.hess_l,
            higher_jets: jets,
            maslov_theta0: d.maslov_theta0,
            maslov_theta: d.maslov_theta,
            birkhoff_p: Vec::new(),
        };
        match solve_recursion(&bd, (k, k_n), mu0, order) {
            Ok(qe) => {
                std::slice::from_raw_parts_mut(c_out, qe.c.len()).copy_from_slice(&qe.c);
                if !b_out.is_null() {
                    std::slice::from_raw_parts_mut(b_out, qe.b.len()).copy_from_slice(&qe.b);
                }
                *mu_out = evaluate_mu(&qe, &[]).0;
                IsospecStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
