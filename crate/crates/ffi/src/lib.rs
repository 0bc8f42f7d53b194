//! C ABI over `snspm-core`.
//!
//! Every function returns an [`SnspmStatus`]. On failure the message is
//! available from [`snspm_last_error_message`] on the same thread until the
//! next failing call. Parameter sets are opaque [`SnspmParams`] handles owned
//! by the caller and released with [`snspm_params_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use snspm_core::entropy::{binary_entropy, Probability};
use snspm_core::error::Error;
use snspm_core::params::ProtocolParams;
use snspm_core::povm::Regime;
use snspm_core::rates::Variant;
use snspm_core::{attack, mc, presets, rates, sweep};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnspmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed input: bad JSON, unknown preset, variant or override key.
    Config = 3,
    /// A parameter outside its allowed range.
    Domain = 4,
    /// The evaluation itself failed (no sign change, singular operator, ...).
    Numerical = 5,
    Panic = 6,
}

/// Opaque parameter set.
pub struct SnspmParams {
    inner: ProtocolParams,
}

/// One evaluated point of a key-rate curve. `e_signal` is NaN when no
/// conclusive events occur.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SnspmRatePoint {
    pub distance_km: f64,
    pub rate: f64,
    pub e_signal: f64,
    pub chi: f64,
    pub p_conclusive: f64,
    pub p_sns: f64,
    pub p_ss: f64,
    pub p_nn: f64,
}

/// Distinguishing-attack comparison at one distance. `ratio` is NaN when the
/// baseline error rate is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SnspmAttackReport {
    pub distance_km: f64,
    pub e_distinguish: f64,
    pub e_baseline: f64,
    pub ratio: f64,
    pub detectable: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SnspmMcSummary {
    pub rounds: u64,
    pub sns: u64,
    pub ss: u64,
    pub nn: u64,
    pub conclusive: u64,
    pub correlated: u64,
    pub p_conclusive: f64,
    pub correlation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(SnspmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) => SnspmStatus::Config,
            e if e.is_domain() => SnspmStatus::Domain,
            _ => SnspmStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SnspmStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SnspmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SnspmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SnspmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            SnspmStatus::InvalidUtf8,
            format!("`{what}` is not valid UTF-8"),
        )
    })
}

unsafe fn params_arg<'a>(p: *const SnspmParams) -> Result<&'a ProtocolParams, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("params"))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn handle(inner: ProtocolParams) -> *mut SnspmParams {
    Box::into_raw(Box::new(SnspmParams { inner }))
}

/// Parses a JSON parameter set into a new handle written to `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn snspm_params_from_json(
    json: *const c_char,
    out: *mut *mut SnspmParams,
) -> SnspmStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let params = ProtocolParams::from_json(text)?;
        write_out(out, handle(params), "out")
    })
}

/// Creates a handle holding the parameters of a named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn snspm_params_preset(
    name: *const c_char,
    out: *mut *mut SnspmParams,
) -> SnspmStatus {
    guard(|| {
        let preset = presets::find(str_arg(name, "name")?)?;
        write_out(out, handle(preset.params), "out")
    })
}

/// Applies a `key=value` override. On failure the handle is left unchanged.
///
/// # Safety
/// `params` must come from this library and `assignment` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn snspm_params_override(
    params: *mut SnspmParams,
    assignment: *const c_char,
) -> SnspmStatus {
    guard(|| {
        let assignment = str_arg(assignment, "assignment")?;
        let params = params.as_mut().ok_or_else(|| null("params"))?;
        params.inner.apply_override(assignment)?;
        Ok(())
    })
}

/// Serializes the parameter set as JSON. Free the string with
/// [`snspm_string_free`].
///
/// # Safety
/// `params` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn snspm_params_to_json(
    params: *const SnspmParams,
    out: *mut *mut c_char,
) -> SnspmStatus {
    guard(|| {
        let json = params_arg(params)?.to_json();
        let c = CString::new(json).map_err(|e| Failure(SnspmStatus::Numerical, e.to_string()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn snspm_params_free(params: *mut SnspmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn snspm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn variant_arg(p: *const c_char) -> Result<Variant, Failure> {
    Ok(str_arg(p, "variant")?.parse::<Variant>()?)
}

/// Evaluates one rate variant (`loss`, `loss_rand`, `real`, `real_aopp`,
/// `rand`, `rand_aopp`) at distance `distance_km`.
///
/// # Safety
/// Pointers must be valid; `variant` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn snspm_rate(
    params: *const SnspmParams,
    variant: *const c_char,
    distance_km: f64,
    out: *mut SnspmRatePoint,
) -> SnspmStatus {
    guard(|| {
        let p = params_arg(params)?.with_distance(distance_km);
        let point = rates::rate_point(&p, variant_arg(variant)?)?;
        let value = SnspmRatePoint {
            distance_km: point.distance_km,
            rate: point.rate,
            e_signal: point.e_signal.unwrap_or(f64::NAN),
            chi: point.chi,
            p_conclusive: point.p_conclusive,
            p_sns: point.p_sns,
            p_ss: point.p_ss,
            p_nn: point.p_nn,
        };
        write_out(out, value, "out")
    })
}

/// Largest distance in `[lo, hi]` with a positive key rate, to 1e-3 km.
///
/// # Safety
/// Pointers must be valid; `variant` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn snspm_max_distance(
    params: *const SnspmParams,
    variant: *const c_char,
    lo: f64,
    hi: f64,
    out_km: *mut f64,
) -> SnspmStatus {
    guard(|| {
        let km = sweep::max_distance(params_arg(params)?, variant_arg(variant)?, lo, hi)?;
        write_out(out_km, km, "out_km")
    })
}

/// Compares the distinguishing attack with the signal error rate at
/// `distance_km`. `realistic` selects the imperfect-device model.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn snspm_attack(
    params: *const SnspmParams,
    realistic: bool,
    distance_km: f64,
    out: *mut SnspmAttackReport,
) -> SnspmStatus {
    guard(|| {
        let regime = if realistic {
            Regime::Realistic
        } else {
            Regime::Ideal
        };
        let p = params_arg(params)?.with_distance(distance_km);
        let r = attack::attack_report(&p, regime)?;
        let value = SnspmAttackReport {
            distance_km: r.distance_km,
            e_distinguish: r.e_distinguish,
            e_baseline: r.e_baseline,
            ratio: r.ratio.unwrap_or(f64::NAN),
            detectable: r.detectable(),
        };
        write_out(out, value, "out")
    })
}

/// Seeded Monte Carlo of the loss-only protocol.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn snspm_mc_simulate(
    mu: f64,
    epsilon: f64,
    eta: f64,
    rounds: u64,
    seed: u64,
    out: *mut SnspmMcSummary,
) -> SnspmStatus {
    guard(|| {
        let s = mc::simulate(mu, epsilon, eta, rounds, seed)?;
        let value = SnspmMcSummary {
            rounds: s.rounds,
            sns: s.sns,
            ss: s.ss,
            nn: s.nn,
            conclusive: s.conclusive,
            correlated: s.correlated,
            p_conclusive: s.p_conclusive(),
            correlation: s.correlation(),
        };
        write_out(out, value, "out")
    })
}

/// Binary Shannon entropy in bits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn snspm_binary_entropy(p: f64, out: *mut f64) -> SnspmStatus {
    guard(|| {
        let h = binary_entropy(Probability::new(p)?);
        write_out(out, h, "out")
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn snspm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn snspm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
