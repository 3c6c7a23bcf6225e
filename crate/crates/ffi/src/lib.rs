//! C ABI over the `eit-memory` library.
//!
//! Objects are opaque heap handles created by `eit_*_new`-style functions and
//! released with the matching `eit_*_free`. Every fallible call returns an
//! [`EitStatus`]; on failure a description is available from
//! [`eit_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eit_memory::storage::{bipartite_store, negativity, CycleSpec, MatchingMode};
use eit_memory::{
    dark_amplitude, full_cycle, matched_schedule, state_fidelity, ControlSchedule, Error,
    FockStateMatrix, PulseEnvelope, SystemParams, TimeGrid,
};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The pulse cannot be impedance matched.
    Unmatchable = 3,
    /// Other physically infeasible request (truncation, step or bath guards).
    Infeasible = 4,
    InvalidState = 5,
    /// Output buffer too small.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Physical constants, in units of the cavity decay rate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EitParams {
    pub gamma: f64,
    pub g_sqrt_n: f64,
    pub gamma_a: f64,
    pub gamma_0: f64,
}

/// Summary of one memory cycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EitCycleReport {
    pub d_in: f64,
    pub d_out: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub released_norm: f64,
}

/// Opaque single-photon envelope.
pub struct EitEnvelope(PulseEnvelope);

/// Opaque control schedule cos θ(t).
pub struct EitSchedule(ControlSchedule);

/// Opaque density matrix in the photon-number basis.
pub struct EitState(FockStateMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(EitStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Unmatchable { .. } => EitStatus::Unmatchable,
            Error::InvalidState(_) | Error::Unnormalized { .. } => EitStatus::InvalidState,
            e if e.is_infeasible() => EitStatus::Infeasible,
            _ => EitStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EitStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            EitStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            EitStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes either null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    // SAFETY: `out` is non-null and writable per the caller contract.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: as above.
    unsafe { *out = value };
    Ok(())
}

fn params_from(p: &EitParams) -> Result<SystemParams, Failure> {
    let params = SystemParams {
        gamma: p.gamma,
        g_sqrt_n: p.g_sqrt_n,
        gamma_a: p.gamma_a,
        gamma_0: p.gamma_0,
        ..SystemParams::default()
    };
    params.validate()?;
    Ok(params)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn eit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn eit_params_default() -> EitParams {
    let p = SystemParams::default();
    EitParams {
        gamma: p.gamma,
        g_sqrt_n: p.g_sqrt_n,
        gamma_a: p.gamma_a,
        gamma_0: p.gamma_0,
    }
}

/// Normalized sech pulse `sech((t − center)/width)` on `len` samples from `t0`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn eit_envelope_sech(
    width: f64,
    center: f64,
    t0: f64,
    dt: f64,
    len: usize,
    out: *mut *mut EitEnvelope,
) -> EitStatus {
    guard(|| {
        let grid = TimeGrid::new(t0, dt, len)?;
        let h = PulseEnvelope::sech(width, center, grid)?;
        unsafe { put(out, EitEnvelope(h)) }
    })
}

/// Envelope from `len` samples; `im` may be null for a real pulse. The
/// samples are normalized to unit energy.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_envelope_from_samples(
    t0: f64,
    dt: f64,
    len: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut EitEnvelope,
) -> EitStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let grid = TimeGrid::new(t0, dt, len)?;
        // SAFETY: caller guarantees `len` readable values.
        let re = unsafe { std::slice::from_raw_parts(re, len) };
        let im = if im.is_null() {
            None
        } else {
            Some(unsafe { std::slice::from_raw_parts(im, len) })
        };
        let samples = (0..len)
            .map(|i| Complex64::new(re[i], im.map_or(0.0, |v| v[i])))
            .collect();
        let h = PulseEnvelope::new(grid, samples)?.normalized()?;
        unsafe { put(out, EitEnvelope(h)) }
    })
}

/// # Safety
/// `h` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eit_envelope_len(h: *const EitEnvelope) -> usize {
    unsafe { h.as_ref() }.map_or(0, |h| h.0.len())
}

/// Copy the samples into `re` and `im` (each of capacity `cap`).
///
/// # Safety
/// `re` and `im` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eit_envelope_samples(
    h: *const EitEnvelope,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> EitStatus {
    guard(|| {
        let h = unsafe { borrow(h, "envelope") }?;
        if re.is_null() || im.is_null() {
            return Err(null("sample buffer"));
        }
        let s = h.0.samples();
        if cap < s.len() {
            return Err(Failure(
                EitStatus::BufferTooSmall,
                format!("need {} samples, buffer holds {cap}", s.len()),
            ));
        }
        for (i, z) in s.iter().enumerate() {
            // SAFETY: i < len <= cap.
            unsafe {
                *re.add(i) = z.re;
                *im.add(i) = z.im;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eit_envelope_free(h: *mut EitEnvelope) {
    if !h.is_null() {
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Impedance-matched schedule for envelope `h`. Fails with
/// `EIT_STATUS_UNMATCHABLE` when the pulse is faster than the cavity.
///
/// # Safety
/// Pointers must be valid handles / structs; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_matched_schedule(
    h: *const EitEnvelope,
    params: *const EitParams,
    out: *mut *mut EitSchedule,
) -> EitStatus {
    guard(|| {
        let h = unsafe { borrow(h, "envelope") }?;
        let params = params_from(unsafe { borrow(params, "params") }?)?;
        let s = matched_schedule(&h.0, &params)?;
        unsafe { put(out, EitSchedule(s)) }
    })
}

/// # Safety
/// `s` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eit_schedule_len(s: *const EitSchedule) -> usize {
    unsafe { s.as_ref() }.map_or(0, |s| s.0.cos_theta().len())
}

/// # Safety
/// `out` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn eit_schedule_cos_theta(
    s: *const EitSchedule,
    out: *mut f64,
    cap: usize,
) -> EitStatus {
    guard(|| {
        let s = unsafe { borrow(s, "schedule") }?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let c = s.0.cos_theta();
        if cap < c.len() {
            return Err(Failure(
                EitStatus::BufferTooSmall,
                format!("need {} samples, buffer holds {cap}", c.len()),
            ));
        }
        // SAFETY: c.len() <= cap writable doubles.
        unsafe { ptr::copy_nonoverlapping(c.as_ptr(), out, c.len()) };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eit_schedule_free(s: *mut EitSchedule) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Final dark amplitude after driving with `h` under schedule `s`.
///
/// # Safety
/// Handles must be valid; `d_re` and `d_im` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_capture_amplitude(
    h: *const EitEnvelope,
    s: *const EitSchedule,
    params: *const EitParams,
    d_re: *mut f64,
    d_im: *mut f64,
) -> EitStatus {
    guard(|| {
        let h = unsafe { borrow(h, "envelope") }?;
        let s = unsafe { borrow(s, "schedule") }?;
        let params = params_from(unsafe { borrow(params, "params") }?)?;
        let d = dark_amplitude(&h.0, &s.0, &params)?.final_value();
        unsafe {
            write(d_re, d.re, "d_re")?;
            write(d_im, d.im, "d_im")
        }
    })
}

/// Fock state `|n⟩` with cutoff `dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_state_fock(n: usize, dim: usize, out: *mut *mut EitState) -> EitStatus {
    guard(|| {
        let st = FockStateMatrix::fock(n, dim)?;
        unsafe { put(out, EitState(st)) }
    })
}

/// Squeezed vacuum with parameter `r` and cutoff `dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eit_state_squeezed(r: f64, dim: usize, out: *mut *mut EitState) -> EitStatus {
    guard(|| {
        let st = FockStateMatrix::squeezed_vacuum(r, dim)?;
        unsafe { put(out, EitState(st)) }
    })
}

/// Pure state from `len` amplitudes (not renormalized). Two-mode states use
/// `len = d*d` with index `n*d + m`.
///
/// # Safety
/// `re` and `im` must point to `len` readable doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_state_from_amplitudes(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut EitState,
) -> EitStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("amplitudes"));
        }
        // SAFETY: caller guarantees `len` readable values each.
        let (re, im) = unsafe {
            (
                std::slice::from_raw_parts(re, len),
                std::slice::from_raw_parts(im, len),
            )
        };
        let amps: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let st = FockStateMatrix::from_amplitudes(&amps)?;
        unsafe { put(out, EitState(st)) }
    })
}

/// # Safety
/// `st` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn eit_state_dim(st: *const EitState) -> usize {
    unsafe { st.as_ref() }.map_or(0, |s| s.0.dim())
}

/// # Safety
/// `st` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eit_state_free(st: *mut EitState) {
    if !st.is_null() {
        drop(unsafe { Box::from_raw(st) });
    }
}

/// Overlap fidelity `Tr{a b}`.
///
/// # Safety
/// Handles must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_state_fidelity(
    a: *const EitState,
    b: *const EitState,
    out: *mut f64,
) -> EitStatus {
    guard(|| {
        let a = unsafe { borrow(a, "a") }?;
        let b = unsafe { borrow(b, "b") }?;
        let f = state_fidelity(&a.0, &b.0)?;
        unsafe { write(out, f, "fidelity") }
    })
}

/// Capture `rho` from pulse `h`, hold for `t_s`, release the mirror image.
/// `simulated = false` uses lossless capture and release. `out_state` may be
/// null when only the report is wanted.
///
/// # Safety
/// Handles must be valid; `report` writable; `out_state` null or writable.
#[no_mangle]
pub unsafe extern "C" fn eit_full_cycle(
    rho: *const EitState,
    h: *const EitEnvelope,
    params: *const EitParams,
    t_s: f64,
    simulated: bool,
    report: *mut EitCycleReport,
    out_state: *mut *mut EitState,
) -> EitStatus {
    guard(|| {
        let rho = unsafe { borrow(rho, "state") }?;
        let h = unsafe { borrow(h, "envelope") }?;
        let params = params_from(unsafe { borrow(params, "params") }?)?;
        let spec = CycleSpec {
            matching: if simulated {
                MatchingMode::Simulated
            } else {
                MatchingMode::Ideal
            },
            ..CycleSpec::new(t_s)
        };
        let r = full_cycle(&rho.0, &h.0, &params, &spec)?;
        let summary = EitCycleReport {
            d_in: r.capture_amplitude.norm(),
            d_out: r.release_amplitude.norm(),
            eta: r.eta,
            fidelity: r.fidelity,
            released_norm: r.released_norm,
        };
        unsafe { write(report, summary, "report") }?;
        if !out_state.is_null() {
            unsafe { put(out_state, EitState(r.rho_out)) }?;
        }
        Ok(())
    })
}

/// Store both modes of a two-mode state, with real capture amplitudes.
///
/// # Safety
/// `rho` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_bipartite_store(
    rho: *const EitState,
    d_left: f64,
    d_right: f64,
    gamma_0: f64,
    t_s: f64,
    out: *mut *mut EitState,
) -> EitStatus {
    guard(|| {
        let rho = unsafe { borrow(rho, "state") }?;
        let st = bipartite_store(
            &rho.0,
            Complex64::new(d_left, 0.0),
            Complex64::new(d_right, 0.0),
            gamma_0,
            t_s,
        )?;
        unsafe { put(out, EitState(st)) }
    })
}

/// # Safety
/// `rho` must be a valid handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn eit_negativity(rho: *const EitState, out: *mut f64) -> EitStatus {
    guard(|| {
        let rho = unsafe { borrow(rho, "state") }?;
        let n = negativity(&rho.0)?;
        unsafe { write(out, n, "negativity") }
    })
}
