//! C ABI over the robdiff streaming differentiators.
//!
//! Engines are opaque `RdEngine` handles created by one of the `rd_*_new`
//! constructors and released with `rd_engine_free`. Every fallible call
//! returns an `RdStatus`; on failure `rd_last_error` describes the problem
//! for the calling thread. A handle must not be used from two threads at
//! once, but may move between threads between calls.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robdiff::engines::{FiniteDifferenceParams, RedParams, RedScheme};
use robdiff::{AdaptiveParams, Differentiator, Engine, EngineSpec, WindowLength};

/// Status code returned by every fallible function.
pub type RdStatus = i32;

pub const RD_OK: RdStatus = 0;
/// A required pointer argument was null.
pub const RD_NULL_POINTER: RdStatus = 1;
/// A parameter violated its documented range.
pub const RD_INVALID_PARAM: RdStatus = 2;
/// No step has been taken since creation or the last reset.
pub const RD_NO_DATA: RdStatus = 3;
/// An internal panic was caught at the boundary.
pub const RD_PANIC: RdStatus = 4;

/// Bumped on any incompatible change to this interface.
pub const RD_ABI_VERSION: u32 = 1;

/// Engine kinds reported in `RdDiagnostics::kind`.
pub const RD_KIND_ADAPTIVE: u32 = 0;
pub const RD_KIND_FD: u32 = 1;
pub const RD_KIND_RED: u32 = 2;

/// Opaque streaming differentiator.
pub struct RdEngine {
    inner: Engine,
}

/// Snapshot of the latest step. Fields not applicable to the engine kind
/// are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RdDiagnostics {
    pub kind: u32,
    pub step: u64,
    pub y: f64,
    /// Adaptive engines: noise amplitude estimate.
    pub n_hat: f64,
    /// Adaptive engines: selected window scale.
    pub gamma: f64,
    /// Adaptive engines: difference-quotient window in seconds.
    pub t_hat: f64,
    /// Adaptive engines: the same window in samples.
    pub lag: u64,
    /// RED engines: internal states.
    pub y1: f64,
    pub y2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn guard(f: impl FnOnce() -> RdStatus) -> RdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            RD_PANIC
        }
    }
}

fn create(out: *mut *mut RdEngine, spec: impl FnOnce() -> robdiff::Result<EngineSpec>) -> RdStatus {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return RD_NULL_POINTER;
        }
        match spec() {
            Ok(spec) => {
                let handle = Box::new(RdEngine { inner: Engine::new(spec) });
                // SAFETY: `out` is non-null and the caller guarantees it is writable.
                unsafe { *out = Box::into_raw(handle) };
                RD_OK
            }
            Err(e) => {
                set_error(e.to_string());
                // SAFETY: as above.
                unsafe { *out = ptr::null_mut() };
                RD_INVALID_PARAM
            }
        }
    })
}

/// Interface version, `RD_ABI_VERSION`.
#[no_mangle]
pub extern "C" fn rd_abi_version() -> u32 {
    RD_ABI_VERSION
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Adaptive differentiator. `k_bar = 0` keeps the whole history; otherwise
/// `k_bar >= 2`. `gamma_bar` must lie in `[2, 1 + sqrt(2)]`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_adaptive_new(
    accel_bound: f64,
    dt: f64,
    k_bar: u64,
    gamma_bar: f64,
    out: *mut *mut RdEngine,
) -> RdStatus {
    create(out, || {
        let window = if k_bar == 0 { WindowLength::Unbounded } else { WindowLength::Finite(k_bar as usize) };
        AdaptiveParams::new(accel_bound, dt, window, gamma_bar).map(EngineSpec::Adaptive)
    })
}

/// Adaptive differentiator with the window sized for noise up to `noise_ceiling`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_adaptive_new_tuned(
    accel_bound: f64,
    dt: f64,
    noise_ceiling: f64,
    out: *mut *mut RdEngine,
) -> RdStatus {
    create(out, || AdaptiveParams::tuned(accel_bound, dt, noise_ceiling).map(EngineSpec::Adaptive))
}

/// Finite difference tuned for known bounds `L` and `N`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_fd_new(accel_bound: f64, noise_bound: f64, dt: f64, out: *mut *mut RdEngine) -> RdStatus {
    create(out, || FiniteDifferenceParams::new(accel_bound, noise_bound, dt).map(EngineSpec::FiniteDifference))
}

/// Robust exact differentiator; `implicit != 0` selects the implicit scheme.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rd_red_new(
    lambda1: f64,
    lambda2: f64,
    accel_bound: f64,
    dt: f64,
    implicit: i32,
    out: *mut *mut RdEngine,
) -> RdStatus {
    let scheme = if implicit != 0 { RedScheme::Implicit } else { RedScheme::Explicit };
    create(out, || RedParams::new(lambda1, lambda2, accel_bound, dt, scheme).map(EngineSpec::Red))
}

/// Feeds one sample and writes the derivative estimate to `y`.
///
/// # Safety
/// `engine` must be null or a live handle; `y` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn rd_engine_step(engine: *mut RdEngine, u: f64, y: *mut f64) -> RdStatus {
    guard(|| {
        if engine.is_null() || y.is_null() {
            set_error("null engine or output pointer");
            return RD_NULL_POINTER;
        }
        // SAFETY: both pointers are non-null and valid per the contract.
        unsafe { *y = (*engine).inner.step(u) };
        RD_OK
    })
}

/// Feeds `len` samples from `u` and writes `len` estimates to `y`.
///
/// # Safety
/// `u` and `y` must each be valid for `len` elements and must not overlap.
#[no_mangle]
pub unsafe extern "C" fn rd_engine_step_many(
    engine: *mut RdEngine,
    u: *const f64,
    y: *mut f64,
    len: usize,
) -> RdStatus {
    guard(|| {
        if engine.is_null() || (len > 0 && (u.is_null() || y.is_null())) {
            set_error("null engine or buffer pointer");
            return RD_NULL_POINTER;
        }
        if len == 0 {
            return RD_OK;
        }
        // SAFETY: validity and non-overlap are part of the caller contract.
        let (input, output, eng) =
            unsafe { (std::slice::from_raw_parts(u, len), std::slice::from_raw_parts_mut(y, len), &mut *engine) };
        for (o, &x) in output.iter_mut().zip(input) {
            *o = eng.inner.step(x);
        }
        RD_OK
    })
}

/// Returns the engine to its state before the first sample.
///
/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_engine_reset(engine: *mut RdEngine) -> RdStatus {
    guard(|| {
        if engine.is_null() {
            set_error("null engine");
            return RD_NULL_POINTER;
        }
        // SAFETY: non-null live handle per the contract.
        unsafe { (*engine).inner.reset() };
        RD_OK
    })
}

/// Writes diagnostics of the latest step to `out`.
///
/// # Safety
/// `engine` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn rd_engine_diagnostics(engine: *const RdEngine, out: *mut RdDiagnostics) -> RdStatus {
    guard(|| {
        if engine.is_null() || out.is_null() {
            set_error("null engine or output pointer");
            return RD_NULL_POINTER;
        }
        // SAFETY: non-null live handle per the contract.
        let eng = unsafe { &(*engine).inner };
        let Some(d) = eng.diagnostics() else {
            set_error("no step taken yet");
            return RD_NO_DATA;
        };
        let mut r = RdDiagnostics {
            kind: match eng.kind() {
                robdiff::EngineKind::Adaptive => RD_KIND_ADAPTIVE,
                robdiff::EngineKind::FiniteDifference => RD_KIND_FD,
                robdiff::EngineKind::Red => RD_KIND_RED,
            },
            step: d.step as u64,
            y: d.y,
            ..RdDiagnostics::default()
        };
        if let Some(a) = d.adaptive {
            r.n_hat = a.n_hat;
            r.gamma = a.gamma;
            r.t_hat = a.t_hat;
            r.lag = a.lag as u64;
        }
        if let Some((y1, y2)) = d.red_state {
            r.y1 = y1;
            r.y2 = y2;
        }
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = r };
        RD_OK
    })
}

/// Releases a handle. Null is accepted and ignored.
///
/// # Safety
/// `engine` must be null or a handle from an `rd_*_new` call that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rd_engine_free(engine: *mut RdEngine) {
    if !engine.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(engine) });
    }
}
