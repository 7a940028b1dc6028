//! C ABI for the trust estimator.
//!
//! The estimator is held behind an opaque handle; every call returns a
//! status code and writes results through out-pointers. Out-pointers are
//! only written on `BLUEREP_STATUS_OK`.
//!
//! The generated header lands in `include/bluerep.h`.

use std::ffi::c_char;

use bluerep::estimator::{
    baseline_estimate, blue_estimate, compute_noise_model, update_ema, EstimatorError,
    EstimatorState,
};
use bluerep::tcp::{feasible_rate, TcpParams};
use bluerep::trust::{
    measure_ratio, trust_accepted_offer, trust_refused_offer, DeltaPolicy, NoiseModel, ServiceRates,
};

/// Result of every FFI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BluerepStatus {
    /// The call succeeded and any out-pointer has been written.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A numeric argument was outside its documented domain.
    InvalidArgument = 2,
    /// The estimator has no samples yet.
    NoSamples = 3,
}

impl From<&EstimatorError> for BluerepStatus {
    fn from(err: &EstimatorError) -> Self {
        match err {
            EstimatorError::NoSamples => BluerepStatus::NoSamples,
            _ => BluerepStatus::InvalidArgument,
        }
    }
}

/// Opaque trust estimator for one (observer, subject) pair.
pub struct BluerepEstimator {
    state: EstimatorState,
}

/// Create an estimator. `alpha` is the EMA weight in (0, 1];
/// `window_cap` is the baseline window length (pass 10 for the default
/// behaviour). On success writes the new handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle must be released
/// with [`bluerep_estimator_free`].
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_new(
    alpha: f64,
    window_cap: usize,
    out: *mut *mut BluerepEstimator,
) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match EstimatorState::with_window_cap(alpha, window_cap) {
        Ok(state) => {
            unsafe { *out = Box::into_raw(Box::new(BluerepEstimator { state })) };
            BluerepStatus::Ok
        }
        Err(e) => BluerepStatus::from(&e),
    }
}

/// Release an estimator handle. Null is accepted and ignored.
///
/// # Safety
/// `est` must have come from [`bluerep_estimator_new`] and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_free(est: *mut BluerepEstimator) {
    if !est.is_null() {
        drop(unsafe { Box::from_raw(est) });
    }
}

/// Fold one measured trust sample in [0, 1] into the estimator.
///
/// # Safety
/// `est` must be a live handle from [`bluerep_estimator_new`].
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_update(
    est: *mut BluerepEstimator,
    sample: f64,
) -> BluerepStatus {
    let Some(est) = (unsafe { est.as_mut() }) else {
        return BluerepStatus::NullArgument;
    };
    match update_ema(&est.state, sample) {
        Ok(next) => {
            est.state = next;
            BluerepStatus::Ok
        }
        Err(e) => BluerepStatus::from(&e),
    }
}

/// Number of samples folded in so far.
///
/// # Safety
/// `est` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_sample_count(
    est: *const BluerepEstimator,
    out: *mut u64,
) -> BluerepStatus {
    let Some(est) = (unsafe { est.as_ref() }) else {
        return BluerepStatus::NullArgument;
    };
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    unsafe { *out = est.state.sample_count() };
    BluerepStatus::Ok
}

/// The current EMA of the samples, before any bias correction.
///
/// # Safety
/// `est` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_ema(
    est: *const BluerepEstimator,
    out: *mut f64,
) -> BluerepStatus {
    let Some(est) = (unsafe { est.as_ref() }) else {
        return BluerepStatus::NullArgument;
    };
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match est.state.ema_mean() {
        Some(mean) => {
            unsafe { *out = mean };
            BluerepStatus::Ok
        }
        None => BluerepStatus::NoSamples,
    }
}

/// Bias-corrected trust estimate in [0, 1].
///
/// `c1` is the observer's over-request ratio, `c2` the network
/// supply/demand ratio and `sigma` the per-sample noise deviation (any
/// positive value; it does not affect the result).
///
/// # Safety
/// `est` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_blue(
    est: *const BluerepEstimator,
    c1: f64,
    c2: f64,
    sigma: f64,
    out: *mut f64,
) -> BluerepStatus {
    let Some(est) = (unsafe { est.as_ref() }) else {
        return BluerepStatus::NullArgument;
    };
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    let noise = match compute_noise_model(c1, c2, sigma) {
        Ok(noise) => noise,
        Err(e) => return BluerepStatus::from(&e),
    };
    match blue_estimate(&est.state, &noise) {
        Ok(estimate) => {
            unsafe { *out = estimate.value };
            BluerepStatus::Ok
        }
        Err(e) => BluerepStatus::from(&e),
    }
}

/// Mean of the last ten raw samples (the comparison baseline).
///
/// # Safety
/// `est` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_estimator_baseline(
    est: *const BluerepEstimator,
    out: *mut f64,
) -> BluerepStatus {
    let Some(est) = (unsafe { est.as_ref() }) else {
        return BluerepStatus::NullArgument;
    };
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match baseline_estimate(&est.state) {
        Ok(v) => {
            unsafe { *out = v };
            BluerepStatus::Ok
        }
        Err(e) => BluerepStatus::from(&e),
    }
}

/// Measured trust of one transaction: `received / requested`, requiring
/// `0 <= received <= requested` and `requested > 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_measure_ratio(
    requested: f64,
    received: f64,
    out: *mut f64,
) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match measure_ratio(requested, received) {
        Ok(v) => {
            unsafe { *out = v };
            BluerepStatus::Ok
        }
        Err(_) => BluerepStatus::InvalidArgument,
    }
}

/// Trust credited for an offer the requester declined: `delta` capped at
/// `download_capacity / total_requests_made` once any requests were made.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_trust_refused_offer(
    delta: f64,
    download_capacity: f64,
    total_requests_made: f64,
    out: *mut f64,
) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match DeltaPolicy::new(delta, download_capacity, total_requests_made) {
        Ok(policy) => {
            unsafe { *out = trust_refused_offer(&policy) };
            BluerepStatus::Ok
        }
        Err(_) => BluerepStatus::InvalidArgument,
    }
}

/// Trust of an accepted offer:
/// `(actual / feasible) * (willing / requested)`, clamped to [0, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_trust_accepted_offer(
    actual: f64,
    feasible: f64,
    willing: f64,
    requested: f64,
    out: *mut f64,
) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match ServiceRates::new(actual, feasible, willing, requested) {
        Ok(rates) => {
            unsafe { *out = trust_accepted_offer(&rates) };
            BluerepStatus::Ok
        }
        Err(_) => BluerepStatus::InvalidArgument,
    }
}

/// Steady-state TCP Reno throughput in packets/second; the feasible
/// service rate of a link with loss probability `p` (0 means loss-free).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_tcp_feasible_rate(
    w_max: f64,
    rtt: f64,
    t0: f64,
    b: u32,
    p: f64,
    out: *mut f64,
) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match TcpParams::new(w_max, rtt, t0, b, p) {
        Ok(params) => {
            unsafe { *out = feasible_rate(&params) };
            BluerepStatus::Ok
        }
        Err(_) => BluerepStatus::InvalidArgument,
    }
}

/// Relative bias of the measurement noise: `1 - 1/(c1*c2)` when the
/// product exceeds one, zero otherwise.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bluerep_noise_bias(c1: f64, c2: f64, out: *mut f64) -> BluerepStatus {
    if out.is_null() {
        return BluerepStatus::NullArgument;
    }
    match NoiseModel::new(c1, c2, 1.0) {
        Ok(model) => {
            unsafe { *out = model.c() };
            BluerepStatus::Ok
        }
        Err(_) => BluerepStatus::InvalidArgument,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bluerep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
