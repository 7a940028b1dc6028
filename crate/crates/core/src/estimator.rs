//! Trust estimation from noisy per-transaction measurements.
//!
//! The estimator keeps an exponential moving average of the measured
//! trust samples and divides it by `1 - c`, where `c` is the relative
//! bias of the systematic under-delivery noise. With i.i.d. noise of
//! equal variance the corrected mean is the best linear unbiased estimate
//! of the subject's true willingness, and the per-sample variance cancels
//! out of the closed form entirely.
//!
//! A sliding-window mean of the last ten raw samples is kept alongside as
//! the comparison baseline.

use std::collections::VecDeque;

use thiserror::Error;

use crate::trust::{NoiseModel, TrustError};

/// Default length of the baseline sample window.
pub const DEFAULT_WINDOW_CAP: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("window capacity must be positive")]
    ZeroWindowCap,
    #[error("trust sample must lie in [0, 1], got {0}")]
    SampleOutOfRange(f64),
    #[error("no samples recorded")]
    NoSamples,
    #[error("raw mean must lie in [0, 1], got {0}")]
    MeanOutOfRange(f64),
    #[error("correction must lie in [0, 1), got {0}")]
    CorrectionOutOfRange(f64),
    #[error("requests made must be finite and non-negative, got {0}")]
    NegativeRequests(f64),
    #[error("shared capacity must be finite and non-negative, got {0}")]
    NegativeCapacity(f64),
    #[error("download capacity must be positive, got {0}")]
    ZeroCapacity(f64),
    #[error("total requests must be positive")]
    ZeroRequests,
    #[error(transparent)]
    Trust(#[from] TrustError),
}

/// Running estimation state for one (observer, subject) pair.
///
/// Updates are functional: [`update_ema`] returns a new state and never
/// mutates, so states for distinct pairs can be processed concurrently.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState {
    alpha: f64,
    ema_mean: f64,
    sample_count: u64,
    window: VecDeque<f64>,
    window_cap: usize,
}

impl EstimatorState {
    /// Empty state with the default ten-sample baseline window.
    pub fn new(alpha: f64) -> Result<Self, EstimatorError> {
        Self::with_window_cap(alpha, DEFAULT_WINDOW_CAP)
    }

    pub fn with_window_cap(alpha: f64, window_cap: usize) -> Result<Self, EstimatorError> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(EstimatorError::AlphaOutOfRange(alpha));
        }
        if window_cap == 0 {
            return Err(EstimatorError::ZeroWindowCap);
        }
        Ok(Self {
            alpha,
            ema_mean: 0.0,
            sample_count: 0,
            window: VecDeque::with_capacity(window_cap),
            window_cap,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    /// The EMA of all samples so far; `None` until the first sample.
    pub fn ema_mean(&self) -> Option<f64> {
        (self.sample_count > 0).then_some(self.ema_mean)
    }

    /// The retained raw samples, oldest first.
    pub fn window(&self) -> impl Iterator<Item = f64> + '_ {
        self.window.iter().copied()
    }

    pub fn window_cap(&self) -> usize {
        self.window_cap
    }
}

/// Fold one sample into the state.
///
/// The first sample initialises the mean; afterwards
/// `ema := alpha * sample + (1 - alpha) * ema`. The baseline window keeps
/// the most recent `window_cap` raw samples.
pub fn update_ema(state: &EstimatorState, sample: f64) -> Result<EstimatorState, EstimatorError> {
    if !sample.is_finite() || !(0.0..=1.0).contains(&sample) {
        return Err(EstimatorError::SampleOutOfRange(sample));
    }
    let mut next = state.clone();
    next.ema_mean = if state.sample_count == 0 {
        sample
    } else {
        state.alpha * sample + (1.0 - state.alpha) * state.ema_mean
    };
    next.sample_count = state.sample_count + 1;
    if next.window.len() == next.window_cap {
        next.window.pop_front();
    }
    next.window.push_back(sample);
    Ok(next)
}

/// A bias-corrected trust estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustEstimate {
    /// Corrected estimate, `clamp(raw_mean / (1 - correction), 0, 1)`.
    pub value: f64,
    /// Sample mean before correction.
    pub raw_mean: f64,
    /// Relative noise bias used for the correction.
    pub correction: f64,
}

/// Bias-corrected estimate from the state's EMA mean.
///
/// The result does not depend on `noise.sigma()`: the equal-variance
/// covariance cancels from the estimator, leaving the corrected mean.
pub fn blue_estimate(
    state: &EstimatorState,
    noise: &NoiseModel,
) -> Result<TrustEstimate, EstimatorError> {
    let mean = state.ema_mean().ok_or(EstimatorError::NoSamples)?;
    blue_estimate_mean(mean, noise)
}

/// Bias-corrected estimate from an explicitly supplied sample mean.
///
/// This is the exact-mean mode: callers that track a flat arithmetic mean
/// (or any other mean) apply the same correction the EMA path uses.
pub fn blue_estimate_mean(
    raw_mean: f64,
    noise: &NoiseModel,
) -> Result<TrustEstimate, EstimatorError> {
    if !raw_mean.is_finite() || !(0.0..=1.0).contains(&raw_mean) {
        return Err(EstimatorError::MeanOutOfRange(raw_mean));
    }
    let c = noise.c();
    if !(0.0..1.0).contains(&c) {
        return Err(EstimatorError::CorrectionOutOfRange(c));
    }
    let value = (raw_mean / (1.0 - c)).clamp(0.0, 1.0);
    Ok(TrustEstimate {
        value,
        raw_mean,
        correction: c,
    })
}

/// Arithmetic mean of the retained window, the last-ten-average baseline.
pub fn baseline_estimate(state: &EstimatorState) -> Result<f64, EstimatorError> {
    if state.window.is_empty() {
        return Err(EstimatorError::NoSamples);
    }
    Ok(state.window.iter().sum::<f64>() / state.window.len() as f64)
}

/// Build a [`NoiseModel`] from the over-request ratio `c1`, the network
/// supply/demand ratio `c2`, and the per-sample noise deviation `sigma`.
pub fn compute_noise_model(c1: f64, c2: f64, sigma: f64) -> Result<NoiseModel, EstimatorError> {
    Ok(NoiseModel::new(c1, c2, sigma)?)
}

/// A node's own over-request ratio: requests it made over its download
/// capacity.
pub fn estimate_c1(requests_made: f64, download_capacity: f64) -> Result<f64, EstimatorError> {
    if !requests_made.is_finite() || requests_made < 0.0 {
        return Err(EstimatorError::NegativeRequests(requests_made));
    }
    if !download_capacity.is_finite() || download_capacity <= 0.0 {
        return Err(EstimatorError::ZeroCapacity(download_capacity));
    }
    Ok(requests_made / download_capacity)
}

/// Network supply/demand ratio: total shared capacity over total requests,
/// the average offer attracted by a unit request.
pub fn estimate_c2_global(
    total_shared_capacity: f64,
    total_requests: f64,
) -> Result<f64, EstimatorError> {
    if !total_shared_capacity.is_finite() || total_shared_capacity < 0.0 {
        return Err(EstimatorError::NegativeCapacity(total_shared_capacity));
    }
    if !total_requests.is_finite() || total_requests <= 0.0 {
        return Err(EstimatorError::ZeroRequests);
    }
    Ok(total_shared_capacity / total_requests)
}

/// Supply/demand ratio over `(shared_capacity, requests)` reports gathered
/// from a neighbourhood, e.g. by a high-degree node. Over the whole node
/// set this equals [`estimate_c2_global`].
pub fn estimate_c2_neighborhood(reports: &[(f64, f64)]) -> Result<f64, EstimatorError> {
    let mut shared = 0.0;
    let mut requests = 0.0;
    for &(s, r) in reports {
        if !s.is_finite() || s < 0.0 {
            return Err(EstimatorError::NegativeCapacity(s));
        }
        if !r.is_finite() || r < 0.0 {
            return Err(EstimatorError::NegativeRequests(r));
        }
        shared += s;
        requests += r;
    }
    if requests <= 0.0 {
        return Err(EstimatorError::ZeroRequests);
    }
    Ok(shared / requests)
}
