#ifndef BLUEREP_H
#define BLUEREP_H

/* This file is generated by cbindgen from bluerep-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every FFI call.
typedef enum {
  // The call succeeded and any out-pointer has been written.
  BLUEREP_STATUS_OK = 0,
  // A required pointer argument was null.
  BLUEREP_STATUS_NULL_ARGUMENT = 1,
  // A numeric argument was outside its documented domain.
  BLUEREP_STATUS_INVALID_ARGUMENT = 2,
  // The estimator has no samples yet.
  BLUEREP_STATUS_NO_SAMPLES = 3,
} BluerepStatus;

// Opaque trust estimator for one (observer, subject) pair.
typedef struct BluerepEstimator BluerepEstimator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create an estimator. `alpha` is the EMA weight in (0, 1];
// `window_cap` is the baseline window length (pass 10 for the default
// behaviour). On success writes the new handle to `out`.
//
// # Safety
// `out` must be a valid pointer. The returned handle must be released
// with [`bluerep_estimator_free`].
BluerepStatus bluerep_estimator_new(double alpha, uintptr_t window_cap, BluerepEstimator **out);

// Release an estimator handle. Null is accepted and ignored.
//
// # Safety
// `est` must have come from [`bluerep_estimator_new`] and must not be
// used afterwards.
void bluerep_estimator_free(BluerepEstimator *est);

// Fold one measured trust sample in [0, 1] into the estimator.
//
// # Safety
// `est` must be a live handle from [`bluerep_estimator_new`].
BluerepStatus bluerep_estimator_update(BluerepEstimator *est, double sample);

// Number of samples folded in so far.
//
// # Safety
// `est` must be a live handle; `out` must be a valid pointer.
BluerepStatus bluerep_estimator_sample_count(const BluerepEstimator *est, uint64_t *out);

// The current EMA of the samples, before any bias correction.
//
// # Safety
// `est` must be a live handle; `out` must be a valid pointer.
BluerepStatus bluerep_estimator_ema(const BluerepEstimator *est, double *out);

// Bias-corrected trust estimate in [0, 1].
//
// `c1` is the observer's over-request ratio, `c2` the network
// supply/demand ratio and `sigma` the per-sample noise deviation (any
// positive value; it does not affect the result).
//
// # Safety
// `est` must be a live handle; `out` must be a valid pointer.
BluerepStatus bluerep_estimator_blue(const BluerepEstimator *est,
                                     double c1,
                                     double c2,
                                     double sigma,
                                     double *out);

// Mean of the last ten raw samples (the comparison baseline).
//
// # Safety
// `est` must be a live handle; `out` must be a valid pointer.
BluerepStatus bluerep_estimator_baseline(const BluerepEstimator *est, double *out);

// Measured trust of one transaction: `received / requested`, requiring
// `0 <= received <= requested` and `requested > 0`.
//
// # Safety
// `out` must be a valid pointer.
BluerepStatus bluerep_measure_ratio(double requested, double received, double *out);

// Trust credited for an offer the requester declined: `delta` capped at
// `download_capacity / total_requests_made` once any requests were made.
//
// # Safety
// `out` must be a valid pointer.
BluerepStatus bluerep_trust_refused_offer(double delta,
                                          double download_capacity,
                                          double total_requests_made,
                                          double *out);

// Trust of an accepted offer:
// `(actual / feasible) * (willing / requested)`, clamped to [0, 1].
//
// # Safety
// `out` must be a valid pointer.
BluerepStatus bluerep_trust_accepted_offer(double actual,
                                           double feasible,
                                           double willing,
                                           double requested,
                                           double *out);

// Steady-state TCP Reno throughput in packets/second; the feasible
// service rate of a link with loss probability `p` (0 means loss-free).
//
// # Safety
// `out` must be a valid pointer.
BluerepStatus bluerep_tcp_feasible_rate(double w_max,
                                        double rtt,
                                        double t0,
                                        uint32_t b,
                                        double p,
                                        double *out);

// Relative bias of the measurement noise: `1 - 1/(c1*c2)` when the
// product exceeds one, zero otherwise.
//
// # Safety
// `out` must be a valid pointer.
BluerepStatus bluerep_noise_bias(double c1, double c2, double *out);

// Library version as a static NUL-terminated string.
const char *bluerep_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLUEREP_H */
