//! Per-transaction trust measurement.
//!
//! A requester measures the trust of a counterpart from what it asked for
//! and what it actually got. Three cases are covered: the plain
//! received/requested ratio, the fixed credit granted for an offer the
//! requester itself declined, and the rate-decomposed score for accepted
//! offers (delivery shortfall vs. commitment shortfall).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a peer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrustError {
    #[error("undefined ratio: requested amount is zero")]
    UndefinedRatio,
    #[error("{0} must be finite and non-negative")]
    NegativeAmount(&'static str),
    #[error("received {received} exceeds requested {requested}")]
    OverDelivery { requested: f64, received: f64 },
    #[error("transaction index must be positive")]
    ZeroTransactionIndex,
    #[error("{0} service rate must be positive and finite")]
    NonPositiveRate(&'static str),
    #[error("delta must lie in [0, 1], got {0}")]
    DeltaOutOfRange(f64),
    #[error("download capacity must be positive and finite, got {0}")]
    NonPositiveCapacity(f64),
    #[error("noise parameter {name} must be finite and non-negative, got {value}")]
    InvalidNoiseParameter { name: &'static str, value: f64 },
    #[error("noise standard deviation must be positive and finite, got {0}")]
    NonPositiveSigma(f64),
}

fn check_amount(name: &'static str, value: f64) -> Result<(), TrustError> {
    if !value.is_finite() || value < 0.0 {
        return Err(TrustError::NegativeAmount(name));
    }
    Ok(())
}

/// Measured trust of a single transaction: the fraction of the requested
/// resource that was actually received.
pub fn measure_ratio(requested: f64, received: f64) -> Result<f64, TrustError> {
    check_amount("requested", requested)?;
    check_amount("received", received)?;
    if requested == 0.0 {
        return Err(TrustError::UndefinedRatio);
    }
    if received > requested {
        return Err(TrustError::OverDelivery {
            requested,
            received,
        });
    }
    Ok(received / requested)
}

/// One measured transaction between an observer and a subject.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrustSample {
    observer: NodeId,
    subject: NodeId,
    transaction_index: u64,
    requested: f64,
    received: f64,
    value: f64,
}

impl TrustSample {
    /// Build a sample from raw transaction amounts; the trust value is the
    /// received/requested ratio.
    pub fn measured(
        observer: NodeId,
        subject: NodeId,
        transaction_index: u64,
        requested: f64,
        received: f64,
    ) -> Result<Self, TrustError> {
        if transaction_index == 0 {
            return Err(TrustError::ZeroTransactionIndex);
        }
        let value = measure_ratio(requested, received)?;
        Ok(Self {
            observer,
            subject,
            transaction_index,
            requested,
            received,
            value,
        })
    }

    pub fn observer(&self) -> NodeId {
        self.observer
    }

    pub fn subject(&self) -> NodeId {
        self.subject
    }

    pub fn transaction_index(&self) -> u64 {
        self.transaction_index
    }

    pub fn requested(&self) -> f64 {
        self.requested
    }

    pub fn received(&self) -> f64 {
        self.received
    }

    /// Measured trust value in [0, 1].
    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Credit policy for offers the requester declined.
///
/// The credit is bounded by the ratio of the node's download capacity to
/// the total requests it made, so a node cannot farm reputation by making
/// offers it never intends to serve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPolicy {
    delta: f64,
    download_capacity: f64,
    total_requests_made: f64,
}

impl DeltaPolicy {
    pub fn new(
        delta: f64,
        download_capacity: f64,
        total_requests_made: f64,
    ) -> Result<Self, TrustError> {
        if !delta.is_finite() || !(0.0..=1.0).contains(&delta) {
            return Err(TrustError::DeltaOutOfRange(delta));
        }
        if !download_capacity.is_finite() || download_capacity <= 0.0 {
            return Err(TrustError::NonPositiveCapacity(download_capacity));
        }
        check_amount("total_requests_made", total_requests_made)?;
        Ok(Self {
            delta,
            download_capacity,
            total_requests_made,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn download_capacity(&self) -> f64 {
        self.download_capacity
    }

    pub fn total_requests_made(&self) -> f64 {
        self.total_requests_made
    }
}

/// Trust credited for an offer the requester did not accept.
///
/// The configured delta is silently capped at
/// `download_capacity / total_requests_made` once the node has made any
/// requests.
pub fn trust_refused_offer(policy: &DeltaPolicy) -> f64 {
    if policy.total_requests_made > 0.0 {
        policy
            .delta
            .min(policy.download_capacity / policy.total_requests_made)
    } else {
        policy.delta
    }
}

/// The four rates entering the accepted-offer score, all in the same units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServiceRates {
    actual: f64,
    feasible: f64,
    willing: f64,
    requested: f64,
}

impl ServiceRates {
    pub fn new(
        actual: f64,
        feasible: f64,
        willing: f64,
        requested: f64,
    ) -> Result<Self, TrustError> {
        check_amount("actual rate", actual)?;
        check_amount("willing rate", willing)?;
        if !feasible.is_finite() || feasible <= 0.0 {
            return Err(TrustError::NonPositiveRate("feasible"));
        }
        if !requested.is_finite() || requested <= 0.0 {
            return Err(TrustError::NonPositiveRate("requested"));
        }
        Ok(Self {
            actual,
            feasible,
            willing,
            requested,
        })
    }

    pub fn actual(&self) -> f64 {
        self.actual
    }

    pub fn feasible(&self) -> f64 {
        self.feasible
    }

    pub fn willing(&self) -> f64 {
        self.willing
    }

    pub fn requested(&self) -> f64 {
        self.requested
    }
}

/// Trust of an accepted offer: delivery shortfall times commitment
/// shortfall, `(actual/feasible) * (willing/requested)`, clamped to [0, 1].
///
/// The first factor can exceed one when the observed rate beats the
/// analytic link model; the clamp keeps reputation tables well-defined.
pub fn trust_accepted_offer(rates: &ServiceRates) -> f64 {
    let raw = (rates.actual / rates.feasible) * (rates.willing / rates.requested);
    raw.clamp(0.0, 1.0)
}

/// Systematic measurement-noise model.
///
/// `c1` is the node's own over-request ratio, `c2` the network-wide
/// supply/demand ratio. Their product is the average offer a node attracts
/// per unit of its capacity; when it exceeds one, a fraction
/// `c = 1 - 1/(c1*c2)` of every measurement is systematic under-delivery
/// noise rather than unwillingness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    c1: f64,
    c2: f64,
    c: f64,
    sigma: f64,
}

impl NoiseModel {
    /// Build the model from the two ratios; the relative bias `c` follows
    /// the two-branch rule and is continuous at `c1 * c2 = 1`.
    pub fn new(c1: f64, c2: f64, sigma: f64) -> Result<Self, TrustError> {
        if !c1.is_finite() || c1 < 0.0 {
            return Err(TrustError::InvalidNoiseParameter {
                name: "c1",
                value: c1,
            });
        }
        if !c2.is_finite() || c2 < 0.0 {
            return Err(TrustError::InvalidNoiseParameter {
                name: "c2",
                value: c2,
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(TrustError::NonPositiveSigma(sigma));
        }
        let product = c1 * c2;
        let c = if product > 1.0 {
            1.0 - 1.0 / product
        } else {
            0.0
        };
        Ok(Self { c1, c2, c, sigma })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Relative bias `c` in [0, 1).
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
