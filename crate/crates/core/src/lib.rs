//! Bias-corrected peer trust estimation and a slotted-time P2P
//! resource-sharing simulator.
//!
//! In a heavily loaded sharing network nodes over-request and providers
//! under-deliver, so the raw received/requested ratio systematically
//! underestimates a counterpart's willingness to serve. This crate
//! measures per-transaction trust ([`trust`]), models the systematic bias
//! from the over-request and supply/demand ratios, and corrects the
//! running mean accordingly ([`estimator`]). A discrete-slot simulator
//! ([`sim`]) reproduces the reputation dynamics of such a network with
//! either the corrected estimator or a last-ten-average baseline, and
//! [`experiment`] drives seeded sweeps that land as CSV series plus a
//! manifest. The analytic link-rate model lives in [`tcp`].

pub mod estimator;
pub mod experiment;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod tcp;
pub mod trust;

pub use estimator::{EstimatorState, TrustEstimate};
pub use sim::{run_simulation, SimConfig, SimReport};
pub use trust::{NodeId, NoiseModel};
