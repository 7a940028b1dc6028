//! Slotted-time peer-to-peer resource-sharing simulator.
//!
//! Each slot runs five phases for every node: query for providers, split
//! an over-sized request across them, reputation-weighted allocation at
//! the providers, the transaction itself (requester-side acceptance plus
//! optional TCP delivery caps), and reputation-table updates.

mod config;
mod engine;

pub use config::{
    CandidateRange, CapacityProfile, EstimatorKind, Population, SimConfig, TcpConfig,
};
pub use engine::{
    phase_allocate, phase_query, phase_request, phase_transact, phase_update_reputation,
    run_simulation, weighted_sample_without_replacement,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::estimator::{EstimatorError, EstimatorState};
use crate::metrics::{IterationMetrics, MetricsError, ReputationSnapshot};
use crate::tcp::TcpError;
use crate::trust::{DeltaPolicy, NodeId, TrustError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Tcp(#[from] TcpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// One simulated peer.
#[derive(Clone, Debug, PartialEq)]
pub struct PeerNode {
    pub id: NodeId,
    /// Resource units the node can absorb per slot.
    pub download_capacity: f64,
    /// Resource units the node can serve per slot.
    pub upload_capacity: f64,
    /// Number of requesters the node will serve per slot.
    pub max_served_requests: u32,
    /// Free riders request resources but never allocate any.
    pub free_rider: bool,
    /// Estimation state per counterpart this node has interacted with.
    pub reputation_table: BTreeMap<NodeId, EstimatorState>,
    /// Credit policy for declined offers, refreshed each slot from the
    /// requests the node actually made.
    pub delta_policy: DeltaPolicy,
}

/// One request/allocation/delivery between a requester and a provider.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transaction {
    pub slot: u64,
    pub requester: NodeId,
    pub provider: NodeId,
    /// Amount the requester asked from this provider.
    pub requested: f64,
    /// Amount the provider offered.
    pub allocated: f64,
    /// Amount that actually arrived after requester-side acceptance and
    /// any TCP delivery cap.
    pub delivered: f64,
    /// Whether the requester took (any of) the offer. An offer exists when
    /// `allocated > 0`; a declined offer earns the delta credit instead of
    /// a measured ratio.
    pub accepted: bool,
}

/// Everything a simulation run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    /// Per-iteration series, one row per slot starting at iteration 1.
    pub metrics: Vec<IterationMetrics>,
    /// Per-iteration (min, max) over all recorded reputations; `None`
    /// while no pair exists yet.
    pub reputation_bounds: Vec<Option<(f64, f64)>>,
    /// Complete transaction log in execution order.
    pub transactions: Vec<Transaction>,
    /// Queryable reputation of every pair after the final slot.
    pub final_reputations: BTreeMap<(NodeId, NodeId), f64>,
    /// Per-iteration snapshots, populated only when
    /// `SimConfig::record_snapshots` is set.
    pub snapshots: Vec<ReputationSnapshot>,
}
