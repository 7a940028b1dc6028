//! Simulation configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SimError;

/// Whether all nodes share one capacity profile or draw their own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Homogeneous,
    Heterogeneous,
}

impl Population {
    pub fn as_str(self) -> &'static str {
        match self {
            Population::Homogeneous => "homogeneous",
            Population::Heterogeneous => "heterogeneous",
        }
    }
}

/// Which estimate providers consult and reports record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Blue,
    Baseline,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Blue => "blue",
            EstimatorKind::Baseline => "baseline",
        }
    }
}

/// Bounds of the per-query candidate count, drawn uniformly per slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRange {
    pub min: u32,
    pub max: u32,
}

impl Default for CandidateRange {
    fn default() -> Self {
        Self { min: 2, max: 6 }
    }
}

/// Node capacity parameters. The scalar fields apply to every node of a
/// homogeneous population; the ranges are sampled per node (uniformly)
/// when the population is heterogeneous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    pub download: f64,
    pub upload: f64,
    pub max_served: u32,
    pub download_range: [f64; 2],
    pub upload_range: [f64; 2],
    pub max_served_range: [u32; 2],
}

impl Default for CapacityProfile {
    fn default() -> Self {
        Self {
            download: 100.0,
            upload: 200.0,
            max_served: 4,
            download_range: [50.0, 150.0],
            upload_range: [100.0, 300.0],
            max_served_range: [2, 6],
        }
    }
}

/// Per-link TCP delivery cap. Disabled by default: the feasible rate then
/// equals whatever the provider committed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TcpConfig {
    pub enabled: bool,
    /// Maximum receiver window, packets.
    pub w_max: f64,
    /// Round-trip time, seconds.
    pub rtt: f64,
    /// Timeout period, seconds.
    pub t0: f64,
    /// Packets acknowledged per ACK.
    pub b: u32,
    /// Per-link loss probability is drawn uniformly from this range.
    pub p_range: [f64; 2],
    /// Resource units per packet, for converting packets/s to units/slot.
    pub packet_size: f64,
    /// Slot duration in seconds.
    pub slot_seconds: f64,
}

impl Default for TcpConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            w_max: 500.0,
            rtt: 0.1,
            t0: 1.0,
            b: 1,
            p_range: [0.001, 0.01],
            packet_size: 1.0,
            slot_seconds: 1.0,
        }
    }
}

/// Full configuration of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub node_count: u32,
    pub iterations: u32,
    /// Leading slots during which providers allocate uniformly, ignoring
    /// reputation tables.
    pub acquaintance_iterations: u32,
    /// Credit for a declined offer, also the default prior for unknown
    /// requesters.
    pub delta: f64,
    /// EMA weight of the estimator states.
    pub alpha: f64,
    pub population: Population,
    pub estimator_kind: EstimatorKind,
    pub rng_seed: u64,
    /// Factor by which nodes over-request relative to their download
    /// capacity; this is the ground truth behind the c1 estimate.
    pub overrequest_factor: f64,
    /// Baseline window length.
    pub window: u32,
    /// Per-sample noise deviation handed to the noise model. The corrected
    /// estimate does not depend on it.
    pub sigma: f64,
    /// Reputation assumed for requesters the provider has never measured;
    /// defaults to `delta` when unset.
    pub unknown_prior: Option<f64>,
    /// Fraction of nodes that never upload.
    pub free_rider_fraction: f64,
    pub candidates: CandidateRange,
    pub capacity: CapacityProfile,
    pub tcp: TcpConfig,
    /// Keep every per-iteration reputation snapshot in the report. Meant
    /// for tests; large runs should leave it off.
    pub record_snapshots: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            node_count: 200,
            iterations: 500,
            acquaintance_iterations: 50,
            delta: 0.3,
            alpha: 0.1,
            population: Population::Homogeneous,
            estimator_kind: EstimatorKind::Blue,
            rng_seed: 0,
            overrequest_factor: 2.0,
            window: 10,
            sigma: 0.05,
            unknown_prior: None,
            free_rider_fraction: 0.0,
            candidates: CandidateRange::default(),
            capacity: CapacityProfile::default(),
            tcp: TcpConfig::default(),
            record_snapshots: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |msg: String| Err(SimError::Config(msg));
        if self.node_count < 2 {
            return err(format!(
                "node_count must be at least 2, got {}",
                self.node_count
            ));
        }
        if self.iterations == 0 {
            return err("iterations must be positive".into());
        }
        if self.acquaintance_iterations >= self.iterations {
            return err(format!(
                "acquaintance_iterations ({}) must be less than iterations ({})",
                self.acquaintance_iterations, self.iterations
            ));
        }
        if !self.delta.is_finite() || !(0.0..=1.0).contains(&self.delta) {
            return err(format!("delta must lie in [0, 1], got {}", self.delta));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 1.0 {
            return err(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !self.overrequest_factor.is_finite() || self.overrequest_factor < 1.0 {
            return err(format!(
                "overrequest_factor must be at least 1, got {}",
                self.overrequest_factor
            ));
        }
        if self.window == 0 {
            return err("window must be positive".into());
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return err(format!("sigma must be positive, got {}", self.sigma));
        }
        if let Some(prior) = self.unknown_prior {
            if !prior.is_finite() || !(0.0..=1.0).contains(&prior) {
                return err(format!("unknown_prior must lie in [0, 1], got {prior}"));
            }
        }
        if !self.free_rider_fraction.is_finite() || !(0.0..1.0).contains(&self.free_rider_fraction)
        {
            return err(format!(
                "free_rider_fraction must lie in [0, 1), got {}",
                self.free_rider_fraction
            ));
        }
        if self.candidates.min == 0 || self.candidates.min > self.candidates.max {
            return err(format!(
                "candidate range [{}, {}] must satisfy 1 <= min <= max",
                self.candidates.min, self.candidates.max
            ));
        }
        let cap = &self.capacity;
        for (name, v) in [
            ("capacity.download", cap.download),
            ("capacity.upload", cap.upload),
            ("capacity.download_range lower", cap.download_range[0]),
            ("capacity.upload_range lower", cap.upload_range[0]),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if cap.max_served == 0 || cap.max_served_range[0] == 0 {
            return err("capacity.max_served must be positive".into());
        }
        if cap.download_range[0] > cap.download_range[1]
            || cap.upload_range[0] > cap.upload_range[1]
            || cap.max_served_range[0] > cap.max_served_range[1]
        {
            return err("capacity ranges must be ordered low..high".into());
        }
        if self.tcp.enabled {
            // Validate the whole TCP parameter block up front, including
            // both ends of the loss range.
            for p in self.tcp.p_range {
                crate::tcp::TcpParams::new(
                    self.tcp.w_max,
                    self.tcp.rtt,
                    self.tcp.t0,
                    self.tcp.b,
                    p,
                )
                .map_err(|e| SimError::Config(format!("tcp: {e}")))?;
            }
            if self.tcp.p_range[0] > self.tcp.p_range[1] {
                return err("tcp.p_range must be ordered low..high".into());
            }
            if !self.tcp.packet_size.is_finite() || self.tcp.packet_size <= 0.0 {
                return err("tcp.packet_size must be positive".into());
            }
            if !self.tcp.slot_seconds.is_finite() || self.tcp.slot_seconds <= 0.0 {
                return err("tcp.slot_seconds must be positive".into());
            }
        }
        Ok(())
    }

    /// Prior reputation for an unknown requester.
    pub fn prior(&self) -> f64 {
        self.unknown_prior.unwrap_or(self.delta)
    }

    /// Hex digest of the canonical JSON form, recorded in run manifests.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let out = hasher.finalize();
        let mut hex = String::with_capacity(out.len() * 2);
        for byte in out {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
