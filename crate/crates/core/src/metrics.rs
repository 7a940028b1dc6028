//! Evaluation metrics: per-iteration reputation change and network
//! utilization.

use thiserror::Error;

use crate::trust::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("total shared capacity must be positive, got {0}")]
    ZeroCapacity(f64),
}

/// Dense snapshot of every (observer, subject) reputation at one
/// iteration. Pairs that never interacted are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct ReputationSnapshot {
    node_count: usize,
    values: Vec<f64>, // NaN marks an absent pair
}

impl ReputationSnapshot {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            values: vec![f64::NAN; node_count * node_count],
        }
    }

    pub fn from_entries(
        node_count: usize,
        entries: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Self {
        let mut snap = Self::new(node_count);
        for (observer, subject, value) in entries {
            snap.set(observer, subject, value);
        }
        snap
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    fn index(&self, observer: NodeId, subject: NodeId) -> usize {
        observer.0 as usize * self.node_count + subject.0 as usize
    }

    pub fn set(&mut self, observer: NodeId, subject: NodeId, value: f64) {
        let i = self.index(observer, subject);
        self.values[i] = value;
    }

    pub fn get(&self, observer: NodeId, subject: NodeId) -> Option<f64> {
        let v = self.values[self.index(observer, subject)];
        (!v.is_nan()).then_some(v)
    }

    /// Number of pairs present.
    pub fn pair_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }

    /// All present pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let n = self.node_count;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_nan())
            .map(move |(i, &v)| (NodeId((i / n) as u32), NodeId((i % n) as u32), v))
    }
}

/// Total and per-pair-normalized absolute reputation change between two
/// consecutive snapshots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaR {
    /// Sum of |curr - prev| over the compared pairs.
    pub raw: f64,
    /// Number of pairs compared (present in both snapshots).
    pub pairs: usize,
}

impl DeltaR {
    /// Raw sum divided by the number of compared pairs; zero when nothing
    /// was comparable.
    pub fn normalized(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.raw / self.pairs as f64
        }
    }
}

/// Absolute reputation change between consecutive snapshots.
///
/// A pair contributes only if it is present in both snapshots; a pair seen
/// for the first time has no previous value to compare against.
pub fn delta_r(prev: &ReputationSnapshot, curr: &ReputationSnapshot) -> DeltaR {
    assert_eq!(
        prev.node_count, curr.node_count,
        "snapshots must cover the same node set"
    );
    let mut raw = 0.0;
    let mut pairs = 0;
    for (p, c) in prev.values.iter().zip(&curr.values) {
        if !p.is_nan() && !c.is_nan() {
            raw += (c - p).abs();
            pairs += 1;
        }
    }
    DeltaR { raw, pairs }
}

/// Fraction of the shared capacity actually delivered this slot.
pub fn utilization(delivered: f64, total_shared_capacity: f64) -> Result<f64, MetricsError> {
    if !total_shared_capacity.is_finite() || total_shared_capacity <= 0.0 {
        return Err(MetricsError::ZeroCapacity(total_shared_capacity));
    }
    Ok(delivered / total_shared_capacity)
}

/// One row of the per-iteration output series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationMetrics {
    /// 1-based slot index.
    pub iteration: u64,
    pub delta_r_raw: f64,
    pub delta_r_norm: f64,
    pub utilization: f64,
}
