//! The slot loop and its five phases.
//!
//! Determinism: every draw comes from a stream derived from
//! `(seed, kind, slot, node)` and all per-node work runs in node-id order,
//! so a `(config, seed)` pair fully determines the report.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::estimator::{
    baseline_estimate, blue_estimate, compute_noise_model, estimate_c1, estimate_c2_global,
    update_ema, EstimatorState,
};
use crate::metrics::{self, IterationMetrics, ReputationSnapshot};
use crate::rng::{derive_rng, StreamKind};
use crate::tcp::{feasible_rate, TcpParams};
use crate::trust::{trust_refused_offer, DeltaPolicy, NodeId, NoiseModel, TrustSample};

use super::{
    CandidateRange, EstimatorKind, PeerNode, Population, SimConfig, SimError, SimReport,
    Transaction,
};

/// Run the configured number of slots and collect the report.
pub fn run_simulation(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    Engine::new(config)?.run()
}

/// Candidate providers for one query: a random subset of the other nodes,
/// its size drawn uniformly from the configured range (clamped to the
/// number of peers available).
pub fn phase_query(
    node_count: u32,
    node: NodeId,
    range: &CandidateRange,
    rng: &mut ChaCha8Rng,
) -> Vec<NodeId> {
    let others = node_count - 1;
    let lo = range.min.clamp(1, others);
    let hi = range.max.clamp(lo, others);
    let count = rng.random_range(lo..=hi) as usize;
    let picks = rand::seq::index::sample(rng, others as usize, count);
    picks
        .iter()
        .map(|idx| {
            let idx = idx as u32;
            // Skip over the querying node itself.
            NodeId(if idx >= node.0 { idx + 1 } else { idx })
        })
        .collect()
}

/// Split the node's over-sized demand evenly across the candidates. The
/// total asked is `download_capacity * overrequest_factor`, never less
/// than the node can absorb.
pub fn phase_request(
    node: &PeerNode,
    slot: u64,
    candidates: &[NodeId],
    overrequest_factor: f64,
) -> Vec<Transaction> {
    let total = node.download_capacity * overrequest_factor;
    let share = total / candidates.len() as f64;
    candidates
        .iter()
        .map(|&provider| Transaction {
            slot,
            requester: node.id,
            provider,
            requested: share,
            allocated: 0.0,
            delivered: 0.0,
            accepted: false,
        })
        .collect()
}

/// Draw up to `k` distinct indices with probability proportional to
/// `weights`. Zero-weight entries are never drawn; the draw stops early
/// once no positive weight remains.
pub fn weighted_sample_without_replacement(
    weights: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut remaining = weights.to_vec();
    let mut picked = Vec::with_capacity(k.min(weights.len()));
    for _ in 0..k {
        let total: f64 = remaining.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut draw = rng.random_range(0.0..total);
        let mut chosen = None;
        for (i, &w) in remaining.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if draw < w {
                chosen = Some(i);
                break;
            }
            draw -= w;
        }
        // Accumulated rounding can push the draw past the last positive
        // weight; fall back to it.
        let i =
            chosen.unwrap_or_else(|| remaining.iter().rposition(|&w| w > 0.0).expect("total > 0"));
        picked.push(i);
        remaining[i] = 0.0;
    }
    picked
}

/// Allocate the provider's upload among at most `max_served_requests`
/// requesters.
///
/// Selection samples without replacement with probability proportional to
/// the requesters' reputation weights; during the acquaintance period it
/// is uniform instead. The selected requesters share the capacity in
/// proportion to what they asked, capped at their own request.
///
/// Returns the allocated amount per request, in input order.
pub fn phase_allocate(
    upload_capacity: f64,
    max_served_requests: u32,
    requested: &[f64],
    weights: &[f64],
    acquaintance: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    assert_eq!(requested.len(), weights.len(), "one weight per request");
    let mut alloc = vec![0.0; requested.len()];
    if upload_capacity <= 0.0 || requested.is_empty() {
        return alloc;
    }
    let uniform;
    let effective = if acquaintance {
        uniform = vec![1.0; weights.len()];
        &uniform
    } else {
        weights
    };
    let k = (max_served_requests as usize).min(requested.len());
    let selected = weighted_sample_without_replacement(effective, k, rng);
    let demand: f64 = selected.iter().map(|&i| requested[i]).sum();
    if demand <= 0.0 {
        return alloc;
    }
    for &i in &selected {
        alloc[i] = (upload_capacity * requested[i] / demand).min(requested[i]);
    }
    alloc
}

/// Requester-side settlement of one node's slot transactions, in stub
/// order: offers are taken until the download budget runs out (a fully
/// crowded-out offer counts as declined), and each accepted delivery is
/// capped by the link model when one is configured.
pub fn phase_transact(
    download_capacity: f64,
    transactions: &mut [Transaction],
    link_cap: impl Fn(NodeId, NodeId) -> Option<f64>,
) {
    let mut budget = download_capacity;
    for t in transactions.iter_mut() {
        if t.allocated <= 0.0 {
            continue; // no offer was made
        }
        let take = t.allocated.min(budget);
        if take <= 0.0 {
            t.accepted = false;
            continue;
        }
        t.accepted = true;
        t.delivered = match link_cap(t.requester, t.provider) {
            Some(cap) => take.min(cap),
            None => take,
        };
        budget -= take;
    }
}

/// Fold the slot's completed transactions into the node's reputation
/// table: a measured received/requested ratio per served request, the
/// delta credit per declined offer, and a zero sample per request that
/// drew no offer at all. Returns the subjects whose state changed.
pub fn phase_update_reputation(
    node: &mut PeerNode,
    transactions: &[Transaction],
    template: &EstimatorState,
) -> Result<Vec<NodeId>, SimError> {
    let mut updated = Vec::with_capacity(transactions.len());
    for t in transactions {
        debug_assert_eq!(t.requester, node.id);
        let state = node
            .reputation_table
            .entry(t.provider)
            .or_insert_with(|| template.clone());
        let sample = if t.allocated <= 0.0 {
            0.0
        } else if !t.accepted {
            trust_refused_offer(&node.delta_policy)
        } else {
            TrustSample::measured(
                node.id,
                t.provider,
                state.sample_count() + 1,
                t.requested,
                t.delivered,
            )?
            .value()
        };
        *state = update_ema(state, sample)?;
        updated.push(t.provider);
    }
    Ok(updated)
}

fn queryable_estimate(
    state: &EstimatorState,
    kind: EstimatorKind,
    noise: &NoiseModel,
) -> Result<f64, SimError> {
    let value = match kind {
        EstimatorKind::Blue => blue_estimate(state, noise)?.value,
        EstimatorKind::Baseline => baseline_estimate(state)?,
    };
    Ok(value)
}

struct Engine {
    config: SimConfig,
    nodes: Vec<PeerNode>,
    /// Sum of upload capacity over contributing nodes; the utilization
    /// denominator and the c2 numerator.
    shared_capacity: f64,
    /// Per-link delivery caps in resource units per slot, row-major by
    /// (requester, provider); present only when the TCP model is enabled.
    link_caps: Option<Vec<f64>>,
    /// Current queryable estimate per (observer, subject), NaN when the
    /// pair never interacted.
    estimates: Vec<f64>,
    pair_count: usize,
}

impl Engine {
    fn new(config: &SimConfig) -> Result<Self, SimError> {
        let n = config.node_count as usize;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let (download, upload, max_served) = match config.population {
                Population::Homogeneous => (
                    config.capacity.download,
                    config.capacity.upload,
                    config.capacity.max_served,
                ),
                Population::Heterogeneous => {
                    let mut rng = derive_rng(config.rng_seed, StreamKind::Population, 0, i as u64);
                    let [dl, dh] = config.capacity.download_range;
                    let [ul, uh] = config.capacity.upload_range;
                    let [ml, mh] = config.capacity.max_served_range;
                    (
                        rng.random_range(dl..=dh),
                        rng.random_range(ul..=uh),
                        rng.random_range(ml..=mh),
                    )
                }
            };
            nodes.push(PeerNode {
                id: NodeId(i as u32),
                download_capacity: download,
                upload_capacity: upload,
                max_served_requests: max_served,
                free_rider: false,
                reputation_table: BTreeMap::new(),
                delta_policy: DeltaPolicy::new(config.delta, download, 0.0)?,
            });
        }

        let free_riders = (config.free_rider_fraction * n as f64).floor() as usize;
        if free_riders > 0 {
            let mut rng = derive_rng(config.rng_seed, StreamKind::Population, 1, 0);
            for idx in rand::seq::index::sample(&mut rng, n, free_riders) {
                nodes[idx].free_rider = true;
            }
        }

        let shared_capacity = nodes
            .iter()
            .filter(|p| !p.free_rider)
            .map(|p| p.upload_capacity)
            .sum();

        let link_caps = if config.tcp.enabled {
            let tcp = &config.tcp;
            let mut caps = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut rng = derive_rng(config.rng_seed, StreamKind::Link, i as u64, j as u64);
                    let p = rng.random_range(tcp.p_range[0]..=tcp.p_range[1]);
                    let params = TcpParams::new(tcp.w_max, tcp.rtt, tcp.t0, tcp.b, p)?;
                    caps.push(feasible_rate(&params) * tcp.packet_size * tcp.slot_seconds);
                }
            }
            Some(caps)
        } else {
            None
        };

        Ok(Self {
            config: config.clone(),
            nodes,
            shared_capacity,
            link_caps,
            estimates: vec![f64::NAN; n * n],
            pair_count: 0,
        })
    }

    fn run(mut self) -> Result<SimReport, SimError> {
        let n = self.nodes.len();
        let config = self.config.clone();
        let seed = config.rng_seed;
        let template = EstimatorState::with_window_cap(config.alpha, config.window as usize)?;

        let iterations = config.iterations as usize;
        let mut report = SimReport {
            metrics: Vec::with_capacity(iterations),
            reputation_bounds: Vec::with_capacity(iterations),
            transactions: Vec::new(),
            final_reputations: BTreeMap::new(),
            snapshots: Vec::new(),
        };

        // The demand a node places per slot is fixed by its capacity, so
        // the supply/demand ratio (and with it every node's noise model)
        // is constant over the run; computing it from the same expressions
        // each slot keeps non-updated estimates bit-identical between
        // snapshots.
        let requests_made: Vec<f64> = self
            .nodes
            .iter()
            .map(|p| p.download_capacity * config.overrequest_factor)
            .collect();
        let total_requests: f64 = requests_made.iter().sum();
        let c2 = estimate_c2_global(self.shared_capacity, total_requests)?;
        let noise: Vec<NoiseModel> = self
            .nodes
            .iter()
            .zip(&requests_made)
            .map(|(p, &made)| {
                let c1 = estimate_c1(made, p.download_capacity)?;
                compute_noise_model(c1, c2, config.sigma)
            })
            .collect::<Result<_, _>>()?;

        for slot in 0..config.iterations as u64 {
            let acquaintance = slot < config.acquaintance_iterations as u64;

            // Phases 1 and 2: per-node candidate discovery and requests.
            let mut stubs: Vec<Vec<Transaction>> = Vec::with_capacity(n);
            for (i, made) in requests_made.iter().enumerate() {
                let mut rng = derive_rng(seed, StreamKind::Query, slot, i as u64);
                let candidates =
                    phase_query(n as u32, self.nodes[i].id, &config.candidates, &mut rng);
                stubs.push(phase_request(
                    &self.nodes[i],
                    slot,
                    &candidates,
                    config.overrequest_factor,
                ));
                self.nodes[i].delta_policy =
                    DeltaPolicy::new(config.delta, self.nodes[i].download_capacity, *made)?;
            }

            // Phase 3: allocation per provider.
            let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
            for (i, txs) in stubs.iter().enumerate() {
                for (k, t) in txs.iter().enumerate() {
                    incoming[t.provider.0 as usize].push((i, k));
                }
            }
            for (j, offers) in incoming.iter().enumerate() {
                if offers.is_empty() {
                    continue;
                }
                let requested: Vec<f64> =
                    offers.iter().map(|&(i, k)| stubs[i][k].requested).collect();
                let weights: Vec<f64> = offers
                    .iter()
                    .map(|&(i, _)| {
                        let cell = self.estimates[j * n + i];
                        if cell.is_nan() {
                            config.prior()
                        } else {
                            cell
                        }
                    })
                    .collect();
                let provider = &self.nodes[j];
                let upload = if provider.free_rider {
                    0.0
                } else {
                    provider.upload_capacity
                };
                let mut rng = derive_rng(seed, StreamKind::Allocate, slot, j as u64);
                let alloc = phase_allocate(
                    upload,
                    provider.max_served_requests,
                    &requested,
                    &weights,
                    acquaintance,
                    &mut rng,
                );
                for (&(i, k), a) in offers.iter().zip(alloc) {
                    stubs[i][k].allocated = a;
                }
            }

            // Phase 4: requester-side settlement.
            for (i, txs) in stubs.iter_mut().enumerate() {
                let capacity = self.nodes[i].download_capacity;
                let caps = &self.link_caps;
                phase_transact(capacity, txs, |r, p| {
                    caps.as_ref().map(|c| c[r.0 as usize * n + p.0 as usize])
                });
            }
            let delivered_total: f64 = stubs.iter().flatten().map(|t| t.delivered).sum();

            // Phase 5: reputation updates, with the reputation change
            // accumulated over exactly the pairs present in both the
            // previous and the current snapshot.
            let prev_pairs = self.pair_count;
            let mut delta_raw = 0.0;
            for i in 0..n {
                let updated = {
                    let node = &mut self.nodes[i];
                    phase_update_reputation(node, &stubs[i], &template)?
                };
                for subject in updated {
                    let state = &self.nodes[i].reputation_table[&subject];
                    let est = queryable_estimate(state, config.estimator_kind, &noise[i])?;
                    let cell = i * n + subject.0 as usize;
                    let old = self.estimates[cell];
                    if old.is_nan() {
                        self.pair_count += 1;
                    } else {
                        delta_raw += (est - old).abs();
                    }
                    self.estimates[cell] = est;
                }
            }

            let delta_norm = if prev_pairs == 0 {
                0.0
            } else {
                delta_raw / prev_pairs as f64
            };
            report.metrics.push(IterationMetrics {
                iteration: slot + 1,
                delta_r_raw: delta_raw,
                delta_r_norm: delta_norm,
                utilization: metrics::utilization(delivered_total, self.shared_capacity)?,
            });

            let mut bounds: Option<(f64, f64)> = None;
            for &v in &self.estimates {
                if v.is_nan() {
                    continue;
                }
                bounds = Some(match bounds {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
            report.reputation_bounds.push(bounds);

            if config.record_snapshots {
                report.snapshots.push(self.snapshot());
            }

            for txs in stubs {
                report.transactions.extend(txs);
            }
        }

        report.final_reputations = self
            .snapshot()
            .entries()
            .map(|(i, j, v)| ((i, j), v))
            .collect();
        Ok(report)
    }

    fn snapshot(&self) -> ReputationSnapshot {
        let n = self.nodes.len();
        ReputationSnapshot::from_entries(
            n,
            self.estimates
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_nan())
                .map(|(idx, &v)| (NodeId((idx / n) as u32), NodeId((idx % n) as u32), v)),
        )
    }
}
