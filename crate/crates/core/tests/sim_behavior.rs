//! End-to-end behaviour of the slot simulator.

use std::collections::BTreeMap;

use bluerep::metrics::{delta_r, utilization};
use bluerep::sim::{
    run_simulation, CandidateRange, CapacityProfile, EstimatorKind, Population, SimConfig,
};
use bluerep::trust::NodeId;

fn small_config() -> SimConfig {
    SimConfig {
        node_count: 20,
        iterations: 60,
        acquaintance_iterations: 10,
        rng_seed: 11,
        ..SimConfig::default()
    }
}

#[test]
fn identical_seeds_reproduce_the_report() {
    let cfg = small_config();
    let a = run_simulation(&cfg).unwrap();
    let b = run_simulation(&cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn different_seeds_diverge() {
    let cfg = small_config();
    let a = run_simulation(&cfg).unwrap();
    let b = run_simulation(&SimConfig {
        rng_seed: 12,
        ..cfg
    })
    .unwrap();
    assert_ne!(a.transactions, b.transactions);
}

#[test]
fn two_cooperative_nodes_measure_full_trust() {
    // No over-request and ample supply: the single transaction per side is
    // served whole, so the measured reputation is exactly one.
    let cfg = SimConfig {
        node_count: 2,
        iterations: 1,
        acquaintance_iterations: 0,
        overrequest_factor: 1.0,
        rng_seed: 3,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg).unwrap();
    assert_eq!(report.transactions.len(), 2);
    for t in &report.transactions {
        assert!(t.accepted);
        assert_eq!(t.delivered, t.requested);
    }
    for (&(i, j), &rep) in &report.final_reputations {
        assert_ne!(i, j);
        assert_eq!(rep, 1.0, "{i} -> {j}");
    }
    assert_eq!(report.final_reputations.len(), 2);
}

#[test]
fn per_slot_conservation_holds() {
    let cfg = SimConfig {
        node_count: 30,
        iterations: 40,
        acquaintance_iterations: 5,
        population: Population::Heterogeneous,
        rng_seed: 21,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg).unwrap();

    // Reconstruct per-node capacities the same way the engine draws them:
    // via the population streams. Instead of duplicating that, derive the
    // bounds from the log itself plus the invariants we can check without
    // capacities: allocated <= requested, delivered <= requested.
    for t in &report.transactions {
        assert!(t.allocated >= 0.0 && t.allocated <= t.requested + 1e-9);
        assert!(t.delivered >= 0.0 && t.delivered <= t.allocated + 1e-9);
        assert!(!t.accepted || t.allocated > 0.0);
    }

    // Per-slot, per-provider totals are bounded by what the provider ever
    // allocates in any slot; the tighter upload-capacity bound is checked
    // in the homogeneous test below where capacities are known.
    let mut served: BTreeMap<(u64, NodeId), usize> = BTreeMap::new();
    for t in &report.transactions {
        if t.allocated > 0.0 {
            *served.entry((t.slot, t.provider)).or_default() += 1;
        }
    }
    for (&(slot, provider), &count) in &served {
        assert!(
            count <= 6,
            "provider {provider} served {count} requests in slot {slot}"
        );
    }
}

#[test]
fn per_slot_provider_totals_bounded_by_upload_capacity() {
    let cfg = SimConfig {
        node_count: 25,
        iterations: 30,
        acquaintance_iterations: 5,
        rng_seed: 8,
        ..SimConfig::default()
    };
    let upload = cfg.capacity.upload;
    let max_served = cfg.capacity.max_served as usize;
    let report = run_simulation(&cfg).unwrap();

    let mut allocated: BTreeMap<(u64, NodeId), f64> = BTreeMap::new();
    let mut served: BTreeMap<(u64, NodeId), usize> = BTreeMap::new();
    let mut delivered_by_slot: BTreeMap<u64, f64> = BTreeMap::new();
    for t in &report.transactions {
        *allocated.entry((t.slot, t.provider)).or_default() += t.allocated;
        if t.allocated > 0.0 {
            *served.entry((t.slot, t.provider)).or_default() += 1;
        }
        *delivered_by_slot.entry(t.slot).or_default() += t.delivered;
    }
    for (&(slot, provider), &total) in &allocated {
        assert!(
            total <= upload + 1e-9,
            "provider {provider} allocated {total} in slot {slot}"
        );
    }
    for &count in served.values() {
        assert!(count <= max_served);
    }

    // The emitted utilization matches the log-derived one.
    let shared = upload * cfg.node_count as f64;
    for row in &report.metrics {
        let expected = utilization(delivered_by_slot[&(row.iteration - 1)], shared).unwrap();
        assert!((row.utilization - expected).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&row.utilization));
    }
}

#[test]
fn reputations_stay_in_unit_interval() {
    for kind in [EstimatorKind::Blue, EstimatorKind::Baseline] {
        let cfg = SimConfig {
            estimator_kind: kind,
            ..small_config()
        };
        let report = run_simulation(&cfg).unwrap();
        for bounds in report.reputation_bounds.iter().flatten() {
            assert!(bounds.0 >= 0.0 && bounds.1 <= 1.0, "{kind:?}: {bounds:?}");
        }
        for &rep in report.final_reputations.values() {
            assert!((0.0..=1.0).contains(&rep));
        }
    }
}

#[test]
fn incremental_delta_r_matches_snapshot_diff() {
    // The engine accumulates the reputation change incrementally; diffing
    // the recorded snapshots must give the same series.
    for kind in [EstimatorKind::Blue, EstimatorKind::Baseline] {
        let cfg = SimConfig {
            estimator_kind: kind,
            record_snapshots: true,
            ..small_config()
        };
        let report = run_simulation(&cfg).unwrap();
        assert_eq!(report.snapshots.len(), report.metrics.len());
        assert_eq!(report.metrics[0].delta_r_raw, 0.0);
        for w in 1..report.snapshots.len() {
            let d = delta_r(&report.snapshots[w - 1], &report.snapshots[w]);
            let row = &report.metrics[w];
            assert!(
                (d.raw - row.delta_r_raw).abs() <= 1e-12,
                "{kind:?} slot {w}: snapshot diff {} vs incremental {}",
                d.raw,
                row.delta_r_raw
            );
            assert!((d.normalized() - row.delta_r_norm).abs() <= 1e-12);
        }
    }
}

#[test]
fn fully_served_network_converges_to_clamped_estimate() {
    // No over-request, plentiful supply, providers serving everyone: all
    // samples are 1.0, so the corrected estimate sits at the clamp from
    // the first interaction and never moves down.
    let cfg = SimConfig {
        node_count: 12,
        iterations: 30,
        acquaintance_iterations: 0,
        overrequest_factor: 1.0,
        capacity: CapacityProfile {
            download: 100.0,
            upload: 2000.0,
            max_served: 12,
            ..CapacityProfile::default()
        },
        candidates: CandidateRange { min: 1, max: 4 },
        record_snapshots: true,
        rng_seed: 5,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg).unwrap();
    let mut prev: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for snap in &report.snapshots {
        for (i, j, v) in snap.entries() {
            if let Some(&old) = prev.get(&(i, j)) {
                assert!(v >= old - 1e-12, "estimate moved down for ({i}, {j})");
            }
            prev.insert((i, j), v);
        }
    }
    for &rep in report.final_reputations.values() {
        assert_eq!(rep, 1.0);
    }
}

#[test]
fn free_riders_lose_service_after_acquaintance() {
    let cfg = SimConfig {
        node_count: 30,
        iterations: 80,
        acquaintance_iterations: 10,
        free_rider_fraction: 0.2,
        rng_seed: 17,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg).unwrap();

    // Free riders never allocate, so every sample about them is zero and
    // their reputation collapses; contributors keep positive reputations.
    let mut by_subject: BTreeMap<NodeId, (f64, usize)> = BTreeMap::new();
    for (&(_, subject), &rep) in &report.final_reputations {
        let e = by_subject.entry(subject).or_insert((0.0, 0));
        e.0 += rep;
        e.1 += 1;
    }
    let mut means: Vec<f64> = by_subject
        .values()
        .map(|&(sum, count)| sum / count as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let riders = 6; // floor(0.2 * 30)
    assert!(
        means[riders - 1] < 0.05,
        "free riders should be rated near zero, got {:?}",
        &means[..riders]
    );
    assert!(
        means[riders] > 0.3,
        "contributors should stay clearly above the riders"
    );

    // And they stop receiving service once reputations drive allocation.
    let last_slot = cfg.iterations as u64 - 1;
    let rider_ids: Vec<NodeId> = by_subject
        .iter()
        .filter(|(_, &(sum, count))| sum / (count as f64) < 0.05)
        .map(|(&id, _)| id)
        .collect();
    assert_eq!(rider_ids.len(), riders);
    let late_delivered: f64 = report
        .transactions
        .iter()
        .filter(|t| t.slot == last_slot && rider_ids.contains(&t.requester))
        .map(|t| t.delivered)
        .sum();
    assert_eq!(late_delivered, 0.0);
}

#[test]
fn tcp_caps_reduce_delivery() {
    let mut cfg = SimConfig {
        node_count: 10,
        iterations: 20,
        acquaintance_iterations: 5,
        rng_seed: 30,
        ..SimConfig::default()
    };
    cfg.tcp.enabled = true;
    // Caps around 40-70 units/slot against requests of ~50-100.
    cfg.tcp.w_max = 500.0;
    cfg.tcp.p_range = [0.02, 0.08];
    cfg.tcp.packet_size = 0.5;
    let capped = run_simulation(&cfg).unwrap();

    let mut uncapped_cfg = cfg.clone();
    uncapped_cfg.tcp.enabled = false;
    let uncapped = run_simulation(&uncapped_cfg).unwrap();

    let total =
        |r: &bluerep::SimReport| -> f64 { r.transactions.iter().map(|t| t.delivered).sum() };
    assert!(total(&capped) < total(&uncapped));
    for t in &capped.transactions {
        assert!(t.delivered <= t.allocated + 1e-9);
    }
    // Accepted-but-capped transactions exist.
    assert!(capped
        .transactions
        .iter()
        .any(|t| t.accepted && t.delivered < t.allocated - 1e-9));
}

#[test]
fn report_series_covers_every_iteration() {
    let cfg = small_config();
    let report = run_simulation(&cfg).unwrap();
    assert_eq!(report.metrics.len(), 60);
    for (idx, row) in report.metrics.iter().enumerate() {
        assert_eq!(row.iteration, idx as u64 + 1);
        assert!(row.delta_r_raw >= 0.0);
        assert!(row.delta_r_norm >= 0.0);
    }
    // The first row has nothing to compare against.
    assert_eq!(report.metrics[0].delta_r_raw, 0.0);
    assert_eq!(report.metrics[0].delta_r_norm, 0.0);
}
