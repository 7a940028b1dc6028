//! The `bluerep` binary and the experiment file outputs.

use std::fs;
use std::process::Command;

use bluerep::experiment::{
    emit_series, parse_series, run_experiment, ExperimentSpec, ManifestEntry,
};
use bluerep::sim::{run_simulation, SimConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bluerep"))
}

const TINY_SPEC: &str = r#"
seeds = [7]

[base]
node_count = 12
iterations = 25
acquaintance_iterations = 5

[sweeps]
estimator_kind = ["blue", "baseline"]
"#;

#[test]
fn run_subcommand_with_config_writes_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("exp.toml");
    fs::write(&spec_path, TINY_SPEC).unwrap();
    let out_dir = dir.path().join("series");

    let output = bin()
        .args(["run", "--config"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    let manifest: Vec<ManifestEntry> =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.len(), 2);

    // No orphans: the manifest lists exactly the CSV files present.
    let mut on_disk: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|name| name.ends_with(".csv"))
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = manifest.iter().map(|m| m.file.clone()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);

    for entry in &manifest {
        assert_eq!(entry.seed, 7);
        assert_eq!(entry.config_hash.len(), 64);
        let rows = parse_series(&out_dir.join(&entry.file)).unwrap();
        assert_eq!(rows.len(), 25);
        assert_eq!(rows[0].iteration, 1);
        assert_eq!(rows[0].delta_r_raw, 0.0);
    }
}

#[test]
fn seed_flag_overrides_spec_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("exp.toml");
    fs::write(&spec_path, TINY_SPEC).unwrap();
    let out_dir = dir.path().join("series");

    let output = bin()
        .args(["run", "--config"])
        .arg(&spec_path)
        .arg("--out")
        .arg(&out_dir)
        .args(["--seed", "3", "--seed", "4"])
        .output()
        .unwrap();
    assert!(output.status.success());

    let manifest: Vec<ManifestEntry> =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let mut seeds: Vec<u64> = manifest.iter().map(|m| m.seed).collect();
    seeds.sort();
    seeds.dedup();
    assert_eq!(seeds, vec![3, 4]);
    assert_eq!(manifest.len(), 4);
}

#[test]
fn unknown_preset_fails_cleanly() {
    let output = bin().args(["run", "--preset", "nope"]).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown preset"), "stderr: {stderr}");
}

#[test]
fn config_and_preset_conflict() {
    let output = bin()
        .args(["run", "--config", "x.toml", "--preset", "paper-homogeneous"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}

#[test]
fn missing_source_is_an_error() {
    let output = bin().args(["run"]).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--config or --preset"), "stderr: {stderr}");
}

#[test]
fn emitted_series_round_trips_to_full_precision() {
    let cfg = SimConfig {
        node_count: 10,
        iterations: 30,
        acquaintance_iterations: 5,
        rng_seed: 99,
        ..SimConfig::default()
    };
    let report = run_simulation(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    emit_series(&report, &path).unwrap();

    let rows = parse_series(&path).unwrap();
    assert_eq!(rows.len(), report.metrics.len());
    for (parsed, original) in rows.iter().zip(&report.metrics) {
        assert_eq!(parsed.iteration, original.iteration);
        assert_eq!(parsed.delta_r_raw.to_bits(), original.delta_r_raw.to_bits());
        assert_eq!(
            parsed.delta_r_norm.to_bits(),
            original.delta_r_norm.to_bits()
        );
        assert_eq!(parsed.utilization.to_bits(), original.utilization.to_bits());
    }
}

#[test]
fn empty_report_emits_header_only() {
    let report = bluerep::SimReport {
        metrics: vec![],
        reputation_bounds: vec![],
        transactions: vec![],
        final_reputations: Default::default(),
        snapshots: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_series(&report, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, "iteration,delta_r_raw,delta_r_norm,utilization\n");
    assert!(parse_series(&path).unwrap().is_empty());
}

#[test]
fn rerunning_a_spec_overwrites_with_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        base: SimConfig {
            node_count: 10,
            iterations: 20,
            acquaintance_iterations: 4,
            ..SimConfig::default()
        },
        seeds: vec![5],
        output_dir: dir.path().join("out"),
        ..ExperimentSpec::default()
    };
    let files = run_experiment(&spec).unwrap();
    // One seed, no sweeps: exactly one series plus the manifest.
    assert_eq!(files.len(), 2);
    assert!(files[1].ends_with("manifest.json"));
    let before: Vec<Vec<u8>> = files.iter().map(|f| fs::read(f).unwrap()).collect();
    let files_again = run_experiment(&spec).unwrap();
    assert_eq!(files, files_again);
    for (path, old) in files.iter().zip(before) {
        assert_eq!(fs::read(path).unwrap(), old, "{path:?} changed on re-run");
    }
}

#[test]
fn parse_rejects_foreign_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(parse_series(&path).is_err());
    fs::write(
        &path,
        "iteration,delta_r_raw,delta_r_norm,utilization\n1,0.0,oops,0.0\n",
    )
    .unwrap();
    assert!(parse_series(&path).is_err());
}
