//! Experiment driver: seeded simulation sweeps with CSV time series and a
//! JSON manifest for downstream plotting.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::IterationMetrics;
use crate::sim::{run_simulation, EstimatorKind, Population, SimConfig, SimError, SimReport};

/// Default cap on the number of runs an experiment may expand to.
pub const DEFAULT_MAX_RUNS: usize = 64;

pub const CSV_HEADER: &str = "iteration,delta_r_raw,delta_r_norm,utilization";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment needs at least one seed")]
    NoSeeds,
    #[error("sweep expands to {runs} runs, above the cap of {cap}")]
    TooManyRuns { runs: usize, cap: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{path}:{line}: bad series row: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Value lists to sweep over; an empty list keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub alpha: Vec<f64>,
    pub estimator_kind: Vec<EstimatorKind>,
    pub population: Vec<Population>,
}

/// A base configuration, the sweep lists, and the seeds to repeat each
/// sweep point with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub base: SimConfig,
    pub sweeps: SweepSpec,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub max_runs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            base: SimConfig::default(),
            sweeps: SweepSpec::default(),
            seeds: vec![1],
            output_dir: PathBuf::from("out"),
            max_runs: DEFAULT_MAX_RUNS,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text)
    }

    /// The named experiment presets: 200 nodes, 500 iterations, a
    /// 50-iteration acquaintance period, delta 0.3, sweeping alpha over
    /// {0.1, 0.3} and both estimators, across five seeds.
    pub fn preset(name: &str) -> Option<Self> {
        let population = match name {
            "paper-homogeneous" => Population::Homogeneous,
            "paper-heterogeneous" => Population::Heterogeneous,
            _ => return None,
        };
        Some(Self {
            base: SimConfig {
                population,
                ..SimConfig::default()
            },
            sweeps: SweepSpec {
                alpha: vec![0.1, 0.3],
                estimator_kind: vec![EstimatorKind::Blue, EstimatorKind::Baseline],
                population: vec![population],
            },
            seeds: vec![1, 2, 3, 4, 5],
            output_dir: PathBuf::from("out").join(name),
            max_runs: DEFAULT_MAX_RUNS,
        })
    }

    /// Resolved (config, seed) pairs of the sweep cross-product, in
    /// deterministic order.
    pub fn runs(&self) -> Result<Vec<SimConfig>, ExperimentError> {
        if self.seeds.is_empty() {
            return Err(ExperimentError::NoSeeds);
        }
        let pick = |list: &[f64], base: f64| -> Vec<f64> {
            if list.is_empty() {
                vec![base]
            } else {
                list.to_vec()
            }
        };
        let alphas = pick(&self.sweeps.alpha, self.base.alpha);
        let kinds = if self.sweeps.estimator_kind.is_empty() {
            vec![self.base.estimator_kind]
        } else {
            self.sweeps.estimator_kind.clone()
        };
        let populations = if self.sweeps.population.is_empty() {
            vec![self.base.population]
        } else {
            self.sweeps.population.clone()
        };

        let mut runs = Vec::new();
        for &population in &populations {
            for &kind in &kinds {
                for &alpha in &alphas {
                    for &seed in &self.seeds {
                        runs.push(SimConfig {
                            population,
                            estimator_kind: kind,
                            alpha,
                            rng_seed: seed,
                            ..self.base.clone()
                        });
                    }
                }
            }
        }
        if runs.len() > self.max_runs {
            return Err(ExperimentError::TooManyRuns {
                runs: runs.len(),
                cap: self.max_runs,
            });
        }
        Ok(runs)
    }
}

/// One manifest row per emitted series file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub estimator: String,
    pub alpha: f64,
    pub population: String,
    pub config_hash: String,
}

fn series_file_name(config: &SimConfig) -> String {
    format!(
        "{}_{}_alpha{}_seed{}.csv",
        config.population.as_str(),
        config.estimator_kind.as_str(),
        config.alpha,
        config.rng_seed
    )
}

/// Run every sweep point for every seed and write one CSV per run plus a
/// `manifest.json`. Returns the written paths, manifest last. Re-running
/// the same spec reproduces every file byte for byte.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<PathBuf>, ExperimentError> {
    let runs = spec.runs()?;
    fs::create_dir_all(&spec.output_dir).map_err(io_err(&spec.output_dir))?;

    let outcomes: Vec<Result<(PathBuf, ManifestEntry), ExperimentError>> = runs
        .par_iter()
        .map(|config| {
            let report = run_simulation(config)?;
            let name = series_file_name(config);
            let path = spec.output_dir.join(&name);
            emit_series(&report, &path)?;
            Ok((
                path,
                ManifestEntry {
                    file: name,
                    seed: config.rng_seed,
                    estimator: config.estimator_kind.as_str().to_string(),
                    alpha: config.alpha,
                    population: config.population.as_str().to_string(),
                    config_hash: config.digest(),
                },
            ))
        })
        .collect();

    let mut files = Vec::with_capacity(outcomes.len() + 1);
    let mut entries = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let (path, entry) = outcome?;
        files.push(path);
        entries.push(entry);
    }

    let manifest_path = spec.output_dir.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&entries).expect("manifest serializes");
    body.push('\n');
    fs::write(&manifest_path, body).map_err(io_err(&manifest_path))?;
    files.push(manifest_path);
    Ok(files)
}

fn format_value(v: f64) -> String {
    // 17 significant digits: enough for an exact f64 round-trip.
    format!("{v:.16e}")
}

/// Write the per-iteration series of a report: the fixed header plus one
/// row per iteration, floats at full precision.
pub fn emit_series(report: &SimReport, path: &Path) -> Result<(), ExperimentError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &report.metrics {
            writeln!(
                out,
                "{},{},{},{}",
                row.iteration,
                format_value(row.delta_r_raw),
                format_value(row.delta_r_norm),
                format_value(row.utilization),
            )?;
        }
        out.flush()
    })()
    .map_err(io_err(path))?;
    Ok(())
}

/// Read a series file back into metric rows.
pub fn parse_series(path: &Path) -> Result<Vec<IterationMetrics>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, reason: &str| ExperimentError::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let mut fields = line.split(',');
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| bad(idx + 1, &format!("missing {what}")))
        };
        let iteration = next("iteration")?
            .parse::<u64>()
            .map_err(|e| bad(idx + 1, &e.to_string()))?;
        let mut float = |what: &str| -> Result<f64, ExperimentError> {
            next(what)?
                .parse::<f64>()
                .map_err(|e| bad(idx + 1, &e.to_string()))
        };
        rows.push(IterationMetrics {
            iteration,
            delta_r_raw: float("delta_r_raw")?,
            delta_r_norm: float("delta_r_norm")?,
            utilization: float("utilization")?,
        });
    }
    Ok(rows)
}
