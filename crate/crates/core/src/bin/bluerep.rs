use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bluerep::experiment::{run_experiment, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "bluerep",
    version,
    about = "P2P reputation estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation experiment from a config file or a named preset.
    Run {
        /// TOML experiment spec.
        #[arg(long, value_name = "FILE", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in experiment: paper-homogeneous or paper-heterogeneous.
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Output directory (overrides the experiment file).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Seed(s) to run (repeatable; overrides the experiment file).
        #[arg(long = "seed", value_name = "U64")]
        seeds: Vec<u64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            seeds,
        } => {
            let mut spec = match (config, preset) {
                (Some(path), None) => ExperimentSpec::load(&path).map_err(|e| e.to_string())?,
                (None, Some(name)) => ExperimentSpec::preset(&name).ok_or_else(|| {
                    format!(
                        "unknown preset '{name}' (try paper-homogeneous or paper-heterogeneous)"
                    )
                })?,
                (None, None) => return Err("one of --config or --preset is required".into()),
                (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
            };
            if let Some(dir) = out {
                spec.output_dir = dir;
            }
            if !seeds.is_empty() {
                spec.seeds = seeds;
            }
            let files = run_experiment(&spec).map_err(|e| e.to_string())?;
            for f in &files {
                println!("{}", f.display());
            }
            eprintln!(
                "wrote {} files to {}",
                files.len(),
                spec.output_dir.display()
            );
            Ok(())
        }
    }
}
