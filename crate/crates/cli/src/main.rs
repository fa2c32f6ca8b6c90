//! Command-line front end for the table-tennis learning laboratory.

mod commands;
mod config;
mod manifest;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rallysim", version, about = "Desk-scale robotic table-tennis learning lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy with evolutionary strategies.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["desk", "paper"])]
        profile: Option<String>,
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the iteration budget.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Evaluate a checkpoint (hit + land scoring, max return 2.0).
    Eval {
        /// Checkpoint JSON (e.g. runs/train/ckpt/final.json).
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["desk", "paper", "reference"])]
        profile: Option<String>,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sim-to-sim transfer study (train variants, evaluate on the
    /// reference environment).
    Study {
        /// Built-in kind (latency, ball_distribution, observation_noise,
        /// physical_params, es_ablation, task_space) or a spec TOML path.
        kind: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["desk", "paper"], default_value = "desk")]
        profile: String,
        #[arg(long, default_value = "runs/study")]
        out: PathBuf,
        /// Comma-separated training seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Quantify stereo triangulation bias for camera placements.
    BiasStudy {
        #[arg(long, default_value = "runs/bias")]
        out: PathBuf,
        /// Ball height above the table (m).
        #[arg(long, default_value_t = 0.25)]
        height: f64,
        #[arg(long, default_value_t = 20000)]
        samples: usize,
        /// Detection noise sigma in pixels.
        #[arg(long, default_value_t = 0.5)]
        sigma_px: f64,
        /// Disable pixel quantization.
        #[arg(long)]
        no_quantize: bool,
    },
    /// Aggregate run/study directories into a report.
    Report {
        dirs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, profile, out, workers, seed, iterations } => {
            let mut cfg = config::load_run_config(config.as_deref(), profile.as_deref())?;
            if let Some(w) = workers {
                cfg.trainer.workers = w;
            }
            if let Some(s) = seed {
                cfg.trainer.seed = s;
                cfg.env.seed = s;
            }
            if let Some(it) = iterations {
                cfg.trainer.iterations = it;
            }
            commands::train::run(&cfg, &out, false)?;
            Ok(())
        }
        Command::Eval { checkpoint, config, profile, episodes, seed, out } => {
            let cfg = config::load_run_config(config.as_deref(), profile.as_deref())?;
            commands::eval::run(&cfg, &checkpoint, episodes, seed, out.as_deref())?;
            Ok(())
        }
        Command::Study { kind, config, profile, out, seeds } => {
            commands::study::run(config.as_deref(), Some(&profile), &kind, &out, seeds)
        }
        Command::BiasStudy { out, height, samples, sigma_px, no_quantize } => {
            commands::bias::run(&out, height, samples, sigma_px, !no_quantize)
        }
        Command::Report { dirs, out } => commands::report::run(&dirs, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Config problems exit 2, runtime failures exit 1.
            let msg = format!("{err:#}");
            if msg.contains("config") || msg.contains("TOML") || msg.contains("schema") {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
