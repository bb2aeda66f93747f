use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rllq_cli::config::{self, Algo, Overrides, RunConfig};
use rllq_cli::runner;
use rllq_cli::HarnessError;

/// Simulation harness for continuous-time linear-quadratic reinforcement
/// learning: runs the model-free actor-critic learner or its model-based
/// baseline over seeded replications and writes per-episode CSV artifacts.
#[derive(Parser, Debug)]
#[command(name = "rllq", version)]
struct Cli {
    /// Path to an INI-style config file; missing keys take the benchmark
    /// defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Algorithm to run.
    #[arg(long, value_parser = ["rllq", "baseline"])]
    algo: Option<String>,
    /// Number of episodes per replication.
    #[arg(long)]
    episodes: Option<u64>,
    /// Number of independent replications.
    #[arg(long)]
    replications: Option<u64>,
    /// Base seed; replication i uses the stream derived from (seed, i).
    #[arg(long)]
    seed: Option<u64>,
    /// Simulation step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory for episodes.csv, aggregate.csv and summary.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size (falls back to RLLQ_WORKERS, then CPU count).
    #[arg(long)]
    workers: Option<u64>,
    /// Slope fit window as LO:HI episode indices (default N/10:N).
    #[arg(long, value_name = "LO:HI")]
    fit_window: Option<String>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        algo: match cli.algo.as_deref() {
            Some("rllq") => Some(Algo::Rllq),
            Some("baseline") => Some(Algo::Baseline),
            _ => None,
        },
        episodes: cli.episodes,
        replications: cli.replications,
        seed: cli.seed,
        dt: cli.dt,
        out: cli.out.clone(),
        workers: config::resolve_workers(
            cli.workers,
            std::env::var("RLLQ_WORKERS").ok().as_deref(),
            None,
        )?,
        fit_window: cli
            .fit_window
            .as_deref()
            .map(config::parse_fit_window)
            .transpose()?,
    };
    cfg.apply(&overrides)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = build_config(cli)?;
    let artifacts = runner::run_experiment(&cfg)?;
    println!(
        "wrote {} ({} replications x {} episodes, {:.3}s)",
        artifacts.out_dir.display(),
        cfg.replications,
        cfg.episodes,
        artifacts.wall_clock_seconds
    );
    if let Some(fit) = &artifacts.mse_slope {
        println!("mse_slope = {:.4}", fit.slope);
    }
    if let Some(fit) = &artifacts.regret_slope {
        println!("regret_slope = {:.4}", fit.slope);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ HarnessError::Config(_)) => {
            eprintln!("{err}");
            ExitCode::from(2)
        }
        Err(err @ HarnessError::Runtime(_)) => {
            eprintln!("{err}");
            ExitCode::from(3)
        }
    }
}
