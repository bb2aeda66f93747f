//! Parallel replication execution and artifact writing.
//!
//! Replications are embarrassingly parallel: worker `w` of `K` runs
//! replication indices `w, w+K, ...`, each on its own random stream derived
//! from `(base_seed, replication_index)`. Results are merged in replication
//! order, so `episodes.csv` and `aggregate.csv` are byte-identical across
//! reruns regardless of the worker count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Instant;

use rllq_core::metrics::{self, AggregateSeries, EpisodeRecord, SlopeFit};
use rllq_core::sim::SeedSpec;
use rllq_core::{actor_critic, baseline};

use crate::config::{Algo, RunConfig};
use crate::{HarnessError, Result};

/// One replication's merged outcome, independent of the algorithm.
struct ReplicationOutput {
    records: Vec<EpisodeRecord>,
    flagged: u64,
    final_gain: f64,
}

/// Everything `run_experiment` produced.
pub struct ExperimentArtifacts {
    pub out_dir: PathBuf,
    pub episodes_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub summary_txt: PathBuf,
    pub aggregate: AggregateSeries,
    pub mse_slope: Option<SlopeFit>,
    pub regret_slope: Option<SlopeFit>,
    pub optimal_gain: f64,
    pub final_mean_gain: f64,
    pub flagged_episodes: u64,
    pub wall_clock_seconds: f64,
}

fn run_one(config: &RunConfig, index: u64) -> Result<ReplicationOutput> {
    let seed = SeedSpec::new(config.base_seed, index);
    match config.algo {
        Algo::Rllq => {
            let out = actor_critic::run_replication(&config.rllq_config(), seed)?;
            Ok(ReplicationOutput {
                records: out.records,
                flagged: out.flagged_episodes,
                final_gain: out.final_gain,
            })
        }
        Algo::Baseline => {
            let out = baseline::run_replication(&config.baseline_config(), seed)?;
            Ok(ReplicationOutput {
                records: out.records,
                flagged: out.flagged_episodes,
                final_gain: out.final_estimate.point_gain(),
            })
        }
    }
}

fn worker_count(config: &RunConfig) -> u64 {
    let auto = || {
        std::thread::available_parallelism()
            .map(|n| n.get() as u64)
            .unwrap_or(1)
    };
    config
        .workers
        .unwrap_or_else(auto)
        .clamp(1, config.replications.max(1))
}

fn run_all(config: &RunConfig) -> Result<Vec<ReplicationOutput>> {
    let replications = config.replications;
    let workers = worker_count(config);
    let mut slots: Vec<Option<Result<ReplicationOutput>>> =
        (0..replications).map(|_| None).collect();

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for w in 0..workers {
            let tx = tx.clone();
            scope.spawn(move || {
                let mut index = w;
                while index < replications {
                    let out = run_one(config, index);
                    if tx.send((index, out)).is_err() {
                        return;
                    }
                    index += workers;
                }
            });
        }
        drop(tx);
        for (index, out) in rx {
            slots[index as usize] = Some(out);
        }
    });

    slots
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.unwrap_or_else(|| {
                Err(HarnessError::Runtime(format!(
                    "replication {i} produced no result"
                )))
            })
        })
        .collect()
}

/// Scientific notation with 17 significant digits; round-trips exactly.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_episodes_csv(path: &PathBuf, reps: &[ReplicationOutput]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"replication,episode,phi1,phi2,regret_increment,cum_regret,sq_error\n")?;
    for (index, rep) in reps.iter().enumerate() {
        for r in &rep.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                index,
                r.episode,
                fmt_float(r.gain),
                fmt_float(r.variance),
                fmt_float(r.regret_increment),
                fmt_float(r.cum_regret),
                fmt_float(r.sq_error),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate_csv(path: &PathBuf, agg: &AggregateSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"episode,mean_sq_error,mean_cum_regret\n")?;
    for k in 0..agg.episodes.len() {
        writeln!(
            w,
            "{},{},{}",
            agg.episodes[k],
            fmt_float(agg.mean_sq_error[k]),
            fmt_float(agg.mean_cum_regret[k]),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn slope_or_nan(fit: &Option<SlopeFit>) -> f64 {
    fit.as_ref().map(|f| f.slope).unwrap_or(f64::NAN)
}

/// Runs all replications, writes `episodes.csv`, `aggregate.csv` and
/// `summary.txt` into the configured output directory, and returns the
/// in-memory results.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentArtifacts> {
    config.validate()?;
    let started = Instant::now();

    let reps = run_all(config)?;
    let flagged_episodes: u64 = reps.iter().map(|r| r.flagged).sum();
    let final_mean_gain =
        reps.iter().map(|r| r.final_gain).sum::<f64>() / config.replications as f64;

    std::fs::create_dir_all(&config.out_dir)?;
    let episodes_csv = config.out_dir.join("episodes.csv");
    let aggregate_csv = config.out_dir.join("aggregate.csv");
    let summary_txt = config.out_dir.join("summary.txt");

    write_episodes_csv(&episodes_csv, &reps)?;

    let records: Vec<Vec<EpisodeRecord>> = reps.into_iter().map(|r| r.records).collect();
    let aggregate = metrics::aggregate(&records)?;
    write_aggregate_csv(&aggregate_csv, &aggregate)?;

    let window = config.fit_window();
    let mse_slope =
        metrics::loglog_slope(&aggregate.episodes, &aggregate.mean_sq_error, window).ok();
    let regret_slope =
        metrics::loglog_slope(&aggregate.episodes, &aggregate.mean_cum_regret, window).ok();

    let optimal_gain = rllq_core::oracle::optimal_gain(&config.model)?;
    let wall_clock_seconds = started.elapsed().as_secs_f64();

    let mut s = String::new();
    s.push_str(&config.echo());
    s.push_str("[results]\n");
    s.push_str(&format!("optimal_gain = {}\n", fmt_float(optimal_gain)));
    s.push_str(&format!(
        "final_mean_phi1 = {}\n",
        fmt_float(final_mean_gain)
    ));
    s.push_str(&format!(
        "mse_slope = {}\n",
        fmt_float(slope_or_nan(&mse_slope))
    ));
    s.push_str(&format!(
        "regret_slope = {}\n",
        fmt_float(slope_or_nan(&regret_slope))
    ));
    s.push_str(&format!("fit_window = {}:{}\n", window.0, window.1));
    s.push_str(&format!("flagged_episodes = {flagged_episodes}\n"));
    s.push_str(&format!("wall_clock_seconds = {wall_clock_seconds:.3}\n"));
    std::fs::write(&summary_txt, s)?;

    Ok(ExperimentArtifacts {
        out_dir: config.out_dir.clone(),
        episodes_csv,
        aggregate_csv,
        summary_txt,
        aggregate,
        mse_slope,
        regret_slope,
        optimal_gain,
        final_mean_gain,
        flagged_episodes,
        wall_clock_seconds,
    })
}
