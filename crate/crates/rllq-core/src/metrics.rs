//! Replication aggregation and log-log power-law slope fitting.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Per-episode outcome of one replication, as consumed by the aggregator
/// and the CSV writers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub episode: u64,
    /// Gain deployed in this episode.
    pub gain: f64,
    /// Exploration variance deployed in this episode (0 for the baseline).
    pub variance: f64,
    /// Oracle regret of the deployed policy.
    pub regret_increment: f64,
    /// Running sum of regret increments within the replication.
    pub cum_regret: f64,
    /// Squared error of the learned gain against the optimal gain.
    pub sq_error: f64,
}

/// Per-episode means across replications.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateSeries {
    pub episodes: Vec<u64>,
    pub mean_sq_error: Vec<f64>,
    pub mean_cum_regret: Vec<f64>,
    pub replications: usize,
}

/// Averages per-episode records across replications, summing in the given
/// replication order so the result is deterministic.
pub fn aggregate(replications: &[Vec<EpisodeRecord>]) -> Result<AggregateSeries> {
    let Some(first) = replications.first() else {
        return Err(Error::LengthMismatch);
    };
    let n = first.len();
    if replications.iter().any(|r| r.len() != n) {
        return Err(Error::LengthMismatch);
    }
    let count = replications.len() as f64;
    let mut episodes = Vec::with_capacity(n);
    let mut mean_sq_error = Vec::with_capacity(n);
    let mut mean_cum_regret = Vec::with_capacity(n);
    for k in 0..n {
        let episode = first[k].episode;
        let mut sq = 0.0;
        let mut cum = 0.0;
        for rep in replications {
            if rep[k].episode != episode {
                return Err(Error::LengthMismatch);
            }
            sq += rep[k].sq_error;
            cum += rep[k].cum_regret;
        }
        episodes.push(episode);
        mean_sq_error.push(sq / count);
        mean_cum_regret.push(cum / count);
    }
    Ok(AggregateSeries {
        episodes,
        mean_sq_error,
        mean_cum_regret,
        replications: replications.len(),
    })
}

/// Least-squares line through `(log₁₀ n, log₁₀ y)` over an episode window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Inclusive episode window the fit was computed on.
    pub window: (u64, u64),
    /// Root-mean-square residual in log₁₀ units.
    pub residual_rms: f64,
}

/// Fits `log₁₀ y = slope · log₁₀ n + intercept` over episodes in
/// `[window.0, window.1]`. Every value in the window must be strictly
/// positive and finite, and at least two distinct episodes are required.
pub fn loglog_slope(episodes: &[u64], values: &[f64], window: (u64, u64)) -> Result<SlopeFit> {
    if episodes.len() != values.len() {
        return Err(Error::LengthMismatch);
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &y) in episodes.iter().zip(values) {
        if n < lo || n > hi {
            continue;
        }
        if !y.is_finite() || y <= 0.0 {
            return Err(Error::NonPositiveValue);
        }
        xs.push(math::log10(n as f64));
        ys.push(math::log10(y));
    }
    if xs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let count = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = count * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::RankDeficient { distinct_needed: 2 });
    }
    let slope = (count * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / count;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        window,
        residual_rms: math::sqrt(ss_res / count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(episode: u64, sq_error: f64, cum_regret: f64) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            gain: 0.0,
            variance: 0.0,
            regret_increment: 0.0,
            cum_regret,
            sq_error,
        }
    }

    #[test]
    fn single_replication_aggregates_to_itself() {
        let rep = vec![record(1, 0.5, 0.1), record(2, 0.25, 0.3)];
        let agg = aggregate(std::slice::from_ref(&rep)).unwrap();
        assert_eq!(agg.replications, 1);
        assert_eq!(agg.mean_sq_error, vec![0.5, 0.25]);
        assert_eq!(agg.mean_cum_regret, vec![0.1, 0.3]);
    }

    #[test]
    fn two_replications_average() {
        let a = vec![record(1, 0.2, 0.0)];
        let b = vec![record(1, 0.4, 0.0)];
        let agg = aggregate(&[a, b]).unwrap();
        assert!((agg.mean_sq_error[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_increments_give_zero_regret() {
        let reps: Vec<Vec<EpisodeRecord>> = (0..4)
            .map(|_| (1..=10).map(|n| record(n, 1.0, 0.0)).collect())
            .collect();
        let agg = aggregate(&reps).unwrap();
        assert!(agg.mean_cum_regret.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let a = vec![record(1, 0.2, 0.0)];
        let b = vec![record(1, 0.4, 0.0), record(2, 0.4, 0.0)];
        assert_eq!(aggregate(&[a, b]).unwrap_err(), Error::LengthMismatch);
        assert_eq!(aggregate(&[]).unwrap_err(), Error::LengthMismatch);
    }

    #[test]
    fn reordering_replications_changes_nothing_material() {
        let reps: Vec<Vec<EpisodeRecord>> = (0..8)
            .map(|r| {
                (1..=50)
                    .map(|n| record(n, 0.1 * (r + 1) as f64 / n as f64, 0.01 * n as f64))
                    .collect()
            })
            .collect();
        let agg = aggregate(&reps).unwrap();
        let mut reversed = reps.clone();
        reversed.reverse();
        let agg_rev = aggregate(&reversed).unwrap();
        for k in 0..agg.episodes.len() {
            assert!((agg.mean_sq_error[k] - agg_rev.mean_sq_error[k]).abs() <= 1e-12);
            assert!((agg.mean_cum_regret[k] - agg_rev.mean_cum_regret[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_power_laws_recover_their_exponent() {
        let episodes = [10u64, 100, 1000];
        let inverse_sqrt: Vec<f64> = episodes.iter().map(|&n| (n as f64).powf(-0.5)).collect();
        let fit = loglog_slope(&episodes, &inverse_sqrt, (1, 1000)).unwrap();
        assert!((fit.slope - (-0.5)).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);

        let scaled: Vec<f64> = episodes
            .iter()
            .map(|&n| 7.3 * (n as f64).powf(0.75))
            .collect();
        let fit = loglog_slope(&episodes, &scaled, (1, 1000)).unwrap();
        assert!((fit.slope - 0.75).abs() < 1e-12);

        let constant = [4.2, 4.2, 4.2];
        let fit = loglog_slope(&episodes, &constant, (1, 1000)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn slope_invariant_under_positive_rescaling() {
        let episodes: Vec<u64> = (1..=200).collect();
        let values: Vec<f64> = episodes
            .iter()
            .map(|&n| 2.0 * (n as f64).powf(-0.8) * (1.0 + 0.05 * ((n * 37 % 11) as f64 - 5.0)))
            .collect();
        let fit = loglog_slope(&episodes, &values, (10, 200)).unwrap();
        for scale in [1e-6, 0.5, 3.0, 1e8] {
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let fit_scaled = loglog_slope(&episodes, &scaled, (10, 200)).unwrap();
            assert!((fit.slope - fit_scaled.slope).abs() < 1e-9);
            assert!((fit_scaled.intercept - (fit.intercept + scale.log10())).abs() < 1e-9);
        }
    }

    #[test]
    fn slope_rejects_bad_windows_and_values() {
        let episodes = [1u64, 2, 3];
        let values = [1.0, 2.0, 3.0];
        assert_eq!(
            loglog_slope(&episodes, &values, (10, 20)).unwrap_err(),
            Error::EmptyWindow
        );
        let with_zero = [1.0, 0.0, 3.0];
        assert_eq!(
            loglog_slope(&episodes, &with_zero, (1, 3)).unwrap_err(),
            Error::NonPositiveValue
        );
        let with_inf = [1.0, f64::INFINITY, 3.0];
        assert_eq!(
            loglog_slope(&episodes, &with_inf, (1, 3)).unwrap_err(),
            Error::NonPositiveValue
        );
        assert_eq!(
            loglog_slope(&episodes, &values, (2, 2)).unwrap_err(),
            Error::RankDeficient { distinct_needed: 2 }
        );
    }
}
