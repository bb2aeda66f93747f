//! Property tests over the projection, schedules and aggregation.

use proptest::prelude::*;
use rllq_core::actor_critic::{project_interval, Schedule};
use rllq_core::metrics::{self, EpisodeRecord};
use rllq_core::oracle::{self, ModelParams, Policy};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        y in -1e6f64..1e6,
        z in -1e6f64..1e6,
        lo in -100.0f64..100.0,
        width in 0.0f64..200.0,
    ) {
        let hi = lo + width;
        let py = project_interval(y, lo, hi).unwrap();
        prop_assert!(py >= lo && py <= hi);
        prop_assert_eq!(project_interval(py, lo, hi).unwrap(), py);
        let pz = project_interval(z, lo, hi).unwrap();
        prop_assert!((py - pz).abs() <= (y - z).abs() + 1e-12);
    }

    #[test]
    fn policy_value_decomposition_is_consistent(
        gain in -3.0f64..0.0,
        variance in 0.0f64..1.0,
    ) {
        let model = ModelParams::all_ones();
        let policy = Policy::new(gain, variance);
        let direct = oracle::policy_value_at(&model, policy, 0.0, model.x0);
        let decomposed = oracle::policy_value(&model, policy);
        prop_assert!((direct - decomposed).abs() <= 1e-10);
    }

    #[test]
    fn regret_increment_is_nonnegative(
        gain in -6.0f64..2.0,
        variance in 0.0f64..3.0,
    ) {
        let model = ModelParams::all_ones();
        prop_assert!(oracle::regret_increment(&model, Policy::new(gain, variance)) >= -1e-12);
    }
}

#[test]
fn schedule_rates_are_monotone() {
    for sched in [
        Schedule::experimental_default(),
        Schedule::Theoretical {
            alpha: 2.0,
            beta: 8.0,
        },
    ] {
        let mut prev_rate = f64::INFINITY;
        let mut prev_b = 0.0;
        let mut prev_radius = 0.0;
        for n in 0..10_000 {
            let v = sched.values(n);
            assert!(v.learning_rate > 0.0 && v.learning_rate <= prev_rate);
            assert!(v.inv_variance >= prev_b);
            assert!(v.gain_radius >= prev_radius);
            prev_rate = v.learning_rate;
            prev_b = v.inv_variance;
            prev_radius = v.gain_radius;
        }
    }
}

#[test]
fn oracle_policy_cumulative_regret_matches_closed_form() {
    // deploying (φ₁*, φ₂,ₙ = 1/bₙ) makes every increment exactly
    // -g(a(φ₁*))/bₙ, which is 0.5/bₙ on the all-ones model
    let model = ModelParams::all_ones();
    let optimal = oracle::optimal_gain(&model).unwrap();
    let sched = Schedule::experimental_default();
    let episodes = 5_000u64;

    let mut records = Vec::with_capacity(episodes as usize);
    let mut cum = 0.0;
    for n in 1..=episodes {
        let variance = sched.values(n).exploration_variance;
        let increment = oracle::regret_increment(&model, Policy::new(optimal, variance));
        cum += increment;
        records.push(EpisodeRecord {
            episode: n,
            gain: optimal,
            variance,
            regret_increment: increment,
            cum_regret: cum,
            sq_error: 0.0,
        });
    }
    let agg = metrics::aggregate(&[records]).unwrap();

    let rate = oracle::second_moment_rate(&model, optimal);
    let noise_slope = -oracle::exploration_value(&model, rate);
    assert!((noise_slope - 0.5).abs() < 1e-15);
    let mut expected = 0.0;
    for n in 1..=episodes {
        expected += noise_slope * sched.values(n).exploration_variance;
        let got = agg.mean_cum_regret[(n - 1) as usize];
        assert!(
            (got - expected).abs() <= 1e-10,
            "episode {n}: {got} vs {expected}"
        );
    }
}

#[test]
fn aggregate_regret_is_nondecreasing() {
    use rllq_core::actor_critic::{run_replication, RllqConfig};
    use rllq_core::sim::SeedSpec;
    let config = RllqConfig::benchmark(500);
    let reps: Vec<_> = (0..4)
        .map(|i| {
            run_replication(&config, SeedSpec::new(55, i))
                .unwrap()
                .records
        })
        .collect();
    let agg = metrics::aggregate(&reps).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for &c in &agg.mean_cum_regret {
        assert!(c >= prev - 1e-12);
        prev = c;
    }
    assert_eq!(agg.episodes.len(), 500);
}
