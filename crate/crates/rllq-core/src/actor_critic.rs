//! The model-free actor–critic learner.
//!
//! Each episode simulates the environment under the current Gaussian policy,
//! then forms discretized temporal-difference sums
//!
//! ```text
//! r_k = J(t_{k+1}, x_{k+1}; θ) - J(t_k, x_k; θ) - ½Q x_k² Δt + γ p(φ₂) Δt
//! ```
//!
//! and updates the critic with `θ + a_n Σ ∇_θJ(t_k, x_k; θ)·r_k` and the
//! actor with `φ₁ + a_n Σ score_k·r_k`, both clipped back into their
//! projection sets. The exploration variance follows the deterministic
//! schedule `φ₂,ₙ = 1/b_n`.

use alloc::vec::Vec;

use crate::math;
use crate::metrics::EpisodeRecord;
use crate::oracle::{self, ModelParams, Policy};
use crate::sim::{self, SeedSpec, Trajectory};
use crate::{Error, Result};

/// Step-size, exploration and projection schedules.
///
/// `Theoretical` follows the convergence-analysis rates
/// `a_n = 1 ∧ α^{3/4}/(n+β)^{3/4}`, `b_n = 1 ∨ (n+β)^{1/4}/α^{1/4}` with the
/// growing projection radius `c_{1,n} = 1 ∨ (log log n)^{1/6}`.
/// `Experimental` uses explicit power laws and a constant projection
/// interval, which is what the benchmark runs use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Theoretical {
        alpha: f64,
        beta: f64,
    },
    Experimental {
        a_coeff: f64,
        a_exp: f64,
        b_coeff: f64,
        b_exp: f64,
        projection_lo: f64,
        projection_hi: f64,
    },
}

/// Schedule values at one episode index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleValues {
    /// Learning rate `a_n`.
    pub learning_rate: f64,
    /// Exploration divisor `b_n`.
    pub inv_variance: f64,
    /// Exploration variance `φ₂,ₙ = 1/b_n`.
    pub exploration_variance: f64,
    /// Projection radius `c_{1,n}`.
    pub gain_radius: f64,
}

fn gain_radius(n: u64) -> f64 {
    // 1 ∨ (log log n)^{1/6}; below n = 3 the inner log is nonpositive.
    if n < 3 {
        return 1.0;
    }
    let inner = math::ln(math::ln(n as f64));
    if inner <= 1.0 {
        1.0
    } else {
        math::powf(inner, 1.0 / 6.0)
    }
}

impl Schedule {
    /// The benchmark experimental schedule: `a_n = 0.05/(n+1)^{3/4}`,
    /// `b_n = 0.2 (n+1)^{1/4}` and the constant projection `[-2.2, -0.5]`.
    pub fn experimental_default() -> Self {
        Schedule::Experimental {
            a_coeff: 0.05,
            a_exp: 0.75,
            b_coeff: 0.2,
            b_exp: 0.25,
            projection_lo: -2.2,
            projection_hi: -0.5,
        }
    }

    /// Evaluates `(a_n, b_n, φ₂,ₙ, c_{1,n})` at episode `n`.
    pub fn values(&self, n: u64) -> ScheduleValues {
        match *self {
            Schedule::Theoretical { alpha, beta } => {
                let shifted = n as f64 + beta;
                let learning_rate = (math::powf(alpha, 0.75) / math::powf(shifted, 0.75)).min(1.0);
                let inv_variance = (math::powf(shifted, 0.25) / math::powf(alpha, 0.25)).max(1.0);
                ScheduleValues {
                    learning_rate,
                    inv_variance,
                    exploration_variance: 1.0 / inv_variance,
                    gain_radius: gain_radius(n),
                }
            }
            Schedule::Experimental {
                a_coeff,
                a_exp,
                b_coeff,
                b_exp,
                ..
            } => {
                let shifted = (n + 1) as f64;
                let learning_rate = a_coeff / math::powf(shifted, a_exp);
                let inv_variance = b_coeff * math::powf(shifted, b_exp);
                ScheduleValues {
                    learning_rate,
                    inv_variance,
                    exploration_variance: 1.0 / inv_variance,
                    gain_radius: gain_radius(n),
                }
            }
        }
    }

    /// The gain projection set `K_{1,n}` at episode `n`.
    pub fn projection_interval(&self, n: u64) -> (f64, f64) {
        match *self {
            Schedule::Theoretical { .. } => {
                let radius = gain_radius(n);
                (-radius, radius)
            }
            Schedule::Experimental {
                projection_lo,
                projection_hi,
                ..
            } => (projection_lo, projection_hi),
        }
    }
}

/// Euclidean projection onto `[lo, hi]`: `min(hi, max(lo, y))`.
pub fn project_interval(y: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::EmptyInterval);
    }
    Ok(y.max(lo).min(hi))
}

/// Score `∂ log π/∂φ₁ = (u - φ₁x)·x/φ₂` of the Gaussian feedback policy.
pub fn gain_score(action: f64, state: f64, policy: Policy) -> Result<f64> {
    if policy.variance.is_nan() || policy.variance <= 0.0 {
        return Err(Error::NonPositiveVariance);
    }
    Ok((action - policy.gain * state) * state / policy.variance)
}

/// Parametric critic `J(t, x; θ) = -½ k₁ x² + k₃(t)` with constant
/// curvature `k₁ = θ₁` and offset `k₃(t) = θ₂ (T - t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Critic {
    /// Curvature level `θ₁`.
    pub level: f64,
    /// Offset slope `θ₂`.
    pub slope: f64,
}

impl Critic {
    pub fn value(&self, t: f64, x: f64, horizon: f64) -> f64 {
        -0.5 * self.level * x * x + self.slope * (horizon - t)
    }
}

/// Bounds defining the critic projection set: `k₁ ∈ [1/c₂, c₂]`,
/// `|k₁′| ≤ c₁`, `|k₃′| ≤ c₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticBounds {
    /// `c₁`, bound on the curvature's time derivative.
    pub max_curvature_rate: f64,
    /// `c₂ ≥ 1`, the curvature range bound.
    pub curvature_range: f64,
    /// `c₃`, bound on the offset's time derivative.
    pub max_offset_rate: f64,
}

impl CriticBounds {
    pub fn contains(&self, critic: &Critic) -> bool {
        let c2 = self.curvature_range;
        critic.level >= 1.0 / c2
            && critic.level <= c2
            && math::abs(critic.slope) <= self.max_offset_rate
    }

    /// Clips a critic back into the projection set (the parametric family
    /// satisfies `k₁′ ≡ 0 ≤ c₁` by construction).
    pub fn project(&self, critic: Critic) -> Critic {
        let c2 = self.curvature_range;
        Critic {
            level: critic.level.clamp(1.0 / c2, c2),
            slope: critic
                .slope
                .clamp(-self.max_offset_rate, self.max_offset_rate),
        }
    }

    /// Checks arbitrary curvature/offset handles against the bounds on a
    /// uniform grid, with derivatives taken by central differences.
    pub fn holds_on_grid(
        &self,
        k1: &dyn Fn(f64) -> f64,
        k3: &dyn Fn(f64) -> f64,
        horizon: f64,
        points: usize,
    ) -> bool {
        let n = points.max(2);
        let dt = horizon / (n - 1) as f64;
        let eps = dt * 1e-3;
        for i in 0..n {
            let t = i as f64 * dt;
            let v = k1(t);
            if v < 1.0 / self.curvature_range || v > self.curvature_range {
                return false;
            }
            let t_lo = (t - eps).max(0.0);
            let t_hi = (t + eps).min(horizon);
            let d1 = (k1(t_hi) - k1(t_lo)) / (t_hi - t_lo);
            let d3 = (k3(t_hi) - k3(t_lo)) / (t_hi - t_lo);
            if math::abs(d1) > self.max_curvature_rate + 1e-9
                || math::abs(d3) > self.max_offset_rate + 1e-9
            {
                return false;
            }
        }
        true
    }
}

/// Temporal-difference residual of step `k`:
/// `J(t_{k+1}, x_{k+1}; θ) - J(t_k, x_k; θ) - ½Q x_k² Δt + γ p(φ₂) Δt`.
///
/// `exploration_variance` must be positive whenever `gamma` is nonzero.
pub fn td_residual(
    traj: &Trajectory,
    k: usize,
    critic: &Critic,
    model: &ModelParams,
    gamma: f64,
    exploration_variance: f64,
) -> f64 {
    let entropy_bonus = if gamma == 0.0 {
        0.0
    } else {
        gamma
            * oracle::gaussian_entropy(exploration_variance)
                .expect("entropy term requires positive exploration variance")
    };
    let horizon = model.horizon;
    let dj = critic.value(traj.times[k + 1], traj.states[k + 1], horizon)
        - critic.value(traj.times[k], traj.states[k], horizon);
    let x = traj.states[k];
    dj - 0.5 * model.state_cost * x * x * traj.dt + entropy_bonus * traj.dt
}

/// Policy-gradient increment `Σ_k score_k · r_k` over one trajectory.
///
/// The entropy's own `∂p/∂φ₁` term is identically zero for this policy
/// family, so the sum of score-weighted residuals is the whole gradient.
pub fn actor_gradient(
    traj: &Trajectory,
    critic: &Critic,
    model: &ModelParams,
    policy: Policy,
    gamma: f64,
) -> Result<f64> {
    if policy.variance.is_nan() || policy.variance <= 0.0 {
        return Err(Error::NonPositiveVariance);
    }
    let entropy_bonus = if gamma == 0.0 {
        0.0
    } else {
        gamma * oracle::gaussian_entropy(policy.variance)?
    };
    let horizon = model.horizon;
    let mut sum = 0.0;
    for k in 0..traj.steps() {
        let x = traj.states[k];
        let score = (traj.actions[k] - policy.gain * x) * x / policy.variance;
        let dj = critic.value(traj.times[k + 1], traj.states[k + 1], horizon)
            - critic.value(traj.times[k], x, horizon);
        let residual = dj - 0.5 * model.state_cost * x * x * traj.dt + entropy_bonus * traj.dt;
        sum += score * residual;
    }
    Ok(sum)
}

/// One projected critic step from the trajectory's residual sums.
pub fn critic_update(
    critic: &Critic,
    bounds: &CriticBounds,
    traj: &Trajectory,
    model: &ModelParams,
    learning_rate: f64,
    gamma: f64,
    exploration_variance: f64,
) -> Critic {
    let mut grad_level = 0.0;
    let mut grad_slope = 0.0;
    for k in 0..traj.steps() {
        let residual = td_residual(traj, k, critic, model, gamma, exploration_variance);
        let x = traj.states[k];
        // ∇_θ J(t, x; θ) = (-½x², T - t)
        grad_level += -0.5 * x * x * residual;
        grad_slope += (model.horizon - traj.times[k]) * residual;
    }
    bounds.project(Critic {
        level: critic.level + learning_rate * grad_level,
        slope: critic.slope + learning_rate * grad_slope,
    })
}

/// One projected actor step.
pub fn actor_update(
    gain: f64,
    gradient: f64,
    learning_rate: f64,
    interval: (f64, f64),
) -> Result<f64> {
    project_interval(gain + learning_rate * gradient, interval.0, interval.1)
}

/// Full configuration of one learner run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RllqConfig {
    pub model: ModelParams,
    pub schedule: Schedule,
    /// Initial critic parameters `θ₀`.
    pub critic: Critic,
    pub critic_bounds: CriticBounds,
    /// When false the critic stays fixed at `θ₀` for the whole run.
    pub learn_critic: bool,
    /// Entropy temperature `γ ≥ 0`.
    pub gamma: f64,
    /// Initial gain `φ₁` before the first episode.
    pub initial_gain: f64,
    /// Number of episodes `N`.
    pub episodes: u64,
    /// Simulation step size.
    pub dt: f64,
}

impl RllqConfig {
    /// Benchmark settings on the all-ones model: experimental schedule,
    /// fixed critic `θ = (1, 0)`, `γ = 1`, `φ₁,₀ = -0.5`, `Δt = 0.01`.
    pub fn benchmark(episodes: u64) -> Self {
        RllqConfig {
            model: ModelParams::all_ones(),
            schedule: Schedule::experimental_default(),
            critic: Critic {
                level: 1.0,
                slope: 0.0,
            },
            critic_bounds: CriticBounds {
                max_curvature_rate: 1.0,
                curvature_range: 2.0,
                max_offset_rate: 1.0,
            },
            learn_critic: false,
            gamma: 1.0,
            initial_gain: -0.5,
            episodes,
            dt: 0.01,
        }
    }
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationResult {
    pub records: Vec<EpisodeRecord>,
    /// Episodes cut short by the overflow safety valve.
    pub flagged_episodes: u64,
    /// Gain after the final update.
    pub final_gain: f64,
}

/// Runs episodes `n = 1..N`: simulate under `(φ₁,ₙ, φ₂,ₙ)`, record the
/// deployed policy's oracle regret and squared gain error, then update
/// critic (optional) and actor. Deterministic given `(config, seed)`.
pub fn run_replication(config: &RllqConfig, seed: SeedSpec) -> Result<ReplicationResult> {
    config.model.validate()?;
    let optimal = oracle::optimal_gain(&config.model)?;
    let mut rng = sim::derive_stream(seed);
    let mut gain = config.initial_gain;
    let mut critic = config.critic;
    let mut records = Vec::with_capacity(config.episodes as usize);
    let mut cum_regret = 0.0;
    let mut flagged = 0u64;

    for n in 1..=config.episodes {
        let sv = config.schedule.values(n);
        let policy = Policy::new(gain, sv.exploration_variance);
        let traj = sim::simulate_policy_episode(&config.model, policy, config.dt, &mut rng);
        if traj.truncated {
            flagged += 1;
        }

        let increment = oracle::regret_increment(&config.model, policy);
        cum_regret += increment;
        let err = gain - optimal;
        records.push(EpisodeRecord {
            episode: n,
            gain,
            variance: policy.variance,
            regret_increment: increment,
            cum_regret,
            sq_error: err * err,
        });

        // Both updates evaluate residuals at the pre-update critic θₙ.
        let gradient = actor_gradient(&traj, &critic, &config.model, policy, config.gamma)?;
        if config.learn_critic {
            critic = critic_update(
                &critic,
                &config.critic_bounds,
                &traj,
                &config.model,
                sv.learning_rate,
                config.gamma,
                policy.variance,
            );
        }
        let interval = config.schedule.projection_interval(n + 1);
        gain = actor_update(gain, gradient, sv.learning_rate, interval)?;
        debug_assert!(gain >= interval.0 && gain <= interval.1);
    }

    Ok(ReplicationResult {
        records,
        flagged_episodes: flagged,
        final_gain: gain,
    })
}
