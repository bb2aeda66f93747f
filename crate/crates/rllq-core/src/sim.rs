//! Seeded episode simulation of the controlled diffusion.
//!
//! Two environments are provided:
//!
//! - [`simulate_policy_episode`]: Euler–Maruyama stepping of
//!   `dx = (Ax + Bu) dt + (Cx + Du) dW` with actions sampled fresh from the
//!   Gaussian feedback policy at every grid point and held over the step.
//! - [`simulate_geometric_episode`]: exact log-space stepping of the
//!   closed-loop dynamics `dx = P x dt + R x dW` (with `P = A + Bφ̄`,
//!   `R = C + Dφ̄`), which keeps states strictly positive so the
//!   log-trajectory statistics of the model-based learner are well defined.
//!
//! Randomness is deterministic: a [`SeedSpec`] names a replication stream,
//! and identical specs yield bit-identical streams.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::math;
use crate::oracle::{ModelParams, Policy};
use crate::{Error, Result};

/// States beyond this magnitude truncate the episode (overflow safety valve).
pub const STATE_CAP: f64 = 1e12;

/// Deterministic pseudo-random stream; one per replication.
pub type RandomStream = ChaCha12Rng;

/// Names one replication's private random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, replication_index: u64) -> Self {
        SeedSpec {
            base_seed,
            replication_index,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream for `(base_seed, replication_index)`.
///
/// The pair is mixed through SplitMix64 into a 256-bit ChaCha key, so
/// streams for distinct indices are statistically independent while
/// identical inputs reproduce the stream bit for bit.
pub fn derive_stream(seed: SeedSpec) -> RandomStream {
    let mut state = seed
        .base_seed
        .wrapping_add(seed.replication_index.wrapping_mul(0xA24B_AED4_963E_E407));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// One episode on the uniform grid `t_k = k·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Step size.
    pub dt: f64,
    /// Grid times, `states.len()` entries starting at 0.
    pub times: Vec<f64>,
    /// States `x(t_k)`, starting at `x0`.
    pub states: Vec<f64>,
    /// Actions applied over `[t_k, t_{k+1})`; one fewer than `states`.
    pub actions: Vec<f64>,
    /// Standard normal draws behind the Brownian increments, one per step.
    pub normals: Vec<f64>,
    /// Set when the episode was cut short by the overflow safety valve.
    pub truncated: bool,
}

impl Trajectory {
    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

/// Number of uniform steps covering the horizon.
pub fn step_count(dt: f64, horizon: f64) -> usize {
    math::round(horizon / dt) as usize
}

/// Simulates one episode under the Gaussian feedback policy
/// `u | x ~ N(φ₁ x, φ₂)` by Euler–Maruyama.
///
/// Each step draws two independent normals in a fixed order — action first,
/// then Brownian increment — so the consumed stream layout does not depend
/// on the policy variance. If a state leaves `[-STATE_CAP, STATE_CAP]` or
/// turns non-finite the episode is truncated and flagged; the shortened
/// trajectory is still returned.
pub fn simulate_policy_episode(
    model: &ModelParams,
    policy: Policy,
    dt: f64,
    rng: &mut RandomStream,
) -> Trajectory {
    assert!(dt > 0.0 && dt <= model.horizon, "dt must lie in (0, T]");
    assert!(
        policy.variance >= 0.0,
        "policy variance must be nonnegative"
    );
    let m = step_count(dt, model.horizon);
    let sqrt_dt = math::sqrt(dt);
    let action_sd = math::sqrt(policy.variance);

    let mut times = Vec::with_capacity(m + 1);
    let mut states = Vec::with_capacity(m + 1);
    let mut actions = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    times.push(0.0);
    states.push(model.x0);
    let mut truncated = false;

    let mut x = model.x0;
    for k in 0..m {
        let z_action: f64 = rng.sample(StandardNormal);
        let z_brownian: f64 = rng.sample(StandardNormal);
        let u = policy.gain * x + action_sd * z_action;
        let drift = (model.state_drift * x + model.control_drift * u) * dt;
        let diffusion = (model.state_vol * x + model.control_vol * u) * sqrt_dt * z_brownian;
        let next = x + drift + diffusion;
        if !next.is_finite() || math::abs(next) > STATE_CAP {
            truncated = true;
            break;
        }
        actions.push(u);
        normals.push(z_brownian);
        times.push((k + 1) as f64 * dt);
        states.push(next);
        x = next;
    }

    Trajectory {
        dt,
        times,
        states,
        actions,
        normals,
        truncated,
    }
}

/// Simulates one episode of the closed-loop geometric dynamics under the
/// constant gain `φ̄`, stepping exactly in log space:
/// `ln x_{k+1} = ln x_k + (P - R²/2) dt + R √dt Z_k`.
pub fn simulate_geometric_episode(
    model: &ModelParams,
    gain: f64,
    dt: f64,
    rng: &mut RandomStream,
) -> Result<Trajectory> {
    assert!(dt > 0.0 && dt <= model.horizon, "dt must lie in (0, T]");
    if model.x0 <= 0.0 {
        return Err(Error::NonPositiveState);
    }
    let m = step_count(dt, model.horizon);
    let loop_drift = model.state_drift + model.control_drift * gain; // P
    let loop_vol = model.state_vol + model.control_vol * gain; // R
    let log_drift = (loop_drift - 0.5 * loop_vol * loop_vol) * dt;
    let log_vol = loop_vol * math::sqrt(dt);

    let mut times = Vec::with_capacity(m + 1);
    let mut states = Vec::with_capacity(m + 1);
    let mut actions = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    times.push(0.0);
    states.push(model.x0);
    let mut truncated = false;

    // Cap in log space: underflow of exp() to zero would break the strict
    // positivity the log estimators rely on.
    let log_cap = math::ln(STATE_CAP);
    let mut log_x = math::ln(model.x0);
    for k in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        let next_log = log_x + log_drift + log_vol * z;
        if !next_log.is_finite() || math::abs(next_log) > log_cap {
            truncated = true;
            break;
        }
        let next = math::exp(next_log);
        actions.push(gain * math::exp(log_x));
        normals.push(z);
        times.push((k + 1) as f64 * dt);
        states.push(next);
        log_x = next_log;
    }

    Ok(Trajectory {
        dt,
        times,
        states,
        actions,
        normals,
        truncated,
    })
}
