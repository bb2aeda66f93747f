//! Closed-form quantities of the linear-quadratic diffusion model.
//!
//! Everything here is exact (up to 64-bit float arithmetic): the optimal
//! feedback gain, the first two state moments under a Gaussian feedback
//! policy, the value decomposition `J̄(φ₁, φ₂) = f(a(φ₁)) + φ₂ g(a(φ₁))`,
//! the full time-dependent policy value, the classical optimal value, and
//! the mean policy-gradient increment `h₁`. These serve as ground truth
//! for regret computation and for Monte Carlo unbiasedness checks.

use crate::math;
use crate::{Error, Result};

/// Moment-rate magnitude below which the removable-singularity limit branch
/// of `f`, `g` and the second moment is evaluated instead of the generic
/// closed form.
pub const RATE_BRANCH_EPS: f64 = 1e-8;

/// Coefficients of the scalar LQ environment
/// `dx = (A x + B u) dt + (C x + D u) dW` with running cost weight `Q`,
/// terminal cost weight `H`, initial state `x0` and horizon `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Drift state coefficient `A` (1/time).
    pub state_drift: f64,
    /// Drift control coefficient `B` (1/time).
    pub control_drift: f64,
    /// Diffusion state coefficient `C` (1/√time).
    pub state_vol: f64,
    /// Diffusion control coefficient `D` (1/√time).
    pub control_vol: f64,
    /// Running state cost weight `Q ≥ 0`.
    pub state_cost: f64,
    /// Terminal state cost weight `H ≥ 0`.
    pub terminal_cost: f64,
    /// Initial state `x0 ≠ 0`.
    pub x0: f64,
    /// Horizon `T > 0` (time).
    pub horizon: f64,
}

impl ModelParams {
    /// The benchmark configuration with every coefficient equal to one.
    pub fn all_ones() -> Self {
        ModelParams {
            state_drift: 1.0,
            control_drift: 1.0,
            state_vol: 1.0,
            control_vol: 1.0,
            state_cost: 1.0,
            terminal_cost: 1.0,
            x0: 1.0,
            horizon: 1.0,
        }
    }

    /// Checks `Q ≥ 0`, `H ≥ 0`, `T > 0`, `x0 ≠ 0`, `D ≠ 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let all = [
            (self.state_drift, "A"),
            (self.control_drift, "B"),
            (self.state_vol, "C"),
            (self.control_vol, "D"),
            (self.state_cost, "Q"),
            (self.terminal_cost, "H"),
            (self.x0, "x0"),
            (self.horizon, "T"),
        ];
        for (value, name) in all {
            if !value.is_finite() {
                return Err(Error::InvalidModel(name));
            }
        }
        if self.state_cost < 0.0 {
            return Err(Error::InvalidModel("Q"));
        }
        if self.terminal_cost < 0.0 {
            return Err(Error::InvalidModel("H"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidModel("T"));
        }
        if self.x0 == 0.0 {
            return Err(Error::InvalidModel("x0"));
        }
        if self.control_vol == 0.0 {
            return Err(Error::InvalidModel("D"));
        }
        Ok(())
    }
}

/// Gaussian feedback policy `u | x ~ N(φ₁ x, φ₂)`. A zero variance denotes
/// the deterministic policy `u = φ₁ x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Policy {
    /// Feedback gain `φ₁` (dimensionless).
    pub gain: f64,
    /// Exploration variance `φ₂ ≥ 0` (control²).
    pub variance: f64,
}

impl Policy {
    pub fn new(gain: f64, variance: f64) -> Self {
        Policy { gain, variance }
    }

    /// The deterministic policy `u = φ₁ x`.
    pub fn deterministic(gain: f64) -> Self {
        Policy {
            gain,
            variance: 0.0,
        }
    }
}

/// Value-function curvature `k₁(t)` supplied to the mean-gradient oracle.
///
/// The constant case has a fully closed form; a time-varying handle falls
/// back to adaptive quadrature at absolute tolerance `1e-10`.
pub enum Curvature<'a> {
    Constant(f64),
    TimeVarying(&'a dyn Fn(f64) -> f64),
}

#[inline]
fn optimal_gain_raw(model: &ModelParams) -> f64 {
    -(model.control_drift + model.state_vol * model.control_vol)
        / (model.control_vol * model.control_vol)
}

/// Optimal feedback gain `φ₁* = -(B + CD)/D²`.
pub fn optimal_gain(model: &ModelParams) -> Result<f64> {
    if model.control_vol == 0.0 {
        return Err(Error::DegenerateControl);
    }
    Ok(optimal_gain_raw(model))
}

/// Exponential growth rate of the second state moment under gain `φ₁`:
/// `a(φ₁) = 2A + 2Bφ₁ + C² + 2CDφ₁ + D²φ₁²`.
pub fn second_moment_rate(model: &ModelParams, gain: f64) -> f64 {
    2.0 * model.state_drift
        + 2.0 * model.control_drift * gain
        + model.state_vol * model.state_vol
        + 2.0 * model.state_vol * model.control_vol * gain
        + model.control_vol * model.control_vol * gain * gain
}

/// `E[x(t)] = x0 · e^{(A + Bφ₁) t}`.
pub fn mean_state(model: &ModelParams, gain: f64, t: f64) -> f64 {
    model.x0 * math::exp((model.state_drift + model.control_drift * gain) * t)
}

/// `E[x(t)²] = D²φ₂ (e^{at} - 1)/a + x0² e^{at}`, with the `a = 0` limit
/// `D²φ₂ t + x0²` taken when `|a| < RATE_BRANCH_EPS`.
pub fn second_moment_state(model: &ModelParams, policy: Policy, t: f64) -> f64 {
    let rate = second_moment_rate(model, policy.gain);
    let noise = model.control_vol * model.control_vol * policy.variance;
    let x0_sq = model.x0 * model.x0;
    if math::abs(rate) < RATE_BRANCH_EPS {
        noise * t + x0_sq
    } else {
        noise * math::expm1(rate * t) / rate + x0_sq * math::exp(rate * t)
    }
}

/// Deterministic part `f(a)` of the policy value decomposition:
/// `(x0²/2a)(Q - e^{aT} Q - H e^{aT} a)`, with limit `x0²(-H - QT)/2` at
/// `a = 0`. Written via `expm1` so the two branches agree to full precision
/// near the removable singularity.
pub fn base_value(model: &ModelParams, rate: f64) -> f64 {
    let q = model.state_cost;
    let h = model.terminal_cost;
    let t = model.horizon;
    let x0_sq = model.x0 * model.x0;
    if math::abs(rate) < RATE_BRANCH_EPS {
        x0_sq * (-h - q * t) / 2.0
    } else {
        let at = rate * t;
        x0_sq / (2.0 * rate) * (-q * math::expm1(at) - h * rate * math::exp(at))
    }
}

/// Exploration sensitivity `g(a) = ∂J̄/∂φ₂`:
/// `(D²/2a²)(QTa + Q + Ha - e^{aT} Q - H e^{aT} a)`, with limit
/// `D²T(-2H - QT)/4` at `a = 0`.
pub fn exploration_value(model: &ModelParams, rate: f64) -> f64 {
    let q = model.state_cost;
    let h = model.terminal_cost;
    let t = model.horizon;
    let d_sq = model.control_vol * model.control_vol;
    if math::abs(rate) < RATE_BRANCH_EPS {
        d_sq * t * (-2.0 * h - q * t) / 4.0
    } else {
        let at = rate * t;
        // QTa + Q + Ha - e^{aT}Q - He^{aT}a == QTa - (Q + Ha)·expm1(aT)
        d_sq / (2.0 * rate * rate) * (q * t * rate - (q + h * rate) * math::expm1(at))
    }
}

/// Value of the Gaussian policy under the original (entropy-free) objective:
/// `J̄(φ₁, φ₂) = f(a(φ₁)) + φ₂ g(a(φ₁))`.
pub fn policy_value(model: &ModelParams, policy: Policy) -> f64 {
    let rate = second_moment_rate(model, policy.gain);
    base_value(model, rate) + policy.variance * exploration_value(model, rate)
}

/// Full time-dependent policy value `J(t, x; φ₁, φ₂)`.
///
/// Solves the Feynman–Kac PDE with terminal condition `-½H x²`; satisfies
/// `J(0, x0; φ) = J̄(φ)`.
pub fn policy_value_at(model: &ModelParams, policy: Policy, t: f64, x: f64) -> f64 {
    let q = model.state_cost;
    let h = model.terminal_cost;
    let horizon = model.horizon;
    let d_sq = model.control_vol * model.control_vol;
    let rate = second_moment_rate(model, policy.gain);
    let tau = horizon - t;
    if math::abs(rate) < RATE_BRANCH_EPS {
        // x² coefficient integrates Q straight down from -H; the offset is
        // the time integral of ½D²φ₂·(that coefficient).
        let quad = q * t - q * horizon - h;
        let offset = d_sq * policy.variance / 4.0
            * (-q * t * t + 2.0 * q * horizon * t + 2.0 * h * t
                - q * horizon * horizon
                - 2.0 * h * horizon);
        0.5 * quad * x * x + offset
    } else {
        let e_tau = math::exp(rate * tau);
        let quad = q / rate - (h + q / rate) * e_tau;
        let offset = 0.5
            * d_sq
            * policy.variance
            * ((q / rate) * tau - (h + q / rate) * math::expm1(rate * tau) / rate);
        0.5 * quad * x * x + offset
    }
}

/// The rate `Λ = (B² + 2BCD - 2AD²)/D²` appearing in the classical value.
pub fn classical_rate(model: &ModelParams) -> f64 {
    (model.control_drift * model.control_drift
        + 2.0 * model.control_drift * model.state_vol * model.control_vol
        - 2.0 * model.state_drift * model.control_vol * model.control_vol)
        / (model.control_vol * model.control_vol)
}

/// Classical optimal value
/// `V(t, x) = -½[Q/Λ + (H - Q/Λ) e^{Λ(t-T)}]x²`, degenerating to
/// `-½(Q(T-t) + H)x²` as `Λ → 0`.
pub fn classical_value(model: &ModelParams, t: f64, x: f64) -> f64 {
    let q = model.state_cost;
    let h = model.terminal_cost;
    let lambda = classical_rate(model);
    if math::abs(lambda) < RATE_BRANCH_EPS {
        -0.5 * (q * (model.horizon - t) + h) * x * x
    } else {
        -0.5 * (q / lambda + (h - q / lambda) * math::exp(lambda * (t - model.horizon))) * x * x
    }
}

/// `∫₀ᵀ E[x(t)²] dt` in closed form.
fn second_moment_time_integral(model: &ModelParams, policy: Policy) -> f64 {
    let rate = second_moment_rate(model, policy.gain);
    let noise = model.control_vol * model.control_vol * policy.variance;
    let x0_sq = model.x0 * model.x0;
    let t = model.horizon;
    if math::abs(rate) < RATE_BRANCH_EPS {
        noise * t * t / 2.0 + x0_sq * t
    } else {
        let at = rate * t;
        noise * (math::expm1(at) - at) / (rate * rate) + x0_sq * math::expm1(at) / rate
    }
}

/// `∫₀ᵀ k₁(t) E[x(t)²] dt`, closed form for constant curvature and adaptive
/// Simpson (absolute tolerance 1e-10) otherwise.
fn weighted_moment_integral(model: &ModelParams, policy: Policy, curvature: &Curvature) -> f64 {
    match curvature {
        Curvature::Constant(kappa) => kappa * second_moment_time_integral(model, policy),
        Curvature::TimeVarying(k1) => math::adaptive_simpson(
            &|t| k1(t) * second_moment_state(model, policy, t),
            0.0,
            model.horizon,
            1e-10,
        ),
    }
}

/// Mean policy-gradient increment
/// `h₁(φ₁, φ₂) = -(B + CD + D²φ₁) ∫₀ᵀ k₁(t) E[x(t)²] dt = -(φ₁ - φ₁*) l`.
pub fn mean_gradient(model: &ModelParams, policy: Policy, curvature: &Curvature) -> f64 {
    let coeff = -(model.control_drift
        + model.state_vol * model.control_vol
        + model.control_vol * model.control_vol * policy.gain);
    coeff * weighted_moment_integral(model, policy, curvature)
}

/// Gradient scale `l(φ₁, φ₂) = D² ∫₀ᵀ k₁(t) E[x(t)²] dt ≥ 0`.
pub fn gradient_scale(model: &ModelParams, policy: Policy, curvature: &Curvature) -> f64 {
    model.control_vol * model.control_vol * weighted_moment_integral(model, policy, curvature)
}

/// One-episode regret `J̄(φ₁*, 0) - J̄(φ₁, φ₂)` of deploying `policy`.
pub fn regret_increment(model: &ModelParams, policy: Policy) -> f64 {
    let oracle = Policy::deterministic(optimal_gain_raw(model));
    policy_value(model, oracle) - policy_value(model, policy)
}

/// Differential entropy `½ ln(2πe φ₂)` of the Gaussian policy.
pub fn gaussian_entropy(variance: f64) -> Result<f64> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::NonPositiveVariance);
    }
    Ok(0.5 * math::ln(2.0 * core::f64::consts::PI * core::f64::consts::E * variance))
}
