//! Continuous-time linear-quadratic reinforcement learning at desk scale.
//!
//! The environment is the scalar controlled diffusion
//!
//! ```text
//! dx(t) = (A x(t) + B u(t)) dt + (C x(t) + D u(t)) dW(t),
//! ```
//!
//! with quadratic objective `E[∫ -½Q x² dt - ½H x(T)²]` to be maximized.
//! The crate provides:
//!
//! - [`oracle`]: every closed-form quantity of the model — optimal gain,
//!   state moments, the f/g value decomposition, exact policy values and the
//!   mean policy gradient — used as ground truth for regret and for
//!   estimator-unbiasedness checks.
//! - [`sim`]: seeded Euler–Maruyama episode simulation under a Gaussian
//!   feedback policy, and exact log-space simulation of the closed-loop
//!   geometric dynamics used by the model-based learner.
//! - [`actor_critic`]: the model-free learner — exploration and step-size
//!   schedules, projected critic/actor updates from discretized
//!   temporal-difference sums, and the per-replication episode loop.
//! - [`baseline`]: the model-based comparator — randomized
//!   certainty-equivalent gains, log-trajectory drift/volatility statistics
//!   and experience-replay regressions recovering (A, B, C, D).
//! - [`metrics`]: replication averaging into MSE / cumulative-regret series
//!   and log-log power-law slope fits.
//!
//! The crate is `no_std` (with `alloc`); all transcendental math goes
//! through [`libm`] so results are bit-reproducible across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod actor_critic;
pub mod baseline;
mod math;
pub mod metrics;
pub mod oracle;
pub mod sim;

pub use oracle::{ModelParams, Policy};

use core::fmt;

/// Errors surfaced by the library's fallible operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// The control channel is degenerate (`D = 0`), so no optimal gain exists.
    DegenerateControl,
    /// A model parameter violates its invariant; carries the offending field.
    InvalidModel(&'static str),
    /// An operation that divides by or takes the log of the policy variance
    /// received a variance that is not strictly positive.
    NonPositiveVariance,
    /// Projection interval with `lo > hi`.
    EmptyInterval,
    /// The geometric simulator or a log-trajectory statistic saw a state
    /// that is not strictly positive.
    NonPositiveState,
    /// A trajectory with fewer than two states cannot be differenced.
    TooShortTrajectory,
    /// A regression lacks the required number of distinct regressor values.
    RankDeficient {
        /// Distinct gain values needed for the fit to be well posed.
        distinct_needed: usize,
    },
    /// Replications of unequal length cannot be aggregated.
    LengthMismatch,
    /// A slope fit window that contains no episodes.
    EmptyWindow,
    /// A slope fit over values that are not strictly positive.
    NonPositiveValue,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateControl => write!(f, "control volatility D must be nonzero"),
            Error::InvalidModel(field) => write!(f, "invalid model parameter: {field}"),
            Error::NonPositiveVariance => write!(f, "policy variance must be positive"),
            Error::EmptyInterval => write!(f, "projection interval has lo > hi"),
            Error::NonPositiveState => write!(f, "state must be strictly positive"),
            Error::TooShortTrajectory => write!(f, "trajectory has fewer than two states"),
            Error::RankDeficient { distinct_needed } => {
                write!(f, "regression needs {distinct_needed} distinct gain values")
            }
            Error::LengthMismatch => write!(f, "replication records have mismatched lengths"),
            Error::EmptyWindow => write!(f, "slope fit window contains no episodes"),
            Error::NonPositiveValue => write!(f, "slope fit requires strictly positive values"),
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
