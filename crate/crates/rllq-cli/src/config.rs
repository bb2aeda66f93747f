//! Run configuration: INI-style file format, benchmark defaults, CLI
//! overrides and validation.
//!
//! Missing keys take the benchmark defaults (all-ones model, `Δt = 0.01`,
//! `γ = 1`, experimental schedule, 400,000 episodes × 120 replications).
//! Unknown sections or keys are errors, and every validation error names
//! the offending `section.key`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rllq_core::actor_critic::{Critic, CriticBounds, RllqConfig, Schedule};
use rllq_core::baseline::{BaselineConfig, EstimatedModel};
use rllq_core::oracle::ModelParams;
use rllq_core::Error as CoreError;

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Rllq,
    Baseline,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Rllq => "rllq",
            Algo::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleMode {
    Experimental,
    Theoretical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticMode {
    Fixed,
    Learn,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    // run block
    pub algo: Algo,
    pub episodes: u64,
    pub replications: u64,
    pub dt: f64,
    pub base_seed: u64,
    /// Worker pool size; `None` means one worker per available CPU.
    pub workers: Option<u64>,
    pub phi1_init: f64,
    // schedule block
    pub schedule_mode: ScheduleMode,
    pub alpha: f64,
    pub beta: f64,
    pub a_coeff: f64,
    pub a_exp: f64,
    pub b_coeff: f64,
    pub b_exp: f64,
    pub projection_lo: f64,
    pub projection_hi: f64,
    // critic block
    pub critic_mode: CriticMode,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub theta1: f64,
    pub theta2: f64,
    // baseline block
    pub baseline_init: EstimatedModel,
    pub bootstrap_gains: (f64, f64),
    // output block
    pub out_dir: PathBuf,
    pub fit_lo: Option<u64>,
    pub fit_hi: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelParams::all_ones(),
            algo: Algo::Rllq,
            episodes: 400_000,
            replications: 120,
            dt: 0.01,
            base_seed: 1,
            workers: None,
            phi1_init: -0.5,
            schedule_mode: ScheduleMode::Experimental,
            alpha: 1.0,
            beta: 1.0,
            a_coeff: 0.05,
            a_exp: 0.75,
            b_coeff: 0.2,
            b_exp: 0.25,
            projection_lo: -2.2,
            projection_hi: -0.5,
            critic_mode: CriticMode::Fixed,
            gamma: 1.0,
            c1: 1.0,
            c2: 2.0,
            c3: 1.0,
            theta1: 1.0,
            theta2: 0.0,
            baseline_init: EstimatedModel {
                state_drift: 1.0,
                control_drift: 1.0,
                state_vol: 0.5,
                control_vol: 1.0,
            },
            bootstrap_gains: (-0.5, -1.5),
            out_dir: PathBuf::from("out"),
            fit_lo: None,
            fit_hi: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Parses an INI-style document into `(section.key, value)` pairs.
fn parse_ini(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let Some(name) = stripped.strip_suffix(']') else {
                return Err(config_err(format!(
                    "line {}: malformed section",
                    lineno + 1
                )));
            };
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(format!(
                "line {}: expected `key = value`",
                lineno + 1
            )));
        };
        if section.is_empty() {
            return Err(config_err(format!(
                "line {}: key outside any [section]",
                lineno + 1
            )));
        }
        let full = format!("{section}.{}", key.trim());
        if map.insert(full.clone(), value.trim().to_string()).is_some() {
            return Err(config_err(format!("duplicate key \"{full}\"")));
        }
    }
    Ok(map)
}

struct KeyReader {
    map: BTreeMap<String, String>,
}

impl KeyReader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn f64(&mut self, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(raw) = self.take(key) {
            *slot = raw
                .parse::<f64>()
                .map_err(|_| config_err(format!("\"{key}\": not a number: {raw}")))?;
        }
        Ok(())
    }

    fn u64(&mut self, key: &str, slot: &mut u64) -> Result<()> {
        if let Some(raw) = self.take(key) {
            *slot = raw
                .parse::<u64>()
                .map_err(|_| config_err(format!("\"{key}\": not a nonnegative integer: {raw}")))?;
        }
        Ok(())
    }

    fn opt_u64(&mut self, key: &str, slot: &mut Option<u64>) -> Result<()> {
        if let Some(raw) = self.take(key) {
            let value = raw
                .parse::<u64>()
                .map_err(|_| config_err(format!("\"{key}\": not a nonnegative integer: {raw}")))?;
            *slot = Some(value);
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(config_err(format!("unknown key \"{key}\"")));
        }
        Ok(())
    }
}

/// Loads a config file; missing keys fall back to the benchmark defaults.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    from_ini(&text)
}

/// Builds a config from INI text (exposed for tests).
pub fn from_ini(text: &str) -> Result<RunConfig> {
    let mut reader = KeyReader {
        map: parse_ini(text)?,
    };
    let mut cfg = RunConfig::default();

    reader.f64("model.a", &mut cfg.model.state_drift)?;
    reader.f64("model.b", &mut cfg.model.control_drift)?;
    reader.f64("model.c", &mut cfg.model.state_vol)?;
    reader.f64("model.d", &mut cfg.model.control_vol)?;
    reader.f64("model.q", &mut cfg.model.state_cost)?;
    reader.f64("model.h", &mut cfg.model.terminal_cost)?;
    reader.f64("model.x0", &mut cfg.model.x0)?;
    reader.f64("model.t", &mut cfg.model.horizon)?;

    if let Some(raw) = reader.take("run.algo") {
        cfg.algo = match raw.as_str() {
            "rllq" => Algo::Rllq,
            "baseline" => Algo::Baseline,
            other => {
                return Err(config_err(format!(
                    "\"run.algo\": expected rllq or baseline, got {other}"
                )))
            }
        };
    }
    reader.u64("run.episodes", &mut cfg.episodes)?;
    reader.u64("run.replications", &mut cfg.replications)?;
    reader.f64("run.dt", &mut cfg.dt)?;
    reader.u64("run.base_seed", &mut cfg.base_seed)?;
    reader.opt_u64("run.workers", &mut cfg.workers)?;
    reader.f64("run.phi1_init", &mut cfg.phi1_init)?;

    if let Some(raw) = reader.take("schedule.mode") {
        cfg.schedule_mode = match raw.as_str() {
            "experimental" => ScheduleMode::Experimental,
            "theoretical" => ScheduleMode::Theoretical,
            other => {
                return Err(config_err(format!(
                    "\"schedule.mode\": expected experimental or theoretical, got {other}"
                )))
            }
        };
    }
    reader.f64("schedule.alpha", &mut cfg.alpha)?;
    reader.f64("schedule.beta", &mut cfg.beta)?;
    reader.f64("schedule.a_coeff", &mut cfg.a_coeff)?;
    reader.f64("schedule.a_exp", &mut cfg.a_exp)?;
    reader.f64("schedule.b_coeff", &mut cfg.b_coeff)?;
    reader.f64("schedule.b_exp", &mut cfg.b_exp)?;
    reader.f64("schedule.projection_lo", &mut cfg.projection_lo)?;
    reader.f64("schedule.projection_hi", &mut cfg.projection_hi)?;

    if let Some(raw) = reader.take("critic.mode") {
        cfg.critic_mode = match raw.as_str() {
            "fixed" => CriticMode::Fixed,
            "learn" => CriticMode::Learn,
            other => {
                return Err(config_err(format!(
                    "\"critic.mode\": expected fixed or learn, got {other}"
                )))
            }
        };
    }
    reader.f64("critic.gamma", &mut cfg.gamma)?;
    reader.f64("critic.c1", &mut cfg.c1)?;
    reader.f64("critic.c2", &mut cfg.c2)?;
    reader.f64("critic.c3", &mut cfg.c3)?;
    reader.f64("critic.theta1", &mut cfg.theta1)?;
    reader.f64("critic.theta2", &mut cfg.theta2)?;

    reader.f64("baseline.a0", &mut cfg.baseline_init.state_drift)?;
    reader.f64("baseline.b0", &mut cfg.baseline_init.control_drift)?;
    reader.f64("baseline.c0", &mut cfg.baseline_init.state_vol)?;
    reader.f64("baseline.d0", &mut cfg.baseline_init.control_vol)?;
    reader.f64("baseline.bootstrap_gain1", &mut cfg.bootstrap_gains.0)?;
    reader.f64("baseline.bootstrap_gain2", &mut cfg.bootstrap_gains.1)?;

    if let Some(raw) = reader.take("output.dir") {
        cfg.out_dir = PathBuf::from(raw);
    }
    reader.opt_u64("output.fit_lo", &mut cfg.fit_lo)?;
    reader.opt_u64("output.fit_hi", &mut cfg.fit_hi)?;

    reader.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Err(err) = self.model.validate() {
            let field = match err {
                CoreError::InvalidModel(name) => name.to_lowercase(),
                _ => "model".to_string(),
            };
            return Err(config_err(format!("\"model.{field}\": {err}")));
        }
        if self.replications < 1 {
            return Err(config_err("\"run.replications\": must be at least 1"));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 || self.dt > self.model.horizon {
            return Err(config_err("\"run.dt\": must lie in (0, T]"));
        }
        let steps = (self.model.horizon / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.model.horizon).abs() > 1e-9 * self.model.horizon {
            return Err(config_err(
                "\"run.dt\": must divide the horizon T to within 1e-9 relative error",
            ));
        }
        if let Some(w) = self.workers {
            if w < 1 {
                return Err(config_err("\"run.workers\": must be at least 1"));
            }
        }
        if !self.phi1_init.is_finite() {
            return Err(config_err("\"run.phi1_init\": must be finite"));
        }
        match self.schedule_mode {
            ScheduleMode::Experimental => {
                for (key, v) in [
                    ("schedule.a_coeff", self.a_coeff),
                    ("schedule.a_exp", self.a_exp),
                    ("schedule.b_coeff", self.b_coeff),
                    ("schedule.b_exp", self.b_exp),
                ] {
                    if !v.is_finite() || v <= 0.0 {
                        return Err(config_err(format!("\"{key}\": must be positive")));
                    }
                }
                if self.projection_lo > self.projection_hi {
                    return Err(config_err(
                        "\"schedule.projection_lo\": must not exceed schedule.projection_hi",
                    ));
                }
            }
            ScheduleMode::Theoretical => {
                if !self.alpha.is_finite() || self.alpha <= 0.0 {
                    return Err(config_err("\"schedule.alpha\": must be positive"));
                }
                if !self.beta.is_finite() || self.beta <= 0.0 {
                    return Err(config_err("\"schedule.beta\": must be positive"));
                }
            }
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(config_err("\"critic.gamma\": must be nonnegative"));
        }
        if !self.c1.is_finite() || self.c1 <= 0.0 {
            return Err(config_err("\"critic.c1\": must be positive"));
        }
        if !self.c2.is_finite() || self.c2 < 1.0 {
            return Err(config_err("\"critic.c2\": must be at least 1"));
        }
        if !self.c3.is_finite() || self.c3 <= 0.0 {
            return Err(config_err("\"critic.c3\": must be positive"));
        }
        if self.theta1 < 1.0 / self.c2 || self.theta1 > self.c2 {
            return Err(config_err("\"critic.theta1\": must lie in [1/c2, c2]"));
        }
        if self.theta2.abs() > self.c3 {
            return Err(config_err("\"critic.theta2\": must lie in [-c3, c3]"));
        }
        if self.algo == Algo::Baseline {
            if !self.baseline_init.control_vol.is_finite() || self.baseline_init.control_vol <= 0.0
            {
                return Err(config_err("\"baseline.d0\": must be positive"));
            }
            if self.bootstrap_gains.0 == self.bootstrap_gains.1 {
                return Err(config_err(
                    "\"baseline.bootstrap_gain2\": bootstrap gains must be distinct",
                ));
            }
            if self.model.x0 <= 0.0 {
                return Err(config_err(
                    "\"model.x0\": must be positive for the baseline's geometric dynamics",
                ));
            }
        }
        if let (Some(lo), Some(hi)) = (self.fit_lo, self.fit_hi) {
            if lo < 1 || lo > hi {
                return Err(config_err("\"output.fit_lo\": need 1 <= fit_lo <= fit_hi"));
            }
        }
        Ok(())
    }

    /// The slope fit window, defaulting to `[N/10, N]` past the transient.
    pub fn fit_window(&self) -> (u64, u64) {
        let hi = self.fit_hi.unwrap_or(self.episodes);
        let lo = self.fit_lo.unwrap_or((self.episodes / 10).max(1));
        (lo, hi)
    }

    pub fn schedule(&self) -> Schedule {
        match self.schedule_mode {
            ScheduleMode::Experimental => Schedule::Experimental {
                a_coeff: self.a_coeff,
                a_exp: self.a_exp,
                b_coeff: self.b_coeff,
                b_exp: self.b_exp,
                projection_lo: self.projection_lo,
                projection_hi: self.projection_hi,
            },
            ScheduleMode::Theoretical => Schedule::Theoretical {
                alpha: self.alpha,
                beta: self.beta,
            },
        }
    }

    pub fn rllq_config(&self) -> RllqConfig {
        RllqConfig {
            model: self.model,
            schedule: self.schedule(),
            critic: Critic {
                level: self.theta1,
                slope: self.theta2,
            },
            critic_bounds: CriticBounds {
                max_curvature_rate: self.c1,
                curvature_range: self.c2,
                max_offset_rate: self.c3,
            },
            learn_critic: self.critic_mode == CriticMode::Learn,
            gamma: self.gamma,
            initial_gain: self.phi1_init,
            episodes: self.episodes,
            dt: self.dt,
        }
    }

    pub fn baseline_config(&self) -> BaselineConfig {
        BaselineConfig {
            model: self.model,
            initial: self.baseline_init,
            bootstrap_gains: self.bootstrap_gains,
            episodes: self.episodes,
            dt: self.dt,
        }
    }

    /// Echoes the resolved configuration in the file format.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[model]");
        let _ = writeln!(s, "a = {}", self.model.state_drift);
        let _ = writeln!(s, "b = {}", self.model.control_drift);
        let _ = writeln!(s, "c = {}", self.model.state_vol);
        let _ = writeln!(s, "d = {}", self.model.control_vol);
        let _ = writeln!(s, "q = {}", self.model.state_cost);
        let _ = writeln!(s, "h = {}", self.model.terminal_cost);
        let _ = writeln!(s, "x0 = {}", self.model.x0);
        let _ = writeln!(s, "t = {}", self.model.horizon);
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "algo = {}", self.algo.as_str());
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "replications = {}", self.replications);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "base_seed = {}", self.base_seed);
        match self.workers {
            Some(w) => {
                let _ = writeln!(s, "workers = {w}");
            }
            None => {
                let _ = writeln!(s, "# workers = auto");
            }
        }
        let _ = writeln!(s, "phi1_init = {}", self.phi1_init);
        let _ = writeln!(s, "[schedule]");
        let mode = match self.schedule_mode {
            ScheduleMode::Experimental => "experimental",
            ScheduleMode::Theoretical => "theoretical",
        };
        let _ = writeln!(s, "mode = {mode}");
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "a_coeff = {}", self.a_coeff);
        let _ = writeln!(s, "a_exp = {}", self.a_exp);
        let _ = writeln!(s, "b_coeff = {}", self.b_coeff);
        let _ = writeln!(s, "b_exp = {}", self.b_exp);
        let _ = writeln!(s, "projection_lo = {}", self.projection_lo);
        let _ = writeln!(s, "projection_hi = {}", self.projection_hi);
        let _ = writeln!(s, "[critic]");
        let mode = match self.critic_mode {
            CriticMode::Fixed => "fixed",
            CriticMode::Learn => "learn",
        };
        let _ = writeln!(s, "mode = {mode}");
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "c1 = {}", self.c1);
        let _ = writeln!(s, "c2 = {}", self.c2);
        let _ = writeln!(s, "c3 = {}", self.c3);
        let _ = writeln!(s, "theta1 = {}", self.theta1);
        let _ = writeln!(s, "theta2 = {}", self.theta2);
        let _ = writeln!(s, "[baseline]");
        let _ = writeln!(s, "a0 = {}", self.baseline_init.state_drift);
        let _ = writeln!(s, "b0 = {}", self.baseline_init.control_drift);
        let _ = writeln!(s, "c0 = {}", self.baseline_init.state_vol);
        let _ = writeln!(s, "d0 = {}", self.baseline_init.control_vol);
        let _ = writeln!(s, "bootstrap_gain1 = {}", self.bootstrap_gains.0);
        let _ = writeln!(s, "bootstrap_gain2 = {}", self.bootstrap_gains.1);
        let _ = writeln!(s, "[output]");
        let _ = writeln!(s, "dir = {}", self.out_dir.display());
        let (lo, hi) = self.fit_window();
        let _ = writeln!(s, "fit_lo = {lo}");
        let _ = writeln!(s, "fit_hi = {hi}");
        s
    }
}

/// Optional command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algo: Option<Algo>,
    pub episodes: Option<u64>,
    pub replications: Option<u64>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<u64>,
    pub fit_window: Option<(u64, u64)>,
}

impl RunConfig {
    pub fn apply(&mut self, overrides: &Overrides) -> Result<()> {
        if let Some(algo) = overrides.algo {
            self.algo = algo;
        }
        if let Some(n) = overrides.episodes {
            self.episodes = n;
        }
        if let Some(r) = overrides.replications {
            self.replications = r;
        }
        if let Some(seed) = overrides.seed {
            self.base_seed = seed;
        }
        if let Some(dt) = overrides.dt {
            self.dt = dt;
        }
        if let Some(out) = &overrides.out {
            self.out_dir = out.clone();
        }
        if let Some(w) = overrides.workers {
            self.workers = Some(w);
        }
        if let Some((lo, hi)) = overrides.fit_window {
            self.fit_lo = Some(lo);
            self.fit_hi = Some(hi);
        }
        self.validate()
    }
}

/// Worker-count resolution: CLI flag, then the `RLLQ_WORKERS` environment
/// variable, then the config key, then one per available CPU.
pub fn resolve_workers(
    flag: Option<u64>,
    env: Option<&str>,
    config: Option<u64>,
) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(raw) = env {
        let value: u64 = raw
            .parse()
            .map_err(|_| config_err(format!("RLLQ_WORKERS: not a nonnegative integer: {raw}")))?;
        if value < 1 {
            return Err(config_err("RLLQ_WORKERS: must be at least 1"));
        }
        return Ok(Some(value));
    }
    Ok(config)
}

/// Parses the `LO:HI` fit-window flag.
pub fn parse_fit_window(raw: &str) -> Result<(u64, u64)> {
    let Some((lo, hi)) = raw.split_once(':') else {
        return Err(config_err(format!(
            "--fit-window: expected LO:HI, got {raw}"
        )));
    };
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| config_err(format!("--fit-window: bad lower bound {lo}")))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| config_err(format!("--fit-window: bad upper bound {hi}")))?;
    Ok((lo, hi))
}
