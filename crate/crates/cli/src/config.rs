//! Scenario files: one `key = value` per line, `#` starts a comment.
//!
//! Every key is optional; an empty document is the critically damped
//! reference scenario (γ = 2, α = 1, Y₀ = 1, Ẏ₀ = 0 on `[0, 20]` with
//! `dt = 0.1`, no shock, paper Euler).
//!
//! | key               | value                                        |
//! |-------------------|----------------------------------------------|
//! | `gamma`, `alpha`  | oscillator parameters                        |
//! | `y0`, `ydot0`     | initial state                                |
//! | `t_end`, `dt`     | grid span and step                           |
//! | `integrator`      | `paper-euler`, `rk4` or `analytic` (unforced) |
//! | `shock`           | `none`, `impulse`, `white-noise`, `ar1`      |
//! | `shock_at`        | impulse time (default 0)                     |
//! | `shock_magnitude` | impulse size (default 1)                     |
//! | `shock_sigma`     | noise scale (default 0.1)                    |
//! | `shock_rho`       | AR(1) persistence (default 0.5)              |
//! | `shock_seed`      | generator seed (default 0)                   |
//! | `noise_scaling`   | `diffusion` (σ/√dt, default) or `literal`    |

use std::fmt;
use std::str::FromStr;

use gapdyn::integrators::{integrate_paper_euler, integrate_rk4_held};
use gapdyn::{
    realize_with, NoiseScaling, OscState, OscillatorParams, ShockSpec, TimeGrid, Trajectory,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value '{value}' for {key}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{field}: {detail}")]
    InvariantViolation { field: String, detail: String },
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey { .. } => "UnknownKey",
            ConfigError::BadValue { .. } => "BadValue",
            ConfigError::InvariantViolation { .. } => "InvariantViolation",
        }
    }

    fn invariant(field: &str, detail: impl fmt::Display) -> Self {
        ConfigError::InvariantViolation {
            field: field.to_string(),
            detail: detail.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    PaperEuler,
    Rk4,
    /// Closed-form solution; only meaningful without a shock.
    Analytic,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::PaperEuler => "paper-euler",
            Integrator::Rk4 => "rk4",
            Integrator::Analytic => "analytic",
        }
    }
}

impl FromStr for Integrator {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "paper-euler" | "paper_euler" | "euler" => Ok(Integrator::PaperEuler),
            "rk4" => Ok(Integrator::Rk4),
            "analytic" => Ok(Integrator::Analytic),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub y0: f64,
    pub ydot0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub shock: ShockSpec,
    pub noise_scaling: NoiseScaling,
    pub integrator: Integrator,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            alpha: 1.0,
            y0: 1.0,
            ydot0: 0.0,
            t_end: 20.0,
            dt: 0.1,
            shock: ShockSpec::None,
            noise_scaling: NoiseScaling::Diffusion,
            integrator: Integrator::PaperEuler,
        }
    }
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<OscillatorParams, ConfigError> {
        OscillatorParams::new(self.gamma, self.alpha).map_err(|e| {
            let field = if e.to_string().starts_with("gamma") {
                "gamma"
            } else {
                "alpha"
            };
            ConfigError::invariant(field, e)
        })
    }

    pub fn init(&self) -> OscState {
        OscState::new(self.y0, self.ydot0)
    }

    /// `floor(t_end/dt) + 1` samples starting at 0.
    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(ConfigError::invariant("t_end", "must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::invariant("dt", "must be positive"));
        }
        if self.dt > self.t_end {
            return Err(ConfigError::invariant("dt", "must not exceed t_end"));
        }
        TimeGrid::span(self.t_end, self.dt).map_err(|e| ConfigError::invariant("dt", e))
    }

    pub fn validate(self) -> Result<Self, ConfigError> {
        self.params()?;
        self.grid()?;
        if !self.y0.is_finite() {
            return Err(ConfigError::invariant("y0", "must be finite"));
        }
        if !self.ydot0.is_finite() {
            return Err(ConfigError::invariant("ydot0", "must be finite"));
        }
        self.shock
            .validate()
            .map_err(|e| ConfigError::invariant("shock", e))?;
        if self.integrator == Integrator::Analytic && self.shock != ShockSpec::None {
            return Err(ConfigError::invariant(
                "integrator",
                "analytic requires shock = none",
            ));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ShockKind {
    None,
    Impulse,
    WhiteNoise,
    Ar1,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut kind = ShockKind::None;
    let (mut at, mut magnitude, mut sigma, mut rho, mut seed) = (0.0, 1.0, 0.1, 0.5, 0u64);

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::BadValue {
                line,
                key: content.to_string(),
                value: String::new(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let bad = || ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let num = || value.parse::<f64>().map_err(|_| bad());
        match key {
            "gamma" => cfg.gamma = num()?,
            "alpha" => cfg.alpha = num()?,
            "y0" => cfg.y0 = num()?,
            "ydot0" => cfg.ydot0 = num()?,
            "t_end" => cfg.t_end = num()?,
            "dt" => cfg.dt = num()?,
            "integrator" => cfg.integrator = value.parse().map_err(|_| bad())?,
            "shock" => {
                kind = match value {
                    "none" => ShockKind::None,
                    "impulse" => ShockKind::Impulse,
                    "white-noise" | "white_noise" => ShockKind::WhiteNoise,
                    "ar1" => ShockKind::Ar1,
                    _ => return Err(bad()),
                }
            }
            "shock_at" => at = num()?,
            "shock_magnitude" => magnitude = num()?,
            "shock_sigma" => sigma = num()?,
            "shock_rho" => rho = num()?,
            "shock_seed" => seed = value.parse().map_err(|_| bad())?,
            "noise_scaling" => {
                cfg.noise_scaling = match value {
                    "diffusion" => NoiseScaling::Diffusion,
                    "literal" => NoiseScaling::Literal,
                    _ => return Err(bad()),
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }

    cfg.shock = match kind {
        ShockKind::None => ShockSpec::None,
        ShockKind::Impulse => ShockSpec::Impulse { at, magnitude },
        ShockKind::WhiteNoise => ShockSpec::WhiteNoise { sigma, seed },
        ShockKind::Ar1 => ShockSpec::Ar1 { rho, sigma, seed },
    };
    cfg.validate()
}

/// Errors from running a scenario, tagged with the core error name.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{detail}")]
pub struct RunError {
    pub name: &'static str,
    pub detail: String,
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError {
            name: e.name(),
            detail: e.to_string(),
        }
    }
}

/// Realizes the shock and integrates the scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Trajectory, RunError> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let forcing = realize_with(&cfg.shock, &grid, cfg.noise_scaling).map_err(|e| RunError {
        name: e.name(),
        detail: e.to_string(),
    })?;
    let traj = match cfg.integrator {
        Integrator::PaperEuler => integrate_paper_euler(&params, cfg.init(), &forcing, grid),
        Integrator::Rk4 => integrate_rk4_held(&params, cfg.init(), &forcing, grid),
        Integrator::Analytic => Trajectory::analytic(&params, cfg.init(), grid),
    };
    traj.map_err(|e| RunError {
        name: e.name(),
        detail: e.to_string(),
    })
}
