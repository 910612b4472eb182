//! Run configuration: a strict JSON file merged with command-line overrides.
//!
//! Recognised keys: `system`, `B0`, `tau`, `width`, `x0`, `method`, `steps`,
//! `tol`, `window`, `out`, `coupling`, `tau_min`, `tau_max`, `tau_step`,
//! `b0_values`. Times are in units of the pulse width `T`, amplitudes in `1/T`.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use torque_stirap::dynamics::DEFAULT_TOLERANCE;
use torque_stirap::{Method, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    ScanDelay,
    ScanArea,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::ScanDelay => "scan-delay",
            Self::ScanArea => "scan-area",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Rk4,
    Adaptive,
    Rotation,
}

impl FromStr for MethodChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "adaptive" => Ok(Self::Adaptive),
            "rotation" => Ok(Self::Rotation),
            other => bail!("unknown method `{other}` (expected rk4, adaptive or rotation)"),
        }
    }
}

/// Keys accepted in the config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    system: Option<String>,
    #[serde(rename = "B0")]
    b0: Option<f64>,
    tau: Option<f64>,
    width: Option<f64>,
    x0: Option<[f64; 3]>,
    method: Option<String>,
    steps: Option<usize>,
    tol: Option<f64>,
    window: Option<f64>,
    out: Option<PathBuf>,
    coupling: Option<f64>,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    tau_step: Option<f64>,
    b0_values: Option<Vec<f64>>,
}

/// Values given on the command line; each one replaces the file value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub system: Option<String>,
    pub b0: Option<f64>,
    pub tau: Option<f64>,
    pub method: Option<String>,
    pub steps: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayRange {
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
}

impl Default for DelayRange {
    fn default() -> Self {
        Self { tau_min: -3.0, tau_max: 3.0, tau_step: 0.025 }
    }
}

impl DelayRange {
    /// Grid points; exactly antisymmetric when the range is.
    pub fn points(&self) -> Vec<f64> {
        if self.tau_min == -self.tau_max {
            return torque_stirap::analysis::symmetric_delays(self.tau_max, self.tau_step);
        }
        let n = ((self.tau_max - self.tau_min) / self.tau_step).round() as usize;
        (0..=n).map(|i| self.tau_min + i as f64 * self.tau_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(rename = "B0", skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub width: f64,
    pub x0: [f64; 3],
    pub method: MethodChoice,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delays: Option<DelayRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0_values: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn method(&self) -> Method {
        match self.method {
            MethodChoice::Rk4 => Method::Rk4,
            MethodChoice::Adaptive => Method::Adaptive { tol: self.tol },
            MethodChoice::Rotation => Method::PiecewiseRotation,
        }
    }

    pub fn system(&self) -> SystemKind {
        self.system.expect("validated: system present")
    }

    pub fn b0(&self) -> f64 {
        self.b0.expect("validated: B0 present")
    }

    pub fn tau(&self) -> f64 {
        self.tau.expect("validated: tau present")
    }
}

fn required<T>(value: Option<T>, key: &str, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing required key `{key}` (set it in the config file or pass {flag})"))
}

fn positive(value: f64, key: &str) -> Result<f64> {
    ensure!(value.is_finite() && value > 0.0, "`{key}` must be a positive number, got {value}");
    Ok(value)
}

/// Merges the config file contents (may be empty) with the overrides.
pub fn parse_config(contents: &str, flags: &Overrides, experiment: Experiment) -> Result<RunConfig> {
    let file: FileConfig = if contents.trim().is_empty() {
        FileConfig::default()
    } else {
        serde_json::from_str(contents).context("invalid config")?
    };

    let system = flags.system.clone().or(file.system).map(|s| SystemKind::from_str(&s)).transpose()?;
    let b0 = flags.b0.or(file.b0);
    let tau = flags.tau.or(file.tau);
    let method = flags.method.clone().or(file.method).map(|m| m.parse()).transpose()?.unwrap_or(MethodChoice::Adaptive);
    let tol = positive(flags.tol.or(file.tol).unwrap_or(DEFAULT_TOLERANCE), "tol")?;
    let steps = flags.steps.or(file.steps);
    let window = flags.window.or(file.window).map(|w| positive(w, "window")).transpose()?;
    let width = positive(file.width.unwrap_or(1.0), "width")?;
    let x0 = file.x0.unwrap_or([0.0, 0.0, 1.0]);

    if let Some(n) = steps {
        ensure!(n > 0, "`steps` must be at least 1");
    }
    ensure!(x0.iter().all(|c| c.is_finite()) && x0.iter().any(|&c| c != 0.0), "`x0` must be a finite nonzero vector");
    if let Some(b) = b0 {
        ensure!(b.is_finite() && b >= 0.0, "`B0` must be a nonnegative number, got {b}");
    }
    if let Some(t) = tau {
        ensure!(t.is_finite(), "`tau` must be finite");
    }
    if let Some(c) = file.coupling {
        ensure!(c.is_finite(), "`coupling` must be finite");
    }

    let (system, b0, tau) = match experiment {
        Experiment::Simulate => (
            Some(required(system, "system", "--system")?),
            Some(required(b0, "B0", "--b0")?),
            Some(required(tau, "tau", "--tau")?),
        ),
        Experiment::ScanDelay => {
            (Some(required(system, "system", "--system")?), Some(required(b0, "B0", "--b0")?), None)
        }
        Experiment::ScanArea => {
            (Some(required(system, "system", "--system")?), None, Some(required(tau, "tau", "--tau")?))
        }
        Experiment::Verify => (system, b0, tau),
    };

    let delays = (experiment == Experiment::ScanDelay)
        .then(|| -> Result<DelayRange> {
            let d = DelayRange::default();
            let r = DelayRange {
                tau_min: file.tau_min.unwrap_or(d.tau_min),
                tau_max: file.tau_max.unwrap_or(d.tau_max),
                tau_step: positive(file.tau_step.unwrap_or(d.tau_step), "tau_step")?,
            };
            ensure!(
                r.tau_min.is_finite() && r.tau_max.is_finite() && r.tau_min <= r.tau_max,
                "need tau_min <= tau_max"
            );
            Ok(r)
        })
        .transpose()?;

    let b0_values = match file.b0_values {
        Some(v) if experiment == Experiment::ScanArea => {
            ensure!(!v.is_empty(), "`b0_values` must not be empty");
            ensure!(v.iter().all(|b| b.is_finite() && *b >= 0.0), "`b0_values` must be nonnegative numbers");
            Some(v)
        }
        _ => None,
    };

    Ok(RunConfig {
        experiment,
        system,
        coupling: file.coupling,
        b0,
        tau,
        width,
        x0,
        method,
        tol,
        steps,
        window,
        out: flags.out.clone().or(file.out),
        delays,
        b0_values,
    })
}
