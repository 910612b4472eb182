//! Experiment dispatch.

use std::fmt::Write as _;

use anyhow::{ensure, Context, Result};
use serde::Serialize;
use torque_stirap::analysis::{self, ScanOptions, ScanResult};
use torque_stirap::dynamics::{TimeGrid, DEFAULT_STEPS};
use torque_stirap::pulse::Window;
use torque_stirap::verify::{self, Check, Comparison};
use torque_stirap::{systems, PulseSchedule, StateVector3, SystemMapping};

use crate::config::{Experiment, RunConfig};
use crate::output::{fmt_float, Csv};

pub const THREADS_ENV: &str = "TORQUE_STIRAP_THREADS";

/// Process outcome: `Ok(true)` when everything succeeded.
pub type Outcome = Result<bool>;

/// Worker cap from [`THREADS_ENV`]; `None` when unset.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize =
                v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a positive integer"))?;
            ensure!(n > 0, "{THREADS_ENV} must be at least 1");
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_ENV),
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.experiment {
        Experiment::Simulate => simulate(cfg),
        Experiment::ScanDelay => scan_delay(cfg),
        Experiment::ScanArea => scan_area(cfg),
        Experiment::Verify => run_verify(cfg),
    }
}

fn header(cfg: &RunConfig) -> Result<Csv> {
    Ok(Csv::new(cfg.experiment.name(), &serde_json::to_string(cfg)?))
}

fn mapping(cfg: &RunConfig) -> SystemMapping {
    SystemMapping::for_kind(cfg.system(), cfg.coupling)
}

fn scan_options(cfg: &RunConfig) -> Result<ScanOptions> {
    Ok(ScanOptions {
        method: cfg.method(),
        steps: cfg.steps,
        x0: cfg.x0,
        half_window: cfg.window,
        threads: thread_cap()?,
    })
}

pub fn simulate_csv(cfg: &RunConfig) -> Result<(Csv, bool)> {
    let schedule = PulseSchedule::gaussian_pair(cfg.b0(), cfg.width, cfg.tau())?;
    let window = cfg.window.map(Window::symmetric).unwrap_or_else(|| schedule.default_window());
    let grid = TimeGrid::uniform(window, cfg.steps.unwrap_or(DEFAULT_STEPS))?;
    let mut csv = header(cfg)?;
    csv.meta("window_over_T", &format!("[{}, {}]", fmt_float(window.start), fmt_float(window.end)));
    csv.columns(&["t_over_T", "x", "y", "z", "dark_variable", "mixing_angle_rad", "norm"]);
    match systems::simulate(mapping(cfg), &schedule, StateVector3::from(cfg.x0), &grid, cfg.method()) {
        Ok(traj) => {
            for ((t, x), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
                let dark = d.dark_variable.unwrap_or(f64::NAN);
                let theta = d.mixing_angle.unwrap_or(f64::NAN);
                csv.row(&[*t, x.x, x.y, x.z, dark, theta, x.norm()]);
            }
            Ok((csv, true))
        }
        Err(e) => {
            csv.footer(&format!("FAILED: {e}; no samples written"));
            Ok((csv, false))
        }
    }
}

fn simulate(cfg: &RunConfig) -> Outcome {
    let (csv, ok) = simulate_csv(cfg)?;
    csv.emit(cfg.out.as_deref())?;
    Ok(ok)
}

fn scan_rows(csv: &mut Csv, result: &ScanResult, extra: impl Fn(&analysis::ScanRow) -> Vec<f64>) -> bool {
    for r in &result.rows {
        let mut values =
            vec![r.parameter, r.final_state[0], r.final_state[1], r.final_state[2], r.rms_area, r.norm_drift];
        values.extend(extra(r));
        csv.row(&values);
    }
    let failures: Vec<String> = result
        .failures()
        .map(|r| format!("{}={}: {}", result.parameter_name, fmt_float(r.parameter), r.error.as_deref().unwrap_or("")))
        .collect();
    if !failures.is_empty() {
        csv.footer(&format!("FAILED points: {}\n{}", failures.len(), failures.join("\n")));
    }
    failures.is_empty()
}

pub fn scan_delay_csv(cfg: &RunConfig) -> Result<(Csv, bool)> {
    let base = PulseSchedule::gaussian_pair(cfg.b0(), cfg.width, 0.0)?;
    let delays = cfg.delays.unwrap_or_default().points();
    let result = analysis::delay_scan(&base, &delays, mapping(cfg), &scan_options(cfg)?);
    let mut csv = header(cfg)?;
    csv.columns(&["tau_over_T", "vx", "vy", "vz", "rms_area", "norm_drift"]);
    let ok = scan_rows(&mut csv, &result, |_| Vec::new());
    Ok((csv, ok))
}

fn scan_delay(cfg: &RunConfig) -> Outcome {
    let (csv, ok) = scan_delay_csv(cfg)?;
    csv.emit(cfg.out.as_deref())?;
    Ok(ok)
}

pub fn scan_area_csv(cfg: &RunConfig) -> Result<(Csv, bool)> {
    let m = mapping(cfg);
    let opts = scan_options(cfg)?;
    let base = PulseSchedule::gaussian_pair(1.0, cfg.width, cfg.tau())?;
    let amplitudes = match &cfg.b0_values {
        Some(v) => v.clone(),
        None => analysis::amplitudes_for_areas(&base, &analysis::default_area_targets(), m, &opts)?,
    };
    let result = analysis::area_scan(&base, &amplitudes, m, &opts);
    let mut csv = header(cfg)?;
    csv.columns(&["b0_times_T", "vx", "vy", "vz", "rms_area", "norm_drift", "equivalent_area"]);
    let ok = scan_rows(&mut csv, &result, |r| vec![analysis::equivalent_area(m, r.rms_area)]);
    Ok((csv, ok))
}

fn scan_area(cfg: &RunConfig) -> Outcome {
    let (csv, ok) = scan_area_csv(cfg)?;
    csv.emit(cfg.out.as_deref())?;
    Ok(ok)
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'a str,
    passed: bool,
    checks: &'a [Check],
}

pub fn verify_table(checks: &[Check]) -> String {
    let mut s = String::new();
    writeln!(s, "{:<13} {:<26} {:>14} {:>3} {:>10}  result", "group", "check", "measured", "", "threshold").unwrap();
    for c in checks {
        let op = match c.comparison {
            Comparison::Below => "<",
            Comparison::AtLeast => ">=",
        };
        let result = if c.passed { "PASS" } else { "FAIL" };
        writeln!(s, "{:<13} {:<26} {:>14.6e} {:>3} {:>10.3e}  {result}", c.group, c.name, c.measured, op, c.threshold)
            .unwrap();
    }
    s
}

pub fn verify_json(checks: &[Check]) -> Result<String> {
    let passed = checks.iter().all(|c| c.passed);
    Ok(serde_json::to_string_pretty(&Summary { version: crate::output::VERSION, passed, checks })?)
}

fn run_verify(cfg: &RunConfig) -> Outcome {
    let checks = verify::run_suite();
    let json = verify_json(&checks)?;
    print!("{}", verify_table(&checks));
    println!("{json}");
    if let Some(p) = &cfg.out {
        std::fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(checks.iter().all(|c| c.passed))
}
