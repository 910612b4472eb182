//! Experiment drivers: delay and amplitude scans, transfer efficiency and
//! adiabaticity reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Method, TimeGrid, Trajectory, DEFAULT_STEPS};
use crate::pulse::{PulseSchedule, Window};
use crate::quadrature;
use crate::systems::{self, SystemMapping};
use crate::{Result, StateVector3};

/// Fraction of the peak field below which the mixing-angle rate is not
/// compared against the field: in the far tails both pulses vanish, the
/// ratio diverges and nothing moves.
pub const RATE_RATIO_FIELD_CUTOFF: f64 = 1e-3;

/// Output samples per scan point for the adaptive method.
pub const ADAPTIVE_SCAN_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetAxis {
    X,
    Y,
    Z,
}

impl TargetAxis {
    pub fn index(self) -> usize {
        match self {
            Self::X => 0,
            Self::Y => 1,
            Self::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Areas {
    pub a_p: f64,
    pub a_s: f64,
    pub a_rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// `(X_target(end) / ‖X(0)‖)²`
    pub transfer_efficiency: f64,
    /// `max_t (X_y(t) / ‖X(0)‖)²`, the intermediate-state population analog.
    pub max_intermediate: f64,
    pub areas: Areas,
}

/// Pulse areas by trapezoid quadrature on the given sample times.
pub fn areas_on(schedule: &PulseSchedule, times: &[f64]) -> Areas {
    let p: Vec<f64> = times.iter().map(|&t| schedule.p_at(t)).collect();
    let s: Vec<f64> = times.iter().map(|&t| schedule.s_at(t)).collect();
    let rms: Vec<f64> = p.iter().zip(&s).map(|(a, b)| a.hypot(*b)).collect();
    Areas {
        a_p: quadrature::trapezoid_samples(times, &p),
        a_s: quadrature::trapezoid_samples(times, &s),
        a_rms: quadrature::trapezoid_samples(times, &rms),
    }
}

pub fn transfer_efficiency(traj: &Trajectory, target: TargetAxis, schedule: &PulseSchedule) -> EfficiencyReport {
    let n0 = traj.initial().norm_squared();
    let last = traj.last();
    let max_intermediate = traj.states.iter().map(|x| x.y * x.y / n0).fold(0.0, f64::max);
    EfficiencyReport {
        transfer_efficiency: last[target.index()].powi(2) / n0,
        max_intermediate,
        areas: areas_on(schedule, &traj.times),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticityReport {
    pub a_p: f64,
    pub a_s: f64,
    pub a_rms: f64,
    /// `max |dϑ/dt| / √(p² + s²)` where the field exceeds
    /// [`RATE_RATIO_FIELD_CUTOFF`] of its peak.
    pub max_theta_rate_ratio: f64,
}

/// Largest `|dϑ/dt| / √(p² + s²)` on `times` (uniform), with `dϑ/dt` by
/// centered differences at the grid step.
pub fn max_theta_rate_ratio(schedule: &PulseSchedule, times: &[f64]) -> f64 {
    let rms: Vec<f64> = times.iter().map(|&t| schedule.p_at(t).hypot(schedule.s_at(t))).collect();
    let peak = rms.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 || times.len() < 3 {
        return 0.0;
    }
    let theta: Vec<Option<f64>> = times.iter().map(|&t| schedule.mixing_angle_at(t).theta()).collect();
    let mut worst: f64 = 0.0;
    for i in 1..times.len() - 1 {
        if rms[i] < RATE_RATIO_FIELD_CUTOFF * peak {
            continue;
        }
        if let (Some(a), Some(b)) = (theta[i - 1], theta[i + 1]) {
            let rate = (b - a) / (times[i + 1] - times[i - 1]);
            worst = worst.max(rate.abs() / rms[i]);
        }
    }
    worst
}

pub fn adiabaticity_report(schedule: &PulseSchedule) -> Result<AdiabaticityReport> {
    adiabaticity_report_on(schedule, &TimeGrid::uniform(schedule.default_window(), DEFAULT_STEPS)?)
}

pub fn adiabaticity_report_on(schedule: &PulseSchedule, grid: &TimeGrid) -> Result<AdiabaticityReport> {
    let areas = areas_on(schedule, grid.times());
    Ok(AdiabaticityReport {
        a_p: areas.a_p,
        a_s: areas.a_s,
        a_rms: areas.a_rms,
        max_theta_rate_ratio: max_theta_rate_ratio(schedule, grid.times()),
    })
}

/// Integration settings shared by the scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub method: Method,
    /// Grid intervals; `None` picks [`DEFAULT_STEPS`] for fixed-step methods
    /// and [`ADAPTIVE_SCAN_SAMPLES`] for the adaptive one.
    pub steps: Option<usize>,
    pub x0: [f64; 3],
    /// Symmetric window half-width; `None` uses each schedule's default window.
    pub half_window: Option<f64>,
    /// Worker cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { method: Method::adaptive(), steps: None, x0: [0.0, 0.0, 1.0], half_window: None, threads: None }
    }
}

impl ScanOptions {
    pub fn intervals(&self) -> usize {
        self.steps.unwrap_or(match self.method {
            Method::Adaptive { .. } => ADAPTIVE_SCAN_SAMPLES,
            _ => DEFAULT_STEPS,
        })
    }

    pub fn window_for(&self, schedule: &PulseSchedule) -> Window {
        self.half_window.map(Window::symmetric).unwrap_or_else(|| schedule.default_window())
    }

    pub fn grid_for(&self, schedule: &PulseSchedule) -> Result<TimeGrid> {
        TimeGrid::uniform(self.window_for(schedule), self.intervals())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub parameter: f64,
    /// Final state; NaN when the integration failed.
    pub final_state: [f64; 3],
    pub rms_area: f64,
    pub max_theta_rate_ratio: f64,
    pub norm_drift: f64,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn final_vector(&self) -> StateVector3 {
        StateVector3::from(self.final_state)
    }

    pub fn efficiency(&self, target: TargetAxis) -> f64 {
        self.final_state[target.index()].powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub parameter_name: String,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn failures(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

/// Delays `τ = k·step` for `k = −n..=n`, exactly antisymmetric about zero.
pub fn symmetric_delays(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step).round() as i64;
    (-n..=n).map(|k| k as f64 * step).collect()
}

/// 241 delays over `[−3T, 3T]`.
pub fn default_delays() -> Vec<f64> {
    symmetric_delays(3.0, 0.025)
}

fn scan_point(mapping: SystemMapping, schedule: &PulseSchedule, parameter: f64, opts: &ScanOptions) -> ScanRow {
    let grid = match opts.grid_for(schedule) {
        Ok(g) => g,
        Err(e) => return failed_row(parameter, e.to_string()),
    };
    let rms_area = areas_on(schedule, grid.times()).a_rms;
    let ratio = max_theta_rate_ratio(schedule, grid.times());
    match systems::simulate(mapping, schedule, StateVector3::from(opts.x0), &grid, opts.method) {
        Ok(traj) => {
            let last = traj.last();
            ScanRow {
                parameter,
                final_state: [last.x, last.y, last.z],
                rms_area,
                max_theta_rate_ratio: ratio,
                norm_drift: traj.norm_drift,
                error: None,
            }
        }
        Err(e) => ScanRow { rms_area, max_theta_rate_ratio: ratio, ..failed_row(parameter, e.to_string()) },
    }
}

fn failed_row(parameter: f64, error: String) -> ScanRow {
    ScanRow {
        parameter,
        final_state: [f64::NAN; 3],
        rms_area: f64::NAN,
        max_theta_rate_ratio: f64::NAN,
        norm_drift: f64::NAN,
        error: Some(error),
    }
}

fn run_points<F>(params: &[f64], threads: Option<usize>, point: F) -> Vec<ScanRow>
where
    F: Fn(f64) -> ScanRow + Sync + Send,
{
    let work = || params.par_iter().map(|&p| point(p)).collect::<Vec<_>>();
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => params.iter().map(|&p| point(p)).collect(),
        },
        None => work(),
    }
}

/// Final state versus pulse delay; each point rebuilds the schedule with
/// the P pulse at `−τ/2` and the S pulse at `+τ/2`.
pub fn delay_scan(base: &PulseSchedule, delays: &[f64], mapping: SystemMapping, opts: &ScanOptions) -> ScanResult {
    let rows = run_points(delays, opts.threads, |tau| scan_point(mapping, &base.with_delay(tau), tau, opts));
    ScanResult { parameter_name: "tau_over_T".into(), rows }
}

/// Final state versus peak amplitude at fixed delay and shape.
pub fn area_scan(base: &PulseSchedule, amplitudes: &[f64], mapping: SystemMapping, opts: &ScanOptions) -> ScanResult {
    let rows = run_points(amplitudes, opts.threads, |b0| match base.with_amplitude(b0) {
        Ok(s) => scan_point(mapping, &s, b0, opts),
        Err(e) => failed_row(b0, e.to_string()),
    });
    ScanResult { parameter_name: "b0_times_T".into(), rows }
}

/// Equivalent areas `2∫|W| dt` swept by the default amplitude scan.
pub fn default_area_targets() -> Vec<f64> {
    (0..=60).map(|i| 100.0 + 0.5 * i as f64).collect()
}

/// `2∫|W| dt` for a schedule seen through `mapping`: the rms area for the
/// quantum system, in which `|W| = |Ω|/2`.
pub fn equivalent_area(mapping: SystemMapping, rms_area: f64) -> f64 {
    2.0 * mapping.rate_scale() * rms_area
}

/// Peak amplitudes at which `base` reaches each equivalent area on the
/// scan grid (the trapezoid area is linear in the amplitude).
pub fn amplitudes_for_areas(
    base: &PulseSchedule,
    areas: &[f64],
    mapping: SystemMapping,
    opts: &ScanOptions,
) -> Result<Vec<f64>> {
    let unit = base.with_amplitude(1.0)?;
    let per_unit = equivalent_area(mapping, areas_on(&unit, opts.grid_for(&unit)?.times()).a_rms);
    Ok(areas.iter().map(|a| a / per_unit).collect())
}
