//! Acceptance checks. Each test prints one `[PASS]`/`[FAIL]` line with the
//! measured value and its pinned threshold; run with `--nocapture` to see
//! them all.

use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use torque_stirap::analysis::{self, ScanOptions, ScanResult, TargetAxis};
use torque_stirap::dynamics::{TimeGrid, DEFAULT_STEPS};
use torque_stirap::verify;
use torque_stirap::{systems, Method, PulseSchedule, StateVector3, SystemMapping, Trajectory};

fn report(name: &str, measured: f64, op: &str, threshold: f64) {
    let passed = match op {
        "<" => measured < threshold,
        ">" => measured > threshold,
        ">=" => measured >= threshold,
        _ => unreachable!(),
    };
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: measured {measured:.6e} (required {op} {threshold:e})");
    assert!(passed, "{name}: {measured} not {op} {threshold}");
}

// Counterintuitive transfer, B₀ = 20/T, τ = −1.2T, default grid.

fn transfer_run() -> &'static (Trajectory, Duration) {
    static RUN: OnceLock<(Trajectory, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let s = PulseSchedule::gaussian_pair(20.0, 1.0, -1.2).unwrap();
        let grid = TimeGrid::uniform(s.default_window(), DEFAULT_STEPS).unwrap();
        let t =
            systems::simulate(SystemMapping::lorentz(1.0), &s, StateVector3::z(), &grid, Method::adaptive()).unwrap();
        (t, start.elapsed())
    })
}

#[test]
fn transfer_final_x_alignment() {
    report("transfer: final |x|", transfer_run().0.last().x.abs(), ">", 0.99);
}

#[test]
fn transfer_y_stays_small() {
    let max_y = transfer_run().0.states.iter().map(|x| x.y.abs()).fold(0.0, f64::max);
    report("transfer: max_t |y|", max_y, "<", 0.05);
}

#[test]
fn transfer_efficiency_report() {
    let s = PulseSchedule::gaussian_pair(20.0, 1.0, -1.2).unwrap();
    let r = analysis::transfer_efficiency(&transfer_run().0, TargetAxis::X, &s);
    report("transfer: efficiency into x", r.transfer_efficiency, ">", 0.99);
    report("transfer: max_intermediate (max y²)", r.max_intermediate, "<", 0.0025);
}

#[test]
fn transfer_runtime() {
    report("transfer: runtime [s]", transfer_run().1.as_secs_f64(), "<", 1.0);
}

// Delay scan, B₀ = 40/T, τ ∈ [−3T, 3T], single thread.

fn delay_scan() -> &'static (ScanResult, Duration) {
    static SCAN: OnceLock<(ScanResult, Duration)> = OnceLock::new();
    SCAN.get_or_init(|| {
        let start = Instant::now();
        let base = PulseSchedule::gaussian_pair(40.0, 1.0, 0.0).unwrap();
        let opts = ScanOptions { threads: Some(1), ..Default::default() };
        let r = analysis::delay_scan(&base, &analysis::default_delays(), SystemMapping::lorentz(1.0), &opts);
        (r, start.elapsed())
    })
}

fn delay_rows(lo: f64, hi: f64) -> impl Iterator<Item = &'static analysis::ScanRow> {
    delay_scan().0.rows.iter().filter(move |r| r.parameter >= lo - 1e-12 && r.parameter <= hi + 1e-12)
}

#[test]
fn delay_plateau() {
    let worst = delay_rows(-2.0, -0.6).map(|r| r.efficiency(TargetAxis::X)).fold(f64::INFINITY, f64::min);
    report("delay scan: min x² over τ ∈ [−2T, −0.6T]", worst, ">", 0.98);
}

#[test]
fn delay_positive_side_stays_in_xy_plane() {
    let worst = delay_rows(0.6 + 1e-9, 3.0)
        .map(|r| r.final_state[0].powi(2) + r.final_state[1].powi(2))
        .fold(f64::INFINITY, f64::min);
    report("delay scan: min x²+y² over τ > 0.6T", worst, ">", 0.98);
}

#[test]
fn delay_positive_side_oscillates() {
    let diff: Vec<f64> =
        delay_rows(0.6 + 1e-9, 3.0).map(|r| r.final_state[0].powi(2) - r.final_state[1].powi(2)).collect();
    let swaps = diff.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    report("delay scan: x²/y² dominance swaps over τ > 0.6T", swaps as f64, ">=", 2.0);
}

#[test]
fn delay_vz_sign_symmetry() {
    let rows = &delay_scan().0.rows;
    let n = rows.len();
    let worst = (0..n).map(|i| (rows[i].final_state[2] - rows[n - 1 - i].final_state[2]).abs()).fold(0.0, f64::max);
    assert!(rows.iter().zip(rows.iter().rev()).all(|(a, b)| a.parameter == -b.parameter));
    report("delay scan: max |vz(τ) − vz(−τ)|", worst, "<", 1e-6);
}

#[test]
fn delay_scan_rows_and_runtime() {
    let (r, elapsed) = delay_scan();
    assert_eq!(r.rows.len(), 241);
    assert_eq!(r.failures().count(), 0);
    report("delay scan: single-thread runtime [s]", elapsed.as_secs_f64(), "<", 30.0);
}

#[test]
fn intuitive_area_law() {
    // τ = +1.2T; amplitudes chosen so the area 2∫|W| sweeps [100, 130]
    let m = SystemMapping::lorentz(1.0);
    let base = PulseSchedule::gaussian_pair(1.0, 1.0, 1.2).unwrap();
    let opts = ScanOptions { method: Method::Adaptive { tol: 1e-10 }, ..Default::default() };
    let areas: Vec<f64> = (0..=300).map(|i| 100.0 + 0.1 * i as f64).collect();
    let amps = analysis::amplitudes_for_areas(&base, &areas, m, &opts).unwrap();
    let scan = analysis::area_scan(&base, &amps, m, &opts);
    let worst = scan
        .rows
        .iter()
        .zip(&areas)
        .map(|(r, a)| {
            let (x2, y2) = (r.final_state[0].powi(2), r.final_state[1].powi(2));
            (x2 - (0.5 * a).cos().powi(2)).abs().max((y2 - (0.5 * a).sin().powi(2)).abs())
        })
        .fold(0.0, f64::max);
    report("area law: max |component² − cos²/sin²(A/2)| over A ∈ [100, 130]", worst, "<", 0.02);
}

#[test]
fn cross_solver_schrodinger() {
    let d = verify::cross_solver_distance(&verify::reference_schedule(), 512, 1e-10).unwrap();
    report("cross-solver: Schrödinger vs torque", d, "<", 1e-6);
}

#[test]
fn cross_solver_adapters() {
    let d = verify::adapter_distance(verify::REFERENCE_B0, verify::REFERENCE_DELAY, 1024).unwrap();
    report("cross-solver: four system adapters", d, "<", 1e-8);
}

#[test]
fn oracle_rk4_order() {
    report("oracle: observed rk4 order", verify::rk4_observed_order(2048).unwrap(), ">=", 3.8);
}

#[test]
fn oracle_adaptive_per_tolerance() {
    let ratio = verify::adaptive_error_ratio(&[1e-6, 1e-8, 1e-10]).unwrap();
    report("oracle: adaptive error / tol", ratio, "<", 100.0);
}

#[test]
fn oracle_rotation_norm_drift() {
    let worst = [256, 1024, DEFAULT_STEPS]
        .into_iter()
        .map(|n| verify::norm_drift(Method::PiecewiseRotation, n).unwrap())
        .fold(0.0, f64::max);
    report("oracle: rotation norm drift", worst, "<", 1e-12);
}

#[test]
fn property_rk4_norm() {
    report(
        "properties: rk4 norm drift at default step",
        verify::norm_drift(Method::Rk4, DEFAULT_STEPS).unwrap(),
        "<",
        1e-6,
    );
}

#[test]
fn property_time_reversal() {
    report(
        "properties: round-trip / one-way error",
        verify::time_reversal_ratio(Method::Rk4, DEFAULT_STEPS).unwrap(),
        "<",
        10.0,
    );
}

#[test]
fn property_scaling() {
    report(
        "properties: time-scaling difference",
        verify::scaling_difference(2.5, Method::Rk4, DEFAULT_STEPS).unwrap(),
        "<",
        1e-8,
    );
}

#[test]
fn property_eigen_residuals() {
    report("properties: eigen residual", verify::eigen_residual(verify::EIGEN_SEED, 1000), "<", 1e-12);
}

#[test]
fn property_dark_constancy() {
    report("properties: max |dark − 1|", verify::dark_variable_deviation().unwrap(), "<", 0.01);
}

#[test]
fn verify_command_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_torque-stirap")).arg("verify").output().unwrap();
    report("verify: exit status", out.status.code().unwrap_or(-1) as f64, "<", 1.0);
}
