//! Self-checks run by `torque-stirap verify`: cross-solver agreement,
//! integrator convergence and physical invariants on the reference schedule
//! (Gaussian pulses, `B₀ = 20/T`, `τ = −1.2T`).

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::dynamics::{self, Method, TimeGrid, DEFAULT_STEPS};
use crate::pulse::PulseSchedule;
use crate::quantum::{self, RwaHamiltonian};
use crate::systems::{self, SystemMapping};
use crate::{Result, StateVector3};

pub const REFERENCE_B0: f64 = 20.0;
pub const REFERENCE_DELAY: f64 = -1.2;
/// Seed for the random eigen-residual probes.
pub const EIGEN_SEED: u64 = 0x5717_4a50;
const EIGEN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `measured < threshold`.
    Below,
    /// Passes when `measured >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    fn new(group: &'static str, name: &'static str, measured: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::Below => measured < threshold,
            Comparison::AtLeast => measured >= threshold,
        };
        Self { group, name, measured, threshold, comparison, passed }
    }

    fn failed(group: &'static str, name: &'static str, comparison: Comparison, threshold: f64) -> Self {
        Self { group, name, measured: f64::NAN, threshold, comparison, passed: false }
    }
}

fn check(
    group: &'static str,
    name: &'static str,
    comparison: Comparison,
    threshold: f64,
    measure: impl FnOnce() -> Result<f64>,
) -> Check {
    match measure() {
        Ok(m) => Check::new(group, name, m, comparison, threshold),
        Err(_) => Check::failed(group, name, comparison, threshold),
    }
}

pub fn reference_schedule() -> PulseSchedule {
    PulseSchedule::gaussian_pair(REFERENCE_B0, 1.0, REFERENCE_DELAY).expect("valid reference pulses")
}

fn reference_grid(intervals: usize) -> Result<TimeGrid> {
    TimeGrid::uniform(reference_schedule().default_window(), intervals)
}

/// High-accuracy final state: piecewise rotation at `n`, `2n` and `4n`
/// steps, extrapolated twice (the error expands in even powers of `h`).
pub fn rotation_oracle(
    mapping: SystemMapping,
    schedule: &PulseSchedule,
    x0: StateVector3,
    n: usize,
) -> Result<StateVector3> {
    let window = schedule.default_window();
    let end = |k: usize| -> Result<StateVector3> {
        let grid = TimeGrid::uniform(window, k)?;
        Ok(dynamics::integrate(&systems::to_angular_velocity(mapping, schedule), x0, &grid, Method::PiecewiseRotation)?
            .last())
    };
    let (r1, r2, r3) = (end(n)?, end(2 * n)?, end(4 * n)?);
    let a1 = (4.0 * r2 - r1) / 3.0;
    let a2 = (4.0 * r3 - r2) / 3.0;
    Ok((16.0 * a2 - a1) / 15.0)
}

/// Largest distance between the Bloch image of the Schrödinger solution and
/// the torque solution under the quantum mapping.
pub fn cross_solver_distance(schedule: &PulseSchedule, intervals: usize, tol: f64) -> Result<f64> {
    let grid = TimeGrid::uniform(schedule.default_window(), intervals)?;
    let x0 = StateVector3::z();
    let q = quantum::evolve_schrodinger(schedule, quantum::amplitudes_from_bloch(&x0), &grid, tol)?;
    let t = systems::simulate(SystemMapping::quantum(), schedule, x0, &grid, Method::Adaptive { tol })?;
    Ok(q.bloch()?.iter().zip(&t.states).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Largest dark-frame distance between the classical systems and the quantum
/// one, with amplitudes matched so that all angular velocities coincide.
pub fn adapter_distance(b0: f64, delay: f64, intervals: usize) -> Result<f64> {
    let cases = [
        (SystemMapping::quantum(), 2.0 * b0),
        (SystemMapping::lorentz(1.0), b0),
        (SystemMapping::magnetization(1.0), b0),
        (SystemMapping::coriolis(), 0.5 * b0),
    ];
    let x0 = StateVector3::z();
    let mut runs = Vec::with_capacity(cases.len());
    for (mapping, amp) in cases {
        let s = PulseSchedule::gaussian_pair(amp, 1.0, delay)?;
        let grid = TimeGrid::uniform(s.default_window(), intervals)?;
        let t = systems::simulate(mapping, &s, x0, &grid, Method::adaptive())?;
        runs.push(t.states.iter().map(|x| mapping.dark_frame(x)).collect::<Vec<_>>());
    }
    Ok(runs[1..].iter().flat_map(|r| r.iter().zip(&runs[0]).map(|(a, b)| (a - b).norm())).fold(0.0, f64::max))
}

fn final_error(method: Method, intervals: usize, oracle: &StateVector3) -> Result<f64> {
    let s = reference_schedule();
    let t = systems::simulate(SystemMapping::lorentz(1.0), &s, StateVector3::z(), &reference_grid(intervals)?, method)?;
    Ok((t.last() - oracle).norm())
}

fn oracle() -> Result<StateVector3> {
    rotation_oracle(SystemMapping::lorentz(1.0), &reference_schedule(), StateVector3::z(), 1 << 15)
}

/// Observed RK4 order from step halving at `n` and `2n` steps.
pub fn rk4_observed_order(n: usize) -> Result<f64> {
    let o = oracle()?;
    Ok((final_error(Method::Rk4, n, &o)? / final_error(Method::Rk4, 2 * n, &o)?).log2())
}

/// Worst `error / tol` over the given tolerances.
pub fn adaptive_error_ratio(tols: &[f64]) -> Result<f64> {
    let o = oracle()?;
    let mut worst: f64 = 0.0;
    for &tol in tols {
        worst = worst.max(final_error(Method::Adaptive { tol }, 512, &o)? / tol);
    }
    Ok(worst)
}

pub fn norm_drift(method: Method, intervals: usize) -> Result<f64> {
    let s = reference_schedule();
    Ok(systems::simulate(SystemMapping::lorentz(1.0), &s, StateVector3::z(), &reference_grid(intervals)?, method)?
        .norm_drift)
}

/// Round-trip error (forward, then backward through the reversed field)
/// divided by the one-way error against the oracle.
pub fn time_reversal_ratio(method: Method, intervals: usize) -> Result<f64> {
    let s = reference_schedule();
    let mapping = SystemMapping::lorentz(1.0);
    let grid = reference_grid(intervals)?;
    let x0 = StateVector3::z();
    let forward = systems::simulate(mapping, &s, x0, &grid, method)?;
    let (a, b) = (grid.start(), grid.end());
    let field = systems::to_angular_velocity(mapping, &s);
    let reversed = move |t: f64| -dynamics::AngularVelocityField::omega(&field, a + b - t);
    let back = dynamics::integrate(&reversed, forward.last(), &grid, method)?;
    let round_trip = (back.last() - x0).norm();
    let one_way = (forward.last() - oracle()?).norm();
    Ok(round_trip / one_way)
}

/// Final-state difference between a run and the same run with time scaled
/// by `k` (pulses `k·f(k t)`, grid `t / k`).
pub fn scaling_difference(k: f64, method: Method, intervals: usize) -> Result<f64> {
    let s = reference_schedule();
    let mapping = SystemMapping::lorentz(1.0);
    let grid = reference_grid(intervals)?;
    let a = systems::simulate(mapping, &s, StateVector3::z(), &grid, method)?;
    let b = systems::simulate(mapping, &s.scaled(k), StateVector3::z(), &grid.scaled(k)?, method)?;
    Ok((a.last() - b.last()).norm())
}

/// Worst `‖H φ − ε φ‖` over random Rabi frequencies in `[0, 50]`.
pub fn eigen_residual(seed: u64, samples: usize) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (p, s) = (rng.random_range(0.0..50.0), rng.random_range(0.0..50.0));
        let Some(basis) = quantum::adiabatic_basis(p, s) else { continue };
        let h = RwaHamiltonian::new(p, s).matrix();
        for (phi, eps) in basis.states() {
            worst = worst.max((h * phi - phi * eps).norm());
        }
    }
    worst
}

/// Largest `|D(t) − 1|` on the reference run, which starts in the dark state.
pub fn dark_variable_deviation() -> Result<f64> {
    let s = reference_schedule();
    let t = systems::simulate(
        SystemMapping::lorentz(1.0),
        &s,
        StateVector3::z(),
        &reference_grid(DEFAULT_STEPS)?,
        Method::adaptive(),
    )?;
    Ok(t.diagnostics.iter().filter_map(|d| d.dark_variable).map(|d| (d - 1.0).abs()).fold(0.0, f64::max))
}

pub fn quantum_norm_drift() -> Result<f64> {
    let s = reference_schedule();
    let grid = reference_grid(512)?;
    let q = quantum::evolve_schrodinger(
        &s,
        quantum::amplitudes_from_bloch(&StateVector3::z()),
        &grid,
        quantum::DEFAULT_TOLERANCE,
    )?;
    Ok(q.norm_drift)
}

pub fn run_suite() -> Vec<Check> {
    use Comparison::{AtLeast, Below};
    let s = reference_schedule();
    vec![
        check("cross-solver", "schrodinger_vs_torque", Below, 1e-6, || cross_solver_distance(&s, 512, 1e-10)),
        check("cross-solver", "system_adapters", Below, 1e-8, || adapter_distance(REFERENCE_B0, REFERENCE_DELAY, 1024)),
        check("convergence", "rk4_order", AtLeast, 3.8, || rk4_observed_order(2048)),
        check("convergence", "adaptive_error_over_tol", Below, 100.0, || adaptive_error_ratio(&[1e-6, 1e-8, 1e-10])),
        check("convergence", "rotation_norm_drift", Below, 1e-12, || {
            norm_drift(Method::PiecewiseRotation, DEFAULT_STEPS)
        }),
        check("invariants", "rk4_norm_drift", Below, 1e-6, || norm_drift(Method::Rk4, DEFAULT_STEPS)),
        check("invariants", "time_reversal_ratio", Below, 10.0, || time_reversal_ratio(Method::Rk4, DEFAULT_STEPS)),
        check("invariants", "time_scaling", Below, 1e-8, || scaling_difference(2.5, Method::Rk4, DEFAULT_STEPS)),
        check("invariants", "eigen_residual", Below, 1e-12, || Ok(eigen_residual(EIGEN_SEED, EIGEN_SAMPLES))),
        check("invariants", "dark_variable_deviation", Below, 0.01, dark_variable_deviation),
        check("invariants", "quantum_norm_drift", Below, quantum::NORMALIZATION_LIMIT, quantum_norm_drift),
    ]
}
