//! The torque kernel `dX/dt = W(t) × X`.
//!
//! Three integration methods are provided:
//!
//! - [`Method::Rk4`]: classical fixed-step Runge-Kutta, one step per grid
//!   interval.
//! - [`Method::Adaptive`]: Dormand-Prince 5(4) with step-size control and
//!   dense output at the grid times.
//! - [`Method::PiecewiseRotation`]: `W` frozen at each interval midpoint and
//!   the state rotated exactly about it. Second order, norm-preserving to
//!   round-off; used as the structure-preserving oracle.

pub mod ode;

use serde::Serialize;

use crate::pulse::Window;
use crate::{Error, Result, StateVector3};

/// Default number of fixed steps across an integration window.
pub const DEFAULT_STEPS: usize = 4096;

/// Default relative (and absolute) tolerance for [`Method::Adaptive`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A time-dependent angular velocity `W(t)`.
pub trait AngularVelocityField: Sync {
    fn omega(&self, t: f64) -> StateVector3;
}

impl<F> AngularVelocityField for F
where
    F: Fn(f64) -> StateVector3 + Sync,
{
    fn omega(&self, t: f64) -> StateVector3 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Rk4,
    Adaptive { tol: f64 },
    PiecewiseRotation,
}

impl Method {
    pub fn adaptive() -> Self {
        Self::Adaptive { tol: DEFAULT_TOLERANCE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::Adaptive { .. } => "adaptive",
            Self::PiecewiseRotation => "rotation",
        }
    }
}

/// Strictly increasing sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two times".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `intervals + 1` equally spaced times covering `window`.
    pub fn uniform(window: Window, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidGrid("at least one interval required".into()));
        }
        if window.is_empty() || !window.is_finite() {
            return Err(Error::InvalidGrid(format!("bad window [{}, {}]", window.start, window.end)));
        }
        let h = window.len() / intervals as f64;
        let mut times: Vec<f64> = (0..intervals).map(|i| window.start + i as f64 * h).collect();
        times.push(window.end);
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Same grid with time compressed by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.times.iter().map(|t| t / k).collect())
    }
}

/// Per-sample diagnostics attached by [`crate::systems`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleDiagnostics {
    /// Last defined mixing angle (held where both fields vanish).
    pub mixing_angle: Option<f64>,
    /// Dark-variable projection relative to the initial norm; held likewise.
    pub dark_variable: Option<f64>,
    /// Squared components normalised by the initial squared norm.
    pub squares: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector3>,
    /// `max |‖X(t)‖ − ‖X(0)‖| / ‖X(0)‖` over the samples.
    pub norm_drift: f64,
    /// Empty when produced by the bare kernel.
    pub diagnostics: Vec<SampleDiagnostics>,
}

impl Trajectory {
    pub fn initial(&self) -> StateVector3 {
        self.states[0]
    }

    pub fn last(&self) -> StateVector3 {
        self.states[self.states.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest pointwise Euclidean distance to another trajectory on the same grid.
    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `w × x`.
#[inline]
pub fn torque_rhs(w: &StateVector3, x: &StateVector3) -> StateVector3 {
    w.cross(x)
}

/// Rotates `x` about `w` by the angle `|w|·h` (Rodrigues' formula).
pub fn step_exact(w: &StateVector3, x: &StateVector3, h: f64) -> StateVector3 {
    let rate = w.norm();
    if rate == 0.0 {
        return *x;
    }
    let axis = w / rate;
    let angle = rate * h;
    let (sin, cos) = angle.sin_cos();
    x * cos + axis.cross(x) * sin + axis * (axis.dot(x) * (1.0 - cos))
}

fn to_array(v: &StateVector3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn norm_drift(states: &[StateVector3]) -> f64 {
    let n0 = states[0].norm();
    states.iter().map(|s| (s.norm() - n0).abs() / n0).fold(0.0, f64::max)
}

/// Integrates the torque equation from `x0` at `grid.start()` through the grid.
pub fn integrate<W: AngularVelocityField + ?Sized>(
    field: &W,
    x0: StateVector3,
    grid: &TimeGrid,
    method: Method,
) -> Result<Trajectory> {
    if !x0.iter().all(|c| c.is_finite()) || x0.norm() == 0.0 {
        return Err(Error::InvalidInitialState);
    }
    let times = grid.times();
    let states: Vec<StateVector3> = match method {
        Method::PiecewiseRotation => {
            let mut x = x0;
            let mut out = Vec::with_capacity(times.len());
            out.push(x);
            for w in times.windows(2) {
                let h = w[1] - w[0];
                let omega = field.omega(w[0] + 0.5 * h);
                x = step_exact(&omega, &x, h);
                out.push(x);
            }
            out
        }
        Method::Rk4 => {
            let rhs = |t: f64, y: &[f64; 3]| to_array(&torque_rhs(&field.omega(t), &StateVector3::from(*y)));
            ode::rk4(&rhs, times, to_array(&x0)).into_iter().map(StateVector3::from).collect()
        }
        Method::Adaptive { tol } => {
            let rhs = |t: f64, y: &[f64; 3]| to_array(&torque_rhs(&field.omega(t), &StateVector3::from(*y)));
            ode::dopri5(&rhs, times, to_array(&x0), &ode::AdaptiveOptions::with_tolerance(tol))?
                .into_iter()
                .map(StateVector3::from)
                .collect()
        }
    };
    let norm_drift = norm_drift(&states);
    Ok(Trajectory { times: times.to_vec(), states, norm_drift, diagnostics: Vec::new() })
}
