//! Resonant three-state quantum system `1 - 2 - 3` in the rotating-wave
//! approximation, with `ħ = 1`:
//!
//! ```text
//!            ⎡ 0    Ω_P  0   ⎤
//! H(t) = ½ · ⎢ Ω_P  0    Ω_S ⎥
//!            ⎣ 0    Ω_S  0   ⎦
//! ```
//!
//! The Bloch variables `R = (−c₃, −i c₂, c₁)` obey the torque equation with
//! `W = ½ (Ω_P, 0, Ω_S)`; see [`crate::systems`].

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{ode, TimeGrid};
use crate::pulse::PulseSchedule;
use crate::quadrature;
use crate::{Error, Result, StateVector3};

/// Probability amplitudes `(c₁, c₂, c₃)`.
pub type Amplitudes3 = Vector3<Complex64>;

/// Largest tolerated deviation from the real/imaginary/real phase pattern.
pub const PHASE_RESIDUAL_LIMIT: f64 = 1e-6;

/// Largest tolerated deviation of `‖c‖` from one.
pub const NORMALIZATION_LIMIT: f64 = 1e-6;

/// Default tolerance for [`evolve_schrodinger`].
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaHamiltonian {
    pub omega_p: f64,
    pub omega_s: f64,
}

impl RwaHamiltonian {
    pub fn new(omega_p: f64, omega_s: f64) -> Self {
        Self { omega_p, omega_s }
    }

    /// `H / ħ` in the bare basis `(ψ₁, ψ₂, ψ₃)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (p, s) = (0.5 * self.omega_p, 0.5 * self.omega_s);
        Matrix3::new(0.0, p, 0.0, p, 0.0, s, 0.0, s, 0.0)
    }
}

/// `dc/dt = −i H c`.
pub fn schrodinger_rhs(h: &RwaHamiltonian, c: &Amplitudes3) -> Amplitudes3 {
    let m = h.matrix().map(|x| Complex64::new(x, 0.0));
    (m * c).map(|z| Complex64::new(z.im, -z.re))
}

/// Instantaneous eigenvectors of the RWA Hamiltonian and their eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticBasis {
    pub phi_plus: Vector3<f64>,
    /// Dark state `ψ₁ cos ϑ − ψ₃ sin ϑ`.
    pub phi_zero: Vector3<f64>,
    pub phi_minus: Vector3<f64>,
    pub eps_plus: f64,
    pub eps_zero: f64,
    pub eps_minus: f64,
    pub theta: f64,
}

impl AdiabaticBasis {
    pub fn states(&self) -> [(Vector3<f64>, f64); 3] {
        [(self.phi_plus, self.eps_plus), (self.phi_zero, self.eps_zero), (self.phi_minus, self.eps_minus)]
    }
}

/// `None` when both Rabi frequencies vanish.
pub fn adiabatic_basis(omega_p: f64, omega_s: f64) -> Option<AdiabaticBasis> {
    if omega_p == 0.0 && omega_s == 0.0 {
        return None;
    }
    let theta = omega_p.atan2(omega_s);
    let (sin, cos) = theta.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rms = omega_p.hypot(omega_s);
    Some(AdiabaticBasis {
        phi_plus: Vector3::new(r * sin, r, r * cos),
        phi_zero: Vector3::new(cos, 0.0, -sin),
        phi_minus: Vector3::new(r * sin, -r, r * cos),
        eps_plus: 0.5 * rms,
        eps_zero: 0.0,
        eps_minus: -0.5 * rms,
        theta,
    })
}

/// Bloch vector plus the magnitude of the discarded off-phase parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub r: StateVector3,
    pub residual: f64,
}

/// `R = (−Re c₃, Im c₂, Re c₁)`, i.e. `R₁ = −c₃, R₂ = −i c₂, R₃ = c₁` for
/// amplitudes with real `c₁, c₃` and imaginary `c₂`.
pub fn bloch_map(c: &Amplitudes3) -> Result<BlochVector> {
    let residual = c[0].im.abs().max(c[1].re.abs()).max(c[2].im.abs());
    if residual > PHASE_RESIDUAL_LIMIT {
        return Err(Error::PhaseConvention { residual, limit: PHASE_RESIDUAL_LIMIT });
    }
    Ok(BlochVector { r: StateVector3::new(-c[2].re, c[1].im, c[0].re), residual })
}

/// Inverse of [`bloch_map`].
pub fn amplitudes_from_bloch(r: &StateVector3) -> Amplitudes3 {
    Amplitudes3::new(Complex64::new(r.z, 0.0), Complex64::new(0.0, r.y), Complex64::new(-r.x, 0.0))
}

/// Closed-form final populations for intuitive pulse order in the adiabatic
/// limit: `(0, sin²(A/2), cos²(A/2))` for rms area `A`.
pub fn intuitive_populations(area: f64) -> (f64, f64, f64) {
    let half = 0.5 * area;
    (0.0, half.sin().powi(2), half.cos().powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Amplitudes3>,
    pub populations: Vec<[f64; 3]>,
    /// `φ₊(t) = ∫₀ᵗ ε₊`.
    pub phase_plus: Vec<f64>,
    /// `φ₋(t) = ∫₀ᵗ ε₋`.
    pub phase_minus: Vec<f64>,
    pub norm_drift: f64,
}

impl QuantumTrajectory {
    pub fn final_populations(&self) -> [f64; 3] {
        self.populations[self.populations.len() - 1]
    }

    /// Bloch vectors along the trajectory.
    pub fn bloch(&self) -> Result<Vec<StateVector3>> {
        self.amplitudes.iter().map(|c| bloch_map(c).map(|b| b.r)).collect()
    }
}

fn pack(c: &Amplitudes3) -> [f64; 6] {
    [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im]
}

fn unpack(y: &[f64; 6]) -> Amplitudes3 {
    Amplitudes3::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]), Complex64::new(y[4], y[5]))
}

/// Solves the Schrödinger equation on `grid` with the adaptive integrator.
pub fn evolve_schrodinger(
    schedule: &PulseSchedule,
    c0: Amplitudes3,
    grid: &TimeGrid,
    tol: f64,
) -> Result<QuantumTrajectory> {
    let drift0 = (c0.norm() - 1.0).abs();
    if drift0 > NORMALIZATION_LIMIT {
        return Err(Error::Normalization { drift: drift0, limit: NORMALIZATION_LIMIT });
    }
    let rhs = |t: f64, y: &[f64; 6]| {
        let h = RwaHamiltonian::new(schedule.p_at(t), schedule.s_at(t));
        pack(&schrodinger_rhs(&h, &unpack(y)))
    };
    let times = grid.times();
    let raw = ode::dopri5(&rhs, times, pack(&c0), &ode::AdaptiveOptions::with_tolerance(tol))?;
    let amplitudes: Vec<Amplitudes3> = raw.iter().map(unpack).collect();

    let norm_drift = amplitudes.iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max);
    if norm_drift > NORMALIZATION_LIMIT {
        return Err(Error::Normalization { drift: norm_drift, limit: NORMALIZATION_LIMIT });
    }
    let populations = amplitudes.iter().map(|c| [c[0].norm_sqr(), c[1].norm_sqr(), c[2].norm_sqr()]).collect();

    // φ₊ = −φ₋ = ½ ∫₀ᵗ |Ω|
    let half_rms: Vec<f64> = times.iter().map(|&t| 0.5 * schedule.p_at(t).hypot(schedule.s_at(t))).collect();
    let cumulative = quadrature::cumulative_trapezoid(times, &half_rms);
    let offset = if grid.start() < 0.0 && grid.end() > 0.0 {
        // value of the running integral at t = 0
        let i = times.partition_point(|&t| t <= 0.0) - 1;
        let (t0, t1) = (times[i], times[i + 1]);
        let frac = (0.0 - t0) / (t1 - t0);
        let mid = half_rms[i] + frac * (half_rms[i + 1] - half_rms[i]);
        cumulative[i] + 0.5 * (0.0 - t0) * (half_rms[i] + mid)
    } else if grid.start() >= 0.0 {
        -quadrature::trapezoid(|t| 0.5 * schedule.p_at(t).hypot(schedule.s_at(t)), 0.0, grid.start(), 1024)
    } else {
        quadrature::trapezoid(|t| 0.5 * schedule.p_at(t).hypot(schedule.s_at(t)), grid.start(), 0.0, 1024)
    };
    let phase_plus: Vec<f64> = cumulative.iter().map(|c| c - offset).collect();
    let phase_minus = phase_plus.iter().map(|p| -p).collect();

    Ok(QuantumTrajectory { times: times.to_vec(), amplitudes, populations, phase_plus, phase_minus, norm_drift })
}
