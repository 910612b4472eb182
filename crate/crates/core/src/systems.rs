//! Physical systems mapped onto the torque kernel.
//!
//! Every system is rewritten as `dX/dt = W(t) × X`. The schedule's P pulse
//! is the magnitude of the x-component of the drive and the S pulse the
//! magnitude of the z-component. Classical drives point along
//! `(−p, 0, s)`; the quantum drive is the Rabi-frequency pair `(Ω_P, Ω_S)`.
//!
//! | kind          | equation            | state | `W`               |
//! |---------------|---------------------|-------|-------------------|
//! | quantum       | `i ċ = H c`         | `R`   | `½ (Ω_P, 0, Ω_S)` |
//! | lorentz       | `m v̇ = −q B × v`    | `v`   | `−(q/m) B`        |
//! | magnetization | `Ṁ = γ M × H`       | `M`   | `−γ H`            |
//! | coriolis      | `v̇ = 2 v × ω`       | `v`   | `−2 ω`            |
//!
//! With `B = (−B_x, 0, B_z)` the classical fields have opposite signs on
//! their x- and z-components while the quantum field does not. The dark
//! variable `(p x₁ + s x₃)/√(p² + s²)` is written for unsigned magnitudes, so
//! [`SystemMapping::dark_frame`] flips the first component whenever the two
//! signs differ. In that frame all four systems follow identical dynamics
//! and the dark variable is the conserved projection onto `W`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{self, AngularVelocityField, Method, SampleDiagnostics, TimeGrid, Trajectory};
use crate::pulse::{self, MixingAngle, PulseSchedule};
use crate::{Error, Result, StateVector3};

/// Margin `q B₀ L / (m v)` at and above which `m v ≪ q B₀ L` counts as satisfied.
pub const ADIABATIC_MARGIN_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Quantum,
    Lorentz,
    Magnetization,
    Coriolis,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [Self::Quantum, Self::Lorentz, Self::Magnetization, Self::Coriolis];

    pub fn name(self) -> &'static str {
        match self {
            Self::Quantum => "quantum",
            Self::Lorentz => "lorentz",
            Self::Magnetization => "magnetization",
            Self::Coriolis => "coriolis",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(Self::Quantum),
            "lorentz" => Ok(Self::Lorentz),
            "magnetization" => Ok(Self::Magnetization),
            "coriolis" => Ok(Self::Coriolis),
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }
}

/// Signs of the x- and z-components of `W` relative to the unsigned pulse values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignConvention {
    pub x: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemMapping {
    pub kind: SystemKind,
    /// `q/m` (lorentz), `γ` (magnetization), 2 (coriolis), 1 (quantum).
    pub coupling: f64,
}

impl SystemMapping {
    pub fn quantum() -> Self {
        Self { kind: SystemKind::Quantum, coupling: 1.0 }
    }

    pub fn lorentz(charge_over_mass: f64) -> Self {
        Self { kind: SystemKind::Lorentz, coupling: charge_over_mass }
    }

    pub fn magnetization(gyromagnetic_ratio: f64) -> Self {
        Self { kind: SystemKind::Magnetization, coupling: gyromagnetic_ratio }
    }

    pub fn coriolis() -> Self {
        Self { kind: SystemKind::Coriolis, coupling: 2.0 }
    }

    /// Mapping with the default coupling for `kind`, overridden for the
    /// lorentz/magnetization kinds when `coupling` is given.
    pub fn for_kind(kind: SystemKind, coupling: Option<f64>) -> Self {
        match kind {
            SystemKind::Quantum => Self::quantum(),
            SystemKind::Coriolis => Self::coriolis(),
            SystemKind::Lorentz => Self::lorentz(coupling.unwrap_or(1.0)),
            SystemKind::Magnetization => Self::magnetization(coupling.unwrap_or(1.0)),
        }
    }

    /// The physical drive vector built from unsigned pulse values: `(Ω_P, 0, Ω_S)`
    /// for the quantum system, `(−p, 0, s)` for `B`, `H` and `ω`.
    pub fn drive(&self, p: f64, s: f64) -> StateVector3 {
        match self.kind {
            SystemKind::Quantum => StateVector3::new(p, 0.0, s),
            _ => StateVector3::new(-p, 0.0, s),
        }
    }

    /// `W` for the given unsigned pulse values.
    #[inline]
    pub fn omega(&self, p: f64, s: f64) -> StateVector3 {
        let drive = self.drive(p, s);
        match self.kind {
            SystemKind::Quantum => drive * (0.5 * self.coupling),
            SystemKind::Lorentz | SystemKind::Magnetization | SystemKind::Coriolis => drive * -self.coupling,
        }
    }

    /// Factor relating `|W|` to `√(p² + s²)`.
    pub fn rate_scale(&self) -> f64 {
        match self.kind {
            SystemKind::Quantum => 0.5 * self.coupling.abs(),
            _ => self.coupling.abs(),
        }
    }

    pub fn sign_convention(&self) -> SignConvention {
        let w = self.omega(1.0, 1.0);
        SignConvention { x: w.x.signum(), z: w.z.signum() }
    }

    /// Reflects the first component when the x- and z-signs of `W` differ.
    pub fn dark_frame(&self, x: &StateVector3) -> StateVector3 {
        let sign = self.sign_convention();
        StateVector3::new(sign.x * sign.z * x.x, x.y, x.z)
    }

    /// Dark variable of a state of this system.
    pub fn dark_variable(&self, p: f64, s: f64, x: &StateVector3) -> Option<f64> {
        dark_variable(p, s, &self.dark_frame(x))
    }
}

/// A schedule seen through a system mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemField {
    pub mapping: SystemMapping,
    pub schedule: PulseSchedule,
}

impl AngularVelocityField for SystemField {
    #[inline]
    fn omega(&self, t: f64) -> StateVector3 {
        self.mapping.omega(self.schedule.p_at(t), self.schedule.s_at(t))
    }
}

pub fn to_angular_velocity(mapping: SystemMapping, schedule: &PulseSchedule) -> SystemField {
    SystemField { mapping, schedule: schedule.clone() }
}

/// `(p x₁ + s x₃) / √(p² + s²)`; `None` when both fields vanish.
pub fn dark_variable(p_value: f64, s_value: f64, x: &StateVector3) -> Option<f64> {
    let norm = p_value.hypot(s_value);
    if norm == 0.0 {
        return None;
    }
    Some((p_value * x.x + s_value * x.z) / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticityBound {
    /// `q B₀ L / (m v)`.
    pub margin: f64,
    pub satisfied: bool,
}

/// Checks `m v ≪ q B₀ L` for a charge crossing a field region of length `l`.
pub fn lorentz_adiabaticity_bound(mass: f64, speed: f64, charge: f64, b0: f64, length: f64) -> AdiabaticityBound {
    let margin = (charge * b0 * length) / (mass * speed);
    AdiabaticityBound { margin, satisfied: margin >= ADIABATIC_MARGIN_THRESHOLD }
}

/// Integrates `system` and attaches per-sample diagnostics.
pub fn simulate(
    mapping: SystemMapping,
    schedule: &PulseSchedule,
    x0: StateVector3,
    grid: &TimeGrid,
    method: Method,
) -> Result<Trajectory> {
    let field = to_angular_velocity(mapping, schedule);
    let mut traj = dynamics::integrate(&field, x0, grid, method)?;
    traj.diagnostics = diagnostics(mapping, schedule, &traj);
    Ok(traj)
}

/// Mixing angle, dark variable and normalised squared components per sample.
/// Undefined values hold the last defined one.
pub fn diagnostics(mapping: SystemMapping, schedule: &PulseSchedule, traj: &Trajectory) -> Vec<SampleDiagnostics> {
    let n0 = traj.initial().norm_squared();
    let mut last_theta = None;
    let mut last_dark = None;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| {
            let (p, s) = (schedule.p_at(t), schedule.s_at(t));
            if let MixingAngle::Defined(theta) = pulse::mixing_angle(p, s).unwrap_or(MixingAngle::Undefined) {
                last_theta = Some(theta);
            }
            if let Some(d) = mapping.dark_variable(p, s, x) {
                last_dark = Some(d / n0.sqrt());
            }
            SampleDiagnostics {
                mixing_angle: last_theta,
                dark_variable: last_dark,
                squares: [x.x * x.x / n0, x.y * x.y / n0, x.z * x.z / n0],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ode;
    use crate::pulse::Window;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn v(x: f64, y: f64, z: f64) -> StateVector3 {
        StateVector3::new(x, y, z)
    }

    #[test]
    fn quantum_mapping() {
        // Ω_S alone spins R about z
        let w = SystemMapping::quantum().omega(0.0, 4.0);
        assert_eq!(w, v(0.0, 0.0, 2.0));
        let w = SystemMapping::quantum().omega(4.0, 0.0);
        assert_eq!(w, v(2.0, 0.0, 0.0));
    }

    #[test]
    fn lorentz_mapping() {
        assert_eq!(SystemMapping::lorentz(1.0).omega(0.0, 3.0), v(0.0, 0.0, -3.0));
        assert_eq!(SystemMapping::lorentz(2.0).omega(1.0, 0.0), v(2.0, 0.0, 0.0));
    }

    #[test]
    fn coriolis_mapping() {
        assert_eq!(SystemMapping::coriolis().omega(0.0, 1.5), v(0.0, 0.0, -3.0));
    }

    #[test]
    fn magnetization_mapping() {
        assert_eq!(SystemMapping::magnetization(0.5).omega(2.0, 4.0), v(1.0, 0.0, -2.0));
    }

    #[test]
    fn unknown_kind_is_an_error() {
        assert_eq!("frame_dragging".parse::<SystemKind>(), Err(Error::UnknownSystem("frame_dragging".into())));
        for k in SystemKind::ALL {
            assert_eq!(k.name().parse::<SystemKind>().unwrap(), k);
        }
    }

    #[test]
    fn dark_variable_examples() {
        assert_eq!(dark_variable(0.0, 2.0, &v(0.0, 0.0, 1.0)), Some(1.0));
        assert_eq!(dark_variable(2.0, 0.0, &v(1.0, 0.0, 0.0)), Some(1.0));
        let d = dark_variable(1.0, 1.0, &v(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2)).unwrap();
        assert!(d.abs() < 1e-16);
        assert_eq!(dark_variable(0.0, 0.0, &v(1.0, 0.0, 0.0)), None);
    }

    #[test]
    fn dark_frame_flips_classical_first_component() {
        let x = v(0.3, 0.4, 0.5);
        assert_eq!(SystemMapping::quantum().dark_frame(&x), x);
        for m in [SystemMapping::lorentz(1.0), SystemMapping::magnetization(1.0), SystemMapping::coriolis()] {
            assert_eq!(m.dark_frame(&x), v(-0.3, 0.4, 0.5));
        }
    }

    #[test]
    fn adiabaticity_margin() {
        // q B₀ / m = 20/T and L = v·√π·T: margin equals the single-pulse area 20√π
        let v_speed = 3.0;
        let b = lorentz_adiabaticity_bound(1.0, v_speed, 1.0, 20.0, v_speed * PI.sqrt());
        assert!((b.margin - 20.0 * PI.sqrt()).abs() < 1e-12);
        assert!((b.margin - 35.449).abs() < 1e-3);
        assert!(b.satisfied);
        // L = 6 v T
        let b = lorentz_adiabaticity_bound(1.0, v_speed, 1.0, 20.0, 6.0 * v_speed);
        assert!((b.margin - 120.0).abs() < 1e-12);
        let b = lorentz_adiabaticity_bound(2.0, 3.0, 1.0, 6.0, 1.0);
        assert_eq!(b, AdiabaticityBound { margin: 1.0, satisfied: false });
        let b = lorentz_adiabaticity_bound(2.0, 3.0, 0.0, 6.0, 1.0);
        assert_eq!(b, AdiabaticityBound { margin: 0.0, satisfied: false });
    }

    fn gaussian_fields(a: f64, b: f64, c: f64) -> PulseSchedule {
        PulseSchedule::gaussian_pair_split(a, b, 1.0, c).unwrap()
    }

    proptest! {
        #[test]
        fn lorentz_torque_form_matches_direct_force(qm in -3.0..3.0f64, p in 0.0..10.0f64, s in 0.0..10.0f64,
                                                   vel in prop::array::uniform3(-5.0..5.0f64)) {
            let m = SystemMapping::lorentz(qm);
            let vel = StateVector3::from(vel);
            let b = m.drive(p, s);
            // dv/dt = −(q/m) B × v
            let direct = -qm * b.cross(&vel);
            let torque = dynamics::torque_rhs(&m.omega(p, s), &vel);
            prop_assert!((direct - torque).norm() < 1e-12 * (1.0 + direct.norm()));
        }

        #[test]
        fn magnetization_and_coriolis_forms(g in -3.0..3.0f64, p in 0.0..10.0f64, s in 0.0..10.0f64,
                                           x in prop::array::uniform3(-5.0..5.0f64)) {
            let x = StateVector3::from(x);
            let mag = SystemMapping::magnetization(g);
            let h = mag.drive(p, s);
            prop_assert!((g * x.cross(&h) - dynamics::torque_rhs(&mag.omega(p, s), &x)).norm() < 1e-11);
            let cor = SystemMapping::coriolis();
            let om = cor.drive(p, s);
            prop_assert!((2.0 * x.cross(&om) - dynamics::torque_rhs(&cor.omega(p, s), &x)).norm() < 1e-11);
        }

        #[test]
        fn quantum_mapping_matches_schrodinger(p in 0.0..10.0f64, s in 0.0..10.0f64, r in prop::array::uniform3(-1.0..1.0f64)) {
            use crate::quantum::{amplitudes_from_bloch, bloch_map, schrodinger_rhs, RwaHamiltonian};
            let r = StateVector3::from(r);
            let dc = schrodinger_rhs(&RwaHamiltonian::new(p, s), &amplitudes_from_bloch(&r));
            let dr = bloch_map(&dc).unwrap().r;
            let torque = dynamics::torque_rhs(&SystemMapping::quantum().omega(p, s), &r);
            prop_assert!((dr - torque).norm() < 1e-12);
        }

        #[test]
        fn classical_direct_integration_agrees(a in 5.0..25.0f64, b in 5.0..25.0f64, tau in -2.0..2.0f64) {
            // integrate m dv/dt = -q B x v directly with the generic stepper
            let sched = gaussian_fields(a, b, tau);
            let mapping = SystemMapping::lorentz(1.0);
            let grid = TimeGrid::uniform(sched.default_window(), 2048).unwrap();
            let rhs = |t: f64, y: &[f64; 3]| {
                let bv = mapping.drive(sched.p_at(t), sched.s_at(t));
                let d = -bv.cross(&StateVector3::from(*y));
                [d.x, d.y, d.z]
            };
            let direct = ode::rk4(&rhs, grid.times(), [0.0, 0.0, 1.0]);
            let traj = simulate(mapping, &sched, v(0.0, 0.0, 1.0), &grid, Method::Rk4).unwrap();
            let last = StateVector3::from(direct[direct.len() - 1]);
            prop_assert!((last - traj.last()).norm() < 1e-12);
        }
    }

    #[test]
    fn all_systems_coincide_in_dark_frame() {
        let b0 = 20.0;
        let cases = [
            (SystemMapping::quantum(), gaussian_fields(2.0 * b0, 2.0 * b0, -1.2)),
            (SystemMapping::lorentz(1.0), gaussian_fields(b0, b0, -1.2)),
            (SystemMapping::magnetization(1.0), gaussian_fields(b0, b0, -1.2)),
            (SystemMapping::coriolis(), gaussian_fields(0.5 * b0, 0.5 * b0, -1.2)),
        ];
        let grid = TimeGrid::uniform(Window::symmetric(6.6), 4096).unwrap();
        let x0 = v(0.0, 0.0, 1.0);
        let runs: Vec<Vec<StateVector3>> = cases
            .iter()
            .map(|(m, s)| {
                let t = simulate(*m, s, x0, &grid, Method::adaptive()).unwrap();
                t.states.iter().map(|x| m.dark_frame(x)).collect()
            })
            .collect();
        for other in &runs[1..] {
            let worst = runs[0].iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-8, "{worst}");
        }
    }

    #[test]
    fn dark_variable_stays_near_one_on_counterintuitive_run() {
        let sched = gaussian_fields(20.0, 20.0, -1.2);
        let grid = TimeGrid::uniform(sched.default_window(), 4096).unwrap();
        let traj = simulate(SystemMapping::lorentz(1.0), &sched, v(0.0, 0.0, 1.0), &grid, Method::adaptive()).unwrap();
        let worst =
            traj.diagnostics.iter().filter_map(|d| d.dark_variable).map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
        assert!(traj.last().x.abs() > 0.99);
    }
}
