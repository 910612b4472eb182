//! Torque-equation dynamics `dX/dt = W(t) × X` shared by the resonant
//! three-state quantum system and its classical analogs: a charge in a
//! quasistatic magnetic field, an undamped magnetic moment, and a velocity
//! seen from a rotating frame.
//!
//! The crate is organised bottom-up:
//!
//! - [`pulse`]: pulse envelopes, schedules, mixing angle and pulse areas.
//! - [`dynamics`]: the torque kernel, its integrators and the exact-rotation
//!   oracle.
//! - [`quantum`]: the complex three-state Schrödinger solver, adiabatic basis
//!   and the Bloch-variable map onto the torque kernel.
//! - [`systems`]: adapters from each physical system onto an angular-velocity
//!   field, with their sign conventions and dark-variable projections.
//! - [`analysis`]: delay and area scans, efficiency and adiabaticity reports.
//! - [`verify`]: the built-in oracle/equivalence/conservation check suite.
//!
//! Units: `ħ = 1`, times in units of the pulse width `T`, field strengths in
//! units of `1/T`.

pub mod analysis;
pub mod dynamics;
mod error;
pub mod pulse;
pub mod quadrature;
pub mod quantum;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};

/// Real 3-vector: Bloch vector, velocity or magnetic moment.
pub type StateVector3 = nalgebra::Vector3<f64>;

pub use analysis::{EfficiencyReport, ScanResult, ScanRow, TargetAxis};
pub use dynamics::{AngularVelocityField, Method, TimeGrid, Trajectory};
pub use pulse::{MixingAngle, PulseEnvelope, PulseSchedule};
pub use quantum::Amplitudes3;
pub use systems::{SystemKind, SystemMapping};
