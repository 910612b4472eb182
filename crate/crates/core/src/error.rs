use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time: {0}")]
    InvalidTime(f64),

    #[error("unsigned convention violated: field values must be nonnegative (got p = {p}, s = {s})")]
    NegativeField { p: f64, s: f64 },

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("initial state must be nonzero and finite")]
    InvalidInitialState,

    #[error("stiffness/accuracy failure at t = {t}: step size underflow (h = {h:e})")]
    AccuracyFailure { t: f64, h: f64 },

    #[error("phase convention violated: off-phase residual {residual:e} exceeds {limit:e}")]
    PhaseConvention { residual: f64, limit: f64 },

    #[error("normalization drift {drift:e} exceeds {limit:e}")]
    Normalization { drift: f64, limit: f64 },

    #[error("unknown system kind `{0}`")]
    UnknownSystem(String),
}
