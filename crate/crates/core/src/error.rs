use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    /// The eigenvalue sign pattern disagrees with the Mach classification.
    #[error("structural error: {0}")]
    Structural(String),

    /// Shooting did not reach the inflow data; the boundary state is outside
    /// the empirically admissible set for this far field.
    #[error("no stationary profile: {reason} (final mismatch {mismatch:.3e})")]
    NoProfile { reason: String, mismatch: f64 },

    #[error("blow-up at x = {x}: {reason}")]
    BlowUp { x: f64, reason: String },

    #[error("insufficient data: {got} points in fit window, need {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("rejected: {0}")]
    Rejected(String),

    #[error("step failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("non-finite value at t = {t}: {dump}")]
    NonFinite { t: f64, dump: String },

    #[error("configuration error: {0}")]
    Config(String),
}
