use thiserror::Error;

/// Errors raised by model construction, geometric quantities and evolution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} outside the path domain [0, {period}]")]
    Domain { t: f64, period: f64 },

    /// The field norm fell to or below the degeneracy threshold; the crossing
    /// point has no preferred eigenframe.
    #[error("degenerate levels: |y| = {r:e} <= r_min = {r_min:e}")]
    Degenerate { r: f64, r_min: f64 },

    #[error("finite-difference stencil around t = {t} is singular: {reason}")]
    Stencil { t: f64, reason: String },

    #[error("operation requires a closed path (endpoint mismatch {mismatch:e})")]
    OpenPath { mismatch: f64 },

    #[error("eigenframe singular at t = {t}: {reason}")]
    Singular { t: f64, reason: String },

    #[error("integration failed at t = {t_reached} (step {step:e} below underflow guard)")]
    IntegrationFailure { t_reached: f64, step: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. }
                | Error::Stencil { .. }
                | Error::Singular { .. }
                | Error::IntegrationFailure { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
