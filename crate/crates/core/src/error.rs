//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building operators, running dynamics,
/// parsing schedules, or fitting data.
#[derive(Debug, Error)]
pub enum SimError {
    /// Operators or states built against different Fock-space dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The truncated Fock space is too small to hold the requested state:
    /// its weight in the guard band exceeds the tail tolerance.
    #[error("truncation too aggressive: {0}")]
    Truncation(String),

    /// A bichromatic drive with Ω_b ≥ Ω_r has no normalizable squeezed basis.
    #[error("sideband ratio out of range: {0}")]
    Ratio(String),

    /// Adaptive step control failed, or the evolved density matrix left the
    /// physical set by more than the monitoring thresholds.
    #[error("integration failed: {0}")]
    Integration(String),

    /// Syntax error in a sequence file.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// A structurally valid schedule with inconsistent contents.
    #[error("invalid schedule: {0}")]
    Validation(String),

    /// Nonlinear least squares did not converge.
    #[error("fit did not converge: {msg} (best residual {residual:.6e})")]
    Fit { msg: String, residual: f64 },

    /// The population-extraction design matrix cannot resolve neighboring
    /// sideband frequencies at the given probe length.
    #[error("ill-conditioned inversion (condition number {cond:.3e}): {msg}")]
    IllConditioned { cond: f64, msg: String },

    /// A repump directive was executed in unitary mode.
    #[error("repump requires lindblad mode")]
    Mode,
}

pub type Result<T> = std::result::Result<T, SimError>;
