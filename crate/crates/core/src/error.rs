//! Error types shared across the crate.

use thiserror::Error;

/// Why an integration run stopped before reaching the requested horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationFailureKind {
    /// Step size control drove the step below the representable floor.
    StepUnderflow,
    /// A state or derivative evaluation produced NaN/inf.
    NonFiniteState,
    /// Safety cap on the number of steps was hit.
    StepLimit,
}

impl std::fmt::Display for IntegrationFailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::StepUnderflow => write!(f, "step size underflow"),
            Self::NonFiniteState => write!(f, "non-finite state (divergence)"),
            Self::StepLimit => write!(f, "step limit exceeded"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    #[error("integration failure at t = {t}: {kind}")]
    Integration {
        t: f64,
        kind: IntegrationFailureKind,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
