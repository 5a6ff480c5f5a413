use thiserror::Error;

/// Errors raised across the simulation and imaging pipeline.
#[derive(Debug, Error)]
pub enum SarError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("degenerate chirp phase: quadratic coefficient is zero")]
    DegeneratePhase,

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("normal matrix is singular (min/max pivot ratio {ratio:.3e}); use a positive ridge")]
    Singular { ratio: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("stage error: expected {expected}, got {got}")]
    Stage { expected: String, got: String },

    #[error("{path}: {msg}")]
    Field { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SarError>;
