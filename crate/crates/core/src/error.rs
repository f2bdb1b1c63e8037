use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {element}: jacobian determinant {det:.3e} at quadrature point {point}")]
    DegenerateElement { element: usize, point: usize, det: f64 },

    #[error("singular material: poisson ratio {nu} must be below 0.5")]
    SingularMaterial { nu: f64 },

    #[error("factorization of {block} failed: {reason}")]
    Factorization { block: String, reason: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("preconditioner misuse: {0}")]
    Misuse(String),

    #[error("newton failed in step {step}: {reason}")]
    StepFailure { step: usize, reason: String },

    #[error("{path}:{line}:{column}: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
