use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A user-supplied parameter is outside its valid domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The one-dimensional coordinate subproblem is not strongly convex.
    #[error("degenerate curvature {curvature} (must exceed {minimum})")]
    DegenerateCurvature { curvature: f64, minimum: f64 },

    /// The data admit no meaningful fit (constant response, all-constant design, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The residual vanished; the model interpolates the response exactly.
    #[error("degenerate fit: residual is identically zero")]
    DegenerateFit,

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
