use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("body is not convex: {0}")]
    NotConvex(String),

    #[error("singular linear map (|det| = {0:e})")]
    SingularMap(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degree mismatch: {0}")]
    Degree(String),

    #[error("unsupported body: {0}")]
    UnsupportedBody(String),

    #[error("polynomial fit residual {residual:e} exceeds {threshold:e}: {context}")]
    FitResidual {
        residual: f64,
        threshold: f64,
        context: String,
    },

    #[error("square is not Cartesian: {0}")]
    NotCartesian(String),

    #[error("quadrature failed on slice at offset {offset:?}: {reason}")]
    Quadrature { offset: Vec<f64>, reason: String },

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
