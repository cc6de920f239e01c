use thiserror::Error;

/// Errors raised by the evaluation, quadrature, and certificate layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("time pair outside the triangle domain: t = {t} < s = {s}")]
    Domain { t: f64, s: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("model `{model}` expects a {expected} base point")]
    BaseVariant { model: String, expected: &'static str },

    #[error("invalid base point: {0}")]
    InvalidBasePoint(String),

    #[error("dimension mismatch: model has p = {expected}, vector has {found} components")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid nonempty: {0}")]
    EmptyGrid(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("zero vector is not admissible")]
    ZeroVector,

    #[error("quadrature depth exhausted on [{a}, {b}] (partial estimate {partial})")]
    DepthExhausted { a: f64, b: f64, partial: f64 },

    #[error("kernel function is not positive at u = {0}")]
    NonPositiveKernel(f64),

    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("model degeneracy: {0}")]
    ModelDegeneracy(String),

    #[error("invalid model descriptor: {0}")]
    InvalidModel(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("at sample {sample}: {source}")]
    AtSample { sample: String, source: Box<LabError> },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
