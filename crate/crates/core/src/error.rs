use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HpkError {
    #[error("pole at {0}")]
    Pole(f64),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge: {0}")]
    NonConvergence(String),
    #[error("ill-conditioned construction (residual {residual:.3e}): {what}")]
    IllConditioned { what: String, residual: f64 },
    #[error("degree {requested} exceeds available {available}")]
    Degree { requested: usize, available: usize },
    #[error("moment of degree {degree} diverges for N = {n}")]
    MomentDivergence { degree: usize, n: usize },
    #[error("quadrature failed: {0}")]
    QuadFailure(String),
    #[error("sampling grid too coarse: residual mass {mass} below {needed}")]
    GridTooCoarse { mass: f64, needed: f64 },
    #[error("1 - U numerically singular")]
    SingularCayley,
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("near-singular inverse (contraction {0})")]
    NearSingular(f64),
    #[error("i/o: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for HpkError {
    fn from(e: std::io::Error) -> Self {
        HpkError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HpkError {
    fn from(e: serde_json::Error) -> Self {
        HpkError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HpkError>;
