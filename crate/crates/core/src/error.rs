use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("point is not on the unit sphere (|z|^2 = {norm_sq})")]
    NotOnSphere { norm_sq: f64 },

    #[error("frame vector {index} is not tangent to the CR distribution (defect {defect:e})")]
    FrameNotTangent { index: usize, defect: f64 },

    #[error("integrand is not finite at node {node:?}: {value}")]
    NonFiniteIntegrand { node: Vec<f64>, value: f64 },

    #[error("cutoff support [{a}, {b}] is not admissible: {reason}")]
    InvalidCutoff { a: f64, b: f64, reason: &'static str },

    #[error("lattice point {0:?} has no entry in the norm table")]
    MissingNorm(Vec<i64>),

    #[error("all coefficients are zero")]
    ZeroFunction,

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("series truncated at degree {cutoff}: relative tail estimate {tail:e}")]
    SeriesTruncated { cutoff: usize, tail: f64 },

    #[error("window profile support [{a}, {b}] leaves the positivity window")]
    OutsideWindow { a: f64, b: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("norm table: {0}")]
    NormTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
