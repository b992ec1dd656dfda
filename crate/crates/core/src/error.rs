use thiserror::Error;

/// Errors raised by the exact series, group and tensor machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("requested jet order {requested} exceeds known order {available}")]
    JetOrderExceeded { requested: usize, available: usize },

    #[error("inner series {index} of a composition has nonzero constant term")]
    NonzeroConstantTerm { index: usize },

    #[error("variable label {label} out of range 1..={dim}")]
    InvalidLabel { label: usize, dim: usize },

    #[error("linear part is singular")]
    SingularLinearPart,

    #[error("f has a nonzero term of degree {degree} below the quadratic part")]
    NotMorse { degree: usize },

    #[error("Hessian is not positive-definite (leading minor {minor} is not positive)")]
    NotPositiveDefinite { minor: usize },

    #[error("density has zero constant term")]
    ZeroDensity,

    #[error("Cholesky pivot {pivot} of the quadratic part is {value}, not the square of a rational")]
    NonSquarePivot { pivot: usize, value: String },

    #[error("complete trace of the order-{order} difference tensor is nonzero")]
    NonzeroCompleteTrace { order: usize },

    #[error("operation requires dimension > 1")]
    OneDimensional,

    #[error("operation requires dimension 1, got {dim}")]
    NotOneDimensional { dim: usize },

    #[error("jets below order {order} do not agree")]
    LowerJetsDiffer { order: usize },

    #[error("tensor order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("witness failed verification at jet order {order}")]
    WitnessVerification { order: usize },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
