use thiserror::Error;

/// Errors raised by the geometry kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric is not positive definite at the sample point")]
    NotPositiveDefinite,

    #[error("frame is singular (det = {0:e})")]
    SingularFrame(f64),

    #[error("frame is not orthonormal (residual {0:e})")]
    NotOrthonormal(f64),

    #[error("densitized triad has non-positive determinant {0:e}")]
    NonPositiveDensity(f64),

    #[error("point outside chart domain: {0}")]
    OutOfDomain(String),

    #[error("lapse must be positive (found {0})")]
    NonPositiveLapse(f64),

    #[error("scale factor must be positive (found {0})")]
    NonPositiveScaleFactor(f64),

    #[error("vector is not tangent to the slice (time component {0:e})")]
    NotTangent(f64),

    #[error("Barbero-Immirzi parameter must be non-zero")]
    ZeroBeta,

    #[error("matrix is not in the Lie algebra (residual {0:e})")]
    NotInAlgebra(f64),

    #[error("matrix is not in the group (residual {0:e})")]
    NotInGroup(f64),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
