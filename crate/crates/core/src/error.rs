use thiserror::Error;

/// Errors raised by the geometry, profile and certification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curvature must be -1, 0 or +1, got {0}")]
    InvalidCurvature(i64),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("point violates the model constraint (residual {residual:e})")]
    InvalidPoint { residual: f64 },

    #[error("vector is not tangent at its base point (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("expected a unit tangent vector, got norm {norm}")]
    NonUnitVector { norm: f64 },

    #[error("distance gradient is singular at this point ({0})")]
    SingularGradient(&'static str),

    #[error("foot point on the axis is undefined ({0})")]
    FootPointUndefined(&'static str),

    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, value: f64) -> Error {
    Error::Domain { function, value }
}
