use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two bodies sit (numerically) on top of each other.
    #[error("bodies {j} and {k} collide (distance {distance:e})")]
    Collision { j: usize, k: usize, distance: f64 },

    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// A call outside the supported shape, e.g. a triangle with n != 3.
    #[error("usage error: {0}")]
    Usage(String),

    /// Parameters outside the domain where a closed form is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two independent routes to the same quantity disagree.
    #[error("internal consistency error: {quantity} closed form {closed_form} vs numeric {numeric}")]
    Inconsistent {
        quantity: &'static str,
        closed_form: f64,
        numeric: f64,
    },

    #[error("eigensolver failed to converge (condition estimate {condition:e})")]
    Eigensolver { condition: f64 },

    #[error("non-finite state at integration step {step}")]
    NonFinite { step: usize },

    #[error("validation failed: {0}")]
    Validation(String),
}
