use thiserror::Error;

/// Errors raised by the model, controller, simulator and file layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("mass matrix is singular at q = {q:?}")]
    SingularMass { q: Vec<f64> },

    #[error("invalid gain configuration: {0}")]
    InvalidGains(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The tracking error reached the barrier on `joint` (0-based).
    #[error("constraint breach on joint {} at t = {time:.6} s (|e| = {error:.9} rad, limit {limit:.9} rad)", joint + 1)]
    ConstraintBreach {
        time: f64,
        joint: usize,
        error: f64,
        limit: f64,
    },

    #[error("non-finite state derivative at t = {time:.6} s")]
    NonFinite { time: f64 },

    #[error("config error: {0}")]
    ConfigParse(String),

    #[error("trace parse error: {0}")]
    TraceParse(String),

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
