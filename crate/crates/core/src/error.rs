use thiserror::Error;

/// Errors raised by the exact and floating evaluation paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// `n <= gamma * m`: the moment recurrence would divide by zero or cross a pole.
    #[error("n ≤ γm: recurrence pole at m = {m}")]
    RecurrencePole { m: usize },

    #[error("divergent moment: order {order} requires order < n/γ + 1")]
    Divergent { order: usize },

    #[error("integrability: growth exponent {mu} must be below {limit}")]
    Integrability { mu: f64, limit: f64 },

    #[error("quadrature did not converge after {refinements} refinements (last change {last_change:e})")]
    NonConvergence { refinements: usize, last_change: f64 },

    #[error("derivative order {requested} exceeds available order {available}")]
    Order { requested: usize, available: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("instability: {0}")]
    Instability(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that stem from numerics rather than from invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Instability(_))
    }
}
