use thiserror::Error;

/// Errors raised by state construction, optimization and sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChshError {
    /// An input lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A state or matrix violates its validity invariants.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// The ellipse (or ellipsoid) degenerates to a point.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    /// Numerical results that should agree do not.
    #[error("internal consistency error: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, ChshError>;

pub(crate) fn domain(msg: impl Into<String>) -> ChshError {
    ChshError::Domain(msg.into())
}

pub(crate) fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} is outside [0, 1]")))
    }
}
