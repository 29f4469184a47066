use thiserror::Error;

/// Errors raised by the bound, optimizer and density computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("target is not bracketed by [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("crossover {crossover} is not below the decoding threshold {threshold}")]
    AboveThreshold { crossover: f64, threshold: f64 },

    #[error("receiver coincides with an interfering transmitter (d = {spacing} m)")]
    DegenerateGeometry { spacing: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}
