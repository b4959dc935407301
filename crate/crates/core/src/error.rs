use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },
    #[error("degenerate Markov chain: p = q = 1 has no ergodic distribution")]
    DegenerateChain,
    #[error("singular system: {0}")]
    Singular(&'static str),
    #[error("{0}")]
    Unsupported(String),
    #[error("state {0} has never been visited, its belief cannot be updated")]
    CounterZero(usize),
    #[error("no E-stable equilibrium among the consistent candidates")]
    NoEStableEquilibrium,
    #[error("{0} candidates are E-stable, the selection is ambiguous")]
    MultipleEStable(usize),
    #[error("bracket expansion failed after {0} doublings")]
    BracketFailure(usize),
    #[error("fixed-point iteration did not converge after {iterations} steps (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }
}
