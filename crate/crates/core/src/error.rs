use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Pauli label: {reason} at position {position}")]
    Parse { position: usize, reason: String },

    #[error("dimension mismatch: {left} vs {right} qubits")]
    Dimension { left: usize, right: usize },

    #[error("dense conversion of {n} qubits exceeds the cap of {cap}")]
    Resource { n: usize, cap: usize },

    #[error("Lie closure exceeded the capacity cap of {cap} strings")]
    Capacity { cap: usize },

    /// Involution or Cartan-structure violation; `labels` names the offending strings.
    #[error("structural error: {message}: [{}]", labels.join(", "))]
    Structural { message: String, labels: Vec<String> },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("numerical failure at iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },

    #[error("line search stagnated at iteration {iteration} after {backtracks} backtracks (f = {best_cost:e})")]
    Stagnation {
        iteration: usize,
        backtracks: usize,
        best_theta: Vec<f64>,
        best_cost: f64,
    },
}

impl Error {
    pub(crate) fn structural(message: impl Into<String>, labels: Vec<String>) -> Self {
        Error::Structural {
            message: message.into(),
            labels,
        }
    }
}
