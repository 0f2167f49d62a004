use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("intensities {first} and {second} are closer than the degeneracy gap (relative spacing {spacing:e})")]
    DegenerateIntensities {
        first: usize,
        second: usize,
        spacing: f64,
    },

    #[error("partition has {parts} parts but only {variables} variables are available")]
    PartitionTooLong { parts: usize, variables: usize },

    #[error("invalid partition {0:?}: parts must be positive and weakly decreasing")]
    InvalidPartition(Vec<usize>),

    #[error("tableau enumeration for weight {weight} in {variables} variables exceeds the enumeration cap")]
    EnumerationTooLarge { weight: usize, variables: usize },

    #[error("non-vacuum detection rate is negative at intensity #{index} ({value:e})")]
    NegativeQPlus { index: usize, value: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("no (L0, a0) found with L0 <= {cap}: the search cap is too small or no yield vector in [0,1] fits the data")]
    CapExceeded { cap: usize },

    #[error("infeasible data: {0}")]
    Infeasible(String),

    #[error("{what}: independent evaluations disagree by {delta:e} (tolerance {tolerance:e})")]
    CrossCheck {
        what: &'static str,
        delta: f64,
        tolerance: f64,
    },

    #[error("argument {0} outside [0, 1]")]
    Domain(f64),

    #[error("single-photon yield lower bound must be positive, got {0:e}")]
    DegenerateYield(f64),

    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
}
