use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed input file; the message carries line and field.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] decoy_core::Error),
    #[error("oracle disagreement: {0}")]
    Verify(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 0 success, 1 verification failure or other, 2 validation, 3 infeasible, 4 cap exceeded.
    pub fn exit_code(&self) -> i32 {
        use decoy_core::Error as E;
        match self {
            CliError::Schema(_) | CliError::Validation(_) => 2,
            CliError::Core(e) => match e {
                E::Infeasible(_) => 3,
                E::CapExceeded { .. } => 4,
                E::CrossCheck { .. } | E::IterationLimit(_) | E::EnumerationTooLarge { .. } => 1,
                _ => 2,
            },
            CliError::Verify(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use decoy_core::Error as E;
        match self {
            CliError::Schema(_) => "schema",
            CliError::Validation(_) => "validation",
            CliError::Verify(_) => "verify",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::DegenerateIntensities { .. } => "degenerate_intensities",
                E::PartitionTooLong { .. } | E::InvalidPartition(_) => "partition",
                E::EnumerationTooLarge { .. } => "enumeration_too_large",
                E::NegativeQPlus { .. } => "negative_qplus",
                E::Validation(_) | E::Domain(_) | E::DegenerateYield(_) => "validation",
                E::CapExceeded { .. } => "cap_exceeded",
                E::Infeasible(_) => "infeasible",
                E::CrossCheck { .. } => "cross_check",
                E::IterationLimit(_) => "iteration_limit",
            },
        }
    }

    pub fn to_object(&self) -> ErrorObject {
        ErrorObject {
            kind: self.kind().to_owned(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

/// Structured error entry in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

pub type CliResult<T> = std::result::Result<T, CliError>;
