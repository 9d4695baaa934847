use cgforge::dataset::DatasetError;
use cgforge::drafter::DraftError;
use cgforge::review::{ReviewError, StoreError};
use thiserror::Error;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, configuration or input content.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// Something the pipeline guarantees did not hold.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Io(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        if e.is_io() {
            Self::Io(e.to_string())
        } else {
            Self::Usage(e.to_string())
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => Self::Io(e.to_string()),
            StoreError::Corrupt { .. } => Self::Usage(e.to_string()),
        }
    }
}

impl From<ReviewError> for CliError {
    fn from(e: ReviewError) -> Self {
        match e {
            ReviewError::Store(s) => s.into(),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<DraftError> for CliError {
    fn from(e: DraftError) -> Self {
        // Every edit kind has a realization rule, so this is a code gap.
        Self::Invariant(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Io("x".into()).exit_code(), 2);
        assert_eq!(CliError::Invariant("x".into()).exit_code(), 3);
        let e: CliError = DraftError::UnrealizableEdit("e".into()).into();
        assert_eq!(e.exit_code(), 3);
    }
}
