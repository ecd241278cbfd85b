//! Crate-wide error type.

/// Errors produced by scenario validation, input checking, and quadrature.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A physical scenario violates its invariants (no Cherenkov emission,
    /// empty energy window, non-positive dimensions, bad grid sizes).
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// An operation received arguments outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Successive quadrature refinements failed to agree within tolerance,
    /// or an iterative routine exhausted its budget.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    /// A pipeline stage failed; wraps the underlying error with the stage name.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the name of the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Process exit code associated with this error class (2 validation,
    /// 3 numerical non-convergence).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidScenario(_) | Error::InvalidInput(_) => 2,
            Error::NonConvergence(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
