use gaborkit_core::GaborError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] GaborError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input, 2 when a mathematical precondition fails on valid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                GaborError::NotAFrame { .. } | GaborError::AmbiguousGap { .. } | GaborError::IllPosedContour(_),
            ) => 2,
            CliError::Io(_) => 2,
            _ => 1,
        }
    }
}
