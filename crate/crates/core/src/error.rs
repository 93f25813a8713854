use thiserror::Error;

/// Failures raised by builders and analyses.
///
/// Validation errors describe bad inputs (the CLI maps them to exit code 2);
/// numeric errors describe a computation that could not be completed (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    #[error("transform columns are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("seed vertices yield overlapping or adjacent cliques; dependent-clique structures are not supported")]
    DependentCliques,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::DimensionCap { .. }
                | Error::Asymmetric(_)
                | Error::NotOrthonormal(_)
                | Error::DependentCliques
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
