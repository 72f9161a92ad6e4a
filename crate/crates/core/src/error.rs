use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("file has no data rows")]
    EmptyFile,

    #[error("column '{0}' not found in header")]
    MissingColumn(String),

    #[error("non-numeric value '{value}' at row {row}, column '{column}'")]
    NonNumeric { row: usize, column: String, value: String },

    #[error("invalid column roles: {0}")]
    InvalidRoles(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),

    #[error("unknown {kind} '{name}'")]
    UnknownVariant { kind: &'static str, name: String },

    #[error("singular design matrix (condition number {condition:.3e})")]
    SingularDesign { condition: f64 },

    #[error("weak or irrelevant instrument: |corr(Z, X)| = {correlation:.4} is below {threshold}")]
    WeakInstrument { correlation: f64, threshold: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate null distribution: {0}")]
    DegenerateNull(String),

    #[error("cannot test: {0}")]
    CannotTest(String),
}

impl Error {
    /// True for failures of a statistical precondition (as opposed to bad
    /// input or configuration).
    pub fn is_statistical(&self) -> bool {
        matches!(
            self,
            Error::WeakInstrument { .. }
                | Error::SingularDesign { .. }
                | Error::DegenerateNull(_)
                | Error::CannotTest(_)
        )
    }
}
