use std::process::ExitCode;

use eprsim::scenario::Violation;
use eprsim::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration or arguments are unusable; nothing was computed or written.
    #[error("invalid configuration:\n{}", list(.0))]
    Validation(Vec<Violation>),
    /// A computation or the oracle comparison failed.
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        CliError::Validation(vec![Violation {
            field: field.into(),
            message: message.into(),
        }])
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 3,
        }
    }

    /// Violated field names, empty for non-validation errors.
    pub fn fields(&self) -> Vec<&str> {
        match self {
            CliError::Validation(v) => v.iter().map(|v| v.field.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_)
            | CoreError::OutOfRange { .. }
            | CoreError::Unphysical { .. }
            | CoreError::SpanTooNarrow(_)
            | CoreError::InsufficientSamples { .. }
            | CoreError::InsufficientLength { .. } => CliError::field("input", e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
