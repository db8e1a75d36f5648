use thiserror::Error;

/// Failures of the command-line tool, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Validation and data problems both exit with 1; 2 is reserved for
    /// failed acceptance checks.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

impl From<dbtrain::Error> for CliError {
    fn from(e: dbtrain::Error) -> Self {
        match e {
            dbtrain::Error::Config(msg) => Self::Config(msg),
            other => Self::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
