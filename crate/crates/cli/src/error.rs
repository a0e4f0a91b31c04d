use thiserror::Error;

/// CLI failure, mapped onto a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or degenerate input. Exit code 2.
    #[error("{0}")]
    Data(String),
    /// Non-convergence reported under `--strict`. Exit code 3.
    #[error("{0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

impl From<pathwise::Error> for CliError {
    fn from(e: pathwise::Error) -> Self {
        use pathwise::Error as E;
        match e {
            E::Parameter(_) | E::DegenerateCurvature { .. } => CliError::Usage(e.to_string()),
            E::DegenerateData(_) | E::DegenerateFit | E::Evaluation(_) | E::Parse { .. } | E::Format(_) | E::Io(_) => {
                CliError::Data(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// `File::open` with the path in the error message.
pub fn open(path: &std::path::Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

/// `File::create` with the path in the error message.
pub fn create(path: &std::path::Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}
