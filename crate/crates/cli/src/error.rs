use std::fmt;
use std::path::PathBuf;

/// Driver-level failures; solver errors pass through with their context.
#[derive(Debug)]
pub enum CliError {
    /// Configuration file missing, unreadable, or invalid.
    Config(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Csv {
        path: PathBuf,
        message: String,
    },
    Core(nesim_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {}", msg),
            CliError::Io { path, source } => {
                write!(f, "io error on {}: {}", path.display(), source)
            }
            CliError::Csv { path, message } => {
                write!(f, "csv error on {}: {}", path.display(), message)
            }
            CliError::Core(e) => write!(f, "solver error: {}", e),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<nesim_core::Error> for CliError {
    fn from(e: nesim_core::Error) -> Self {
        CliError::Core(e)
    }
}
