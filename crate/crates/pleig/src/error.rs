use std::path::PathBuf;

/// Errors of the command-line layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Failure inside a solver.
    #[error(transparent)]
    Core(#[from] pleig_core::Error),

    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },

    /// A CSV file was malformed.
    #[error("{path}: {message}")]
    Format {
        /// File involved.
        path: PathBuf,
        /// What was wrong.
        message: String,
    },

    /// Arguments that parse but make no sense together.
    #[error("invalid arguments: {0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    /// Exit code: 2 for non-convergence, 3 for partition collapse, 4 for bad input.
    pub fn exit_code(&self) -> i32 {
        use pleig_core::Error as E;
        match self {
            CliError::Core(
                E::NotConverged { .. } | E::InnerNotConverged { .. } | E::CgNotConverged { .. } | E::Stagnation,
            ) => exit::NOT_CONVERGED,
            CliError::Core(E::PartitionCollapse { .. }) => exit::PARTITION_COLLAPSE,
            _ => exit::BAD_INPUT,
        }
    }
}

/// Process exit codes.
pub mod exit {
    /// Converged run, or all verification checks passed.
    pub const SUCCESS: i32 = 0;
    /// At least one verification check failed.
    pub const CHECK_FAILED: i32 = 1;
    /// The iteration did not converge.
    pub const NOT_CONVERGED: i32 = 2;
    /// One nodal part vanished.
    pub const PARTITION_COLLAPSE: i32 = 3;
    /// Unreadable input or invalid arguments.
    pub const BAD_INPUT: i32 = 4;
}

/// Result alias of the command-line layer.
pub type Result<T> = std::result::Result<T, CliError>;
