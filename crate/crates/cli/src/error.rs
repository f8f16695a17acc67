use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The closed form and the spectrum (or the dynamics) disagreed.
    #[error("{0}")]
    Mismatch(String),

    #[error(transparent)]
    Core(#[from] releq::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 verification mismatch or failed computation, 2 usage
    /// error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        use releq::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::Io { .. } => 3,
            Self::Mismatch(_) => 1,
            Self::Core(e) => match e {
                E::InvalidMasses(_)
                | E::InvalidConfiguration(_)
                | E::InvalidPotential(_)
                | E::Usage(_)
                | E::Domain(_) => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
