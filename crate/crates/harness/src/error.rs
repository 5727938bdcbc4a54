use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] gaussian_tomo_core::Error),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for runtime ones.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownSuite(_) => 2,
            HarnessError::Io { .. } | HarnessError::Format { .. } | HarnessError::Core(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
