use tempdeg_core::Error as CoreError;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("determinism check failed: {0}")]
    Nondeterministic(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit status: 2 config, 3 I/O, 4 shape or format, 5 sidecar.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Nondeterministic(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Param(_) => 2,
                CoreError::Io(_) => 3,
                CoreError::Sidecar(_) | CoreError::UndefinedGain(_) => 5,
                CoreError::Shape(_)
                | CoreError::ShapeMismatch(_)
                | CoreError::EmptyClip
                | CoreError::Sequence { .. }
                | CoreError::Unsupported(_)
                | CoreError::Stream(_)
                | CoreError::Recipe(_) => 4,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(CoreError::Io(e))
    }
}
