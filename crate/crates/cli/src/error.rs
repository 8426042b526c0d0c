use photonflow_core::Error as CoreError;

/// Failure of one CLI run, tagged with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A computed quantity missed its tolerance.
    #[error("tolerance failure: {0}")]
    Tolerance(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                CoreError::CapExceeded(_) | CoreError::Truncation { .. } => 3,
                _ => 2,
            },
        }
    }
}

impl From<CoreError> for CliError {
    fn from(source: CoreError) -> Self {
        CliError::Core {
            context: "error".into(),
            source,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::from(CoreError::Io(e))
    }
}

/// Attach a context label to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for photonflow_core::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
