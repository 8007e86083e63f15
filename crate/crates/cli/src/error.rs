use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation: missing or unreadable inputs, invalid settings.
    #[error("{0}")]
    Usage(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: ecomigrate_core::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Stage { .. } | CliError::Io { .. } => 1,
        }
    }

    /// A closed downstream pipe ends output early but is not a failure.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { context: path.display().to_string(), source }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(ecomigrate_core::Error) -> Self {
        move |source| CliError::Stage { stage, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
