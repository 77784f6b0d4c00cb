use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or usage; nothing was computed.
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: boundwave::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn model(context: impl Into<String>, source: boundwave::Error) -> Self {
        Self::Model { context: context.into(), source }
    }

    /// 1 for validation and usage problems, 2 for numerical and i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Model { source, .. } if source.is_validation() => 1,
            _ => 2,
        }
    }
}
