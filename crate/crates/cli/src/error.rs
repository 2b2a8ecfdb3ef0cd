use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] rising_spectrum::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),

    #[error("replayed report differs from the recorded one: {0}")]
    ReplayMismatch(String),
}

impl CliError {
    /// 1 for a failed reproduction, 2 for everything that stops a run from starting.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReplayMismatch(_) => 1,
            _ => 2,
        }
    }
}
