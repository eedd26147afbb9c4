use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Numerical(schatlab::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<schatlab::Error> for CliError {
    fn from(e: schatlab::Error) -> Self {
        use schatlab::Error::*;
        match e {
            UnsupportedDim(_) | InvalidParameter(_) | MissingSeriesCutoff(_) | Aliasing { .. } => {
                CliError::Usage(e.to_string())
            }
            Io(io) => CliError::Io(io),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
