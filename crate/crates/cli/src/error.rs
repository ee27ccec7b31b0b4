use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 usage, 2 data or parse, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } | CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<mcem_dsp::Error> for CliError {
    fn from(e: mcem_dsp::Error) -> Self {
        use mcem_dsp::Error as E;
        match e {
            E::UnknownModel(_) | E::UnknownScenario(_) | E::InvalidConfig(_) => CliError::Usage(e.to_string()),
            E::InvalidGenotype(_)
            | E::MendelIncompatible { .. }
            | E::ZeroProbability { .. }
            | E::EmptyDataset
            | E::DatasetMismatch => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
