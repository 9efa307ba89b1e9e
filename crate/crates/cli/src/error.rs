use robarch::micronet::MicronetError;
use robarch::search::SearchError;
use robarch::surrogate::SurrogateError;
use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("missing input: {0}")]
    Missing(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Missing(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<MicronetError> for CliError {
    fn from(e: MicronetError) -> Self {
        match e {
            MicronetError::Config(_) => CliError::Config(e.to_string()),
            MicronetError::Io(_) | MicronetError::Checkpoint(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SurrogateError> for CliError {
    fn from(e: SurrogateError) -> Self {
        match e {
            SurrogateError::Io(_) | SurrogateError::Format(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Config(_) | SearchError::Evo(_) => CliError::Config(e.to_string()),
            SearchError::EvaluatorUnavailable(_) | SearchError::EmptyArchive => CliError::Missing(e.to_string()),
            SearchError::Io(_) | SearchError::Csv(_) | SearchError::Json(_) | SearchError::Format(_) => CliError::Io(e.to_string()),
            SearchError::Surrogate(e) => e.into(),
            SearchError::Micronet(e) => e.into(),
            SearchError::PointBeyondReference { .. } | SearchError::Dimension(_) => CliError::Numeric(e.to_string()),
        }
    }
}
