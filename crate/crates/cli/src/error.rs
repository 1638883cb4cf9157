use std::path::Path;

use hoopvis::ability::AbilityError;
use hoopvis::bundle::BundleError;
use hoopvis::config::ConfigFileError;
use hoopvis::gaze::GazeError;
use hoopvis::ingest::IngestError;
use thiserror::Error;

/// Exit code 2 for bad inputs, 1 for everything else that fails at run time.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn missing(path: &Path) -> Self {
        CliError::Validation(format!("missing input file: {}", path.display()))
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

// a config file that cannot be read is a bad input, not a runtime fault
impl From<ConfigFileError> for CliError {
    fn from(e: ConfigFileError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GazeError> for CliError {
    fn from(e: GazeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AbilityError> for CliError {
    fn from(e: AbilityError) -> Self {
        CliError::Validation(e.to_string())
    }
}
