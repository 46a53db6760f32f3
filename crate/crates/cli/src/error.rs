use std::io;

use xyqmc::Error as CoreError;

/// Every run finished and all checks held.
pub const EXIT_OK: u8 = 0;
/// A verification check exceeded its tolerance.
pub const EXIT_CHECK: u8 = 1;
/// Bad flags, parameters or input files.
pub const EXIT_USAGE: u8 = 2;
/// The requested volume is beyond what the chosen engine handles.
pub const EXIT_FEASIBILITY: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read `{path}`: {source}")]
    Read { path: String, source: io::Error },

    #[error("cannot parse `{path}`: {source}")]
    Parse { path: String, source: serde_json::Error },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("non-finite value in `{0}`")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Parse { .. } => EXIT_USAGE,
            CliError::Core(e) => match e {
                CoreError::Infeasible { .. } | CoreError::LevelTooDeep { .. } | CoreError::SupportExceedsVolume { .. } => {
                    EXIT_FEASIBILITY
                }
                CoreError::OverlappingSites(_)
                | CoreError::MissingSite(_)
                | CoreError::SiteListMismatch
                | CoreError::MissingLevel(_) => EXIT_CHECK,
                _ => EXIT_USAGE,
            },
            CliError::NonFinite(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_CHECK,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
