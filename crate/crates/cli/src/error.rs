//! CLI error type. Every failure surfaces as one stderr line,
//! `CODE: message`, with a nonzero exit status.

use chfgen_core::data::DataError;
use chfgen_core::diffusion::DiffusionError;
use chfgen_core::metrics::MetricsError;
use chfgen_core::physics::PhysicsError;
use chfgen_core::steam::SteamError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad command line (unknown command, missing flag value).
    Usage(String),
    /// Bad config file: unknown key, unparsable value, missing required key.
    Config(String),
    /// Filesystem failure.
    Io { path: String, message: String },
    /// Input table header does not match the schema.
    Schema(String),
    /// Non-numeric cell or malformed row.
    Parse(String),
    /// Dataset-level failure (split sizes, constant column, shape).
    Data(String),
    /// Steam/physics domain violation.
    Domain(String),
    /// Checkpoint file invalid or inconsistent with the request.
    Checkpoint(String),
    /// Training aborted.
    Train(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E_USAGE",
            CliError::Config(_) => "E_CONFIG",
            CliError::Io { .. } => "E_IO",
            CliError::Schema(_) => "E_SCHEMA",
            CliError::Parse(_) => "E_PARSE",
            CliError::Data(_) => "E_DATA",
            CliError::Domain(_) => "E_DOMAIN",
            CliError::Checkpoint(_) => "E_CHECKPOINT",
            CliError::Train(_) => "E_TRAIN",
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// One line, machine-parseable: `CODE: message`.
    pub fn render(&self) -> String {
        let msg = format!("{self}").replace('\n', " ");
        format!("{}: {}", self.code(), msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Config(m)
            | CliError::Schema(m)
            | CliError::Parse(m)
            | CliError::Data(m)
            | CliError::Domain(m)
            | CliError::Checkpoint(m)
            | CliError::Train(m) => write!(f, "{m}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match &e {
            DataError::MissingColumn { .. } => CliError::Schema(e.to_string()),
            DataError::ParseCell { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SteamError> for CliError {
    fn from(e: SteamError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<PhysicsError> for CliError {
    fn from(e: PhysicsError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DiffusionError> for CliError {
    fn from(e: DiffusionError) -> Self {
        match &e {
            DiffusionError::TrainingAbort { .. } => CliError::Train(e.to_string()),
            DiffusionError::CheckpointMismatch { .. } => CliError::Checkpoint(e.to_string()),
            DiffusionError::BadConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
