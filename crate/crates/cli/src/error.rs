use std::path::PathBuf;

use mariomix_core::{BuildError, DatasetError, LevelDirError, MixError, ReplayError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Levels(#[from] LevelDirError),
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: DatasetError },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Mix(#[from] MixError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("no level `{0}`")]
    UnknownLevel(String),
    #[error("no policy named `{0}` in the dataset")]
    UnknownPolicy(String),
    #[error("server: {0}")]
    Runtime(std::io::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Invalid(_) => "InvalidArgument",
            CliError::Io { .. } => "Io",
            CliError::Parse { .. } => "Parse",
            CliError::Levels(LevelDirError::Io { .. }) => "Io",
            CliError::Levels(LevelDirError::Parse { .. }) => "LevelParse",
            CliError::Dataset {
                source: DatasetError::SchemaVersionMismatch { .. },
                ..
            } => "SchemaVersionMismatch",
            CliError::Dataset {
                source: DatasetError::Io(_),
                ..
            } => "Io",
            CliError::Dataset { .. } => "CorruptFile",
            CliError::Build(_) => "Build",
            CliError::Mix(MixError::UnknownPolicyName(_)) | CliError::UnknownPolicy(_) => "UnknownPolicyName",
            CliError::Mix(MixError::SegmentNeverVisited(_)) => "SegmentNeverVisited",
            CliError::Mix(MixError::UnassignedSlot(_)) => "UnassignedSlot",
            CliError::Mix(_) => "Mix",
            CliError::Replay(ReplayError::ChecksumMismatch { .. }) => "ChecksumMismatch",
            CliError::Replay(_) => "Replay",
            CliError::UnknownLevel(_) => "NotFound",
            CliError::Runtime(_) => "Server",
        }
    }
}

/// One JSON line on stderr: `{"error":{"code":..,"message":..}}`.
pub fn report(e: &CliError) {
    let line = serde_json::json!({"error": {"code": e.code(), "message": e.to_string()}});
    eprintln!("{line}");
}
