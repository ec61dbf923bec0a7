use std::path::PathBuf;

use thiserror::Error;

use omnipoint::{GestureError, ProjectionError, ScanError, SelectError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: {message}")]
    InvalidFixture { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("scene {scene}: missing {what}")]
    MissingFixture { scene: String, what: String },
    #[error("scene {scene}: no person box")]
    NoPerson { scene: String },
    #[error("scene {scene}: view {view_index} fixture was made for a different view than the one computed")]
    ViewMismatch { scene: String, view_index: usize },
    #[error("scene {scene}: {source}")]
    Gesture { scene: String, source: GestureError },
    #[error("scene {scene}: {source}")]
    Scan { scene: String, source: ScanError },
    #[error("scene {scene}: {source}")]
    Projection { scene: String, source: ProjectionError },
    #[error("training failed: {0}")]
    Select(#[from] SelectError),
    #[error("selector svc needs a model")]
    MissingModel,
    #[error("no training scene produced a candidate matching its ground truth ({skipped} skipped)")]
    NoPositives { skipped: usize },
    #[error("no scenes to evaluate")]
    NoScenes,
    #[error("unknown scene {0}")]
    UnknownScene(String),
    #[error("invalid synthetic scene parameters: {0}")]
    InvalidParams(String),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
