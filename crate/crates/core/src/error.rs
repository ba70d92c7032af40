use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("obstacle placement infeasible after {attempts} attempts ({placed} of {requested} placed)")]
    PlacementInfeasible {
        attempts: usize,
        placed: usize,
        requested: usize,
    },

    #[error("frame sequence broken at position {position}: expected step {expected}, found {found}")]
    FrameOrder {
        position: usize,
        expected: usize,
        found: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("image format: {property}: {detail}")]
    ImageFormat { property: &'static str, detail: String },

    #[error("png encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("image too small for SSIM: {width}x{height} < window {window}")]
    ImageTooSmall { width: usize, height: usize, window: usize },

    #[error("manifest already exists at {0} (use force to overwrite)")]
    ManifestExists(PathBuf),

    #[error("malformed {what} at {path}: {source}")]
    Malformed {
        what: &'static str,
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("evaluation failed: {}", .0.join("; "))]
    Pairing(Vec<String>),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
