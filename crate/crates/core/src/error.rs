use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: [usize; 3],
        right: [usize; 3],
    },

    #[error("grid {grid_extent:?} um does not cover model box of edge {box_edge} um")]
    GridTooSmall { grid_extent: [f64; 3], box_edge: f64 },

    #[error("non-binary value {value} at voxel {index}")]
    NonBinary { index: usize, value: u32 },

    #[error("degenerate histogram: volume is constant")]
    DegenerateHistogram,

    #[error("evaluation domain has {0} voxels, need at least 2")]
    EmptyDomain(u64),

    #[error("annotation {id}: point {point_index} {point:?} outside grid {dims:?}")]
    AnnotationOutOfBounds {
        id: u32,
        point_index: usize,
        point: [i64; 3],
        dims: [usize; 3],
    },

    #[error("annotation {id}: {reason}")]
    InvalidAnnotation { id: u32, reason: String },

    #[error("{path}: raw size mismatch, expected {expected} bytes, found {actual}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{path}: unknown dtype {dtype:?}")]
    UnknownDtype { path: PathBuf, dtype: String },

    #[error("{path}: expected dtype {expected}, found {found}")]
    WrongDtype {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
