use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FogError>;

#[derive(Debug, Error)]
pub enum FogError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("malformed depth file {path}: {reason}")]
    MalformedDepth { path: PathBuf, reason: String },

    #[error("depth file {path} has {channels} channels, expected 1")]
    MultiChannelDepth { path: PathBuf, channels: usize },

    #[error("depth file {path} contains {count} non-finite value(s)")]
    NonFiniteDepth { path: PathBuf, count: usize },

    #[error("invalid scene reference: d_min={d_min}, d_max={d_max} (need 0 < d_min < d_max)")]
    InvalidReference { d_min: f64, d_max: f64 },

    #[error("calibration yields non-positive depth at {count} pixel(s)")]
    NonPositiveDepth { count: usize },

    #[error("invalid visibility {0} m (must be > 0)")]
    InvalidVisibility(f64),

    #[error("dimension mismatch: {what} is {got:?}, expected {expected:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("turbulence texture is constant; image too small for the noise lattice")]
    DegenerateTexture,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sequence {sequence}: missing depth file for frame {frame}")]
    MissingDepth { sequence: String, frame: String },

    #[error("invalid sequence layout at {path}: {reason}")]
    InvalidSequence { path: PathBuf, reason: String },

    #[error("no sequences found under {0}")]
    NoSequences(PathBuf),

    #[error("{path}:{line}: {reason}")]
    MalformedMotLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: duplicate (frame={frame}, id={id})")]
    DuplicateRecord {
        path: PathBuf,
        line: usize,
        frame: u32,
        id: i64,
    },

    #[error("track set invariant violated: {0}")]
    InvalidTrackSet(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

impl FogError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FogError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        FogError::Image {
            path: path.into(),
            source,
        }
    }
}
