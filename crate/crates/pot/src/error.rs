//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor sequence has no frames")]
    EmptySequence,

    #[error("descriptor sequence has zero dimensions")]
    ZeroDimension,

    #[error("non-finite value at row {row}, column {col} in {context}")]
    NonFinite {
        context: String,
        row: usize,
        col: usize,
    },

    #[error("invalid temporal filter [{start}, {end}]: need 1 <= start <= end")]
    InvalidFilter { start: usize, end: usize },

    #[error("temporal filter [{start}, {end}] exceeds sequence length {frames}")]
    FilterOutOfBounds {
        start: usize,
        end: usize,
        frames: usize,
    },

    #[error("pyramid level {level} needs {segments} segments but the video has only {frames} frames")]
    InfeasiblePyramidLevel {
        level: usize,
        segments: usize,
        frames: usize,
    },

    #[error("operator set must not be empty")]
    EmptyOperatorSet,

    #[error("duplicate pooling operator '{0}'")]
    DuplicateOperator(String),

    #[error("unknown pooling operator '{0}' (expected sum, max, d1, or d2)")]
    UnknownOperator(String),

    #[error("unknown channel '{0}'")]
    UnknownChannel(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("channel '{channel}' of video '{video}' needs at least 2 frames, got {frames}")]
    NeedsTwoFrames {
        video: String,
        channel: String,
        frames: usize,
    },

    #[error("frame {index} is {actual_h}x{actual_w} but frame 0 is {expected_h}x{expected_w}")]
    FrameSizeMismatch {
        index: usize,
        expected_h: usize,
        expected_w: usize,
        actual_h: usize,
        actual_w: usize,
    },

    #[error("frame is {h}x{w}; both sides must be at least {min}")]
    FrameTooSmall { h: usize, w: usize, min: usize },

    #[error("pixel value {value} at ({row}, {col}) is outside [0, 1]")]
    PixelOutOfRange { row: usize, col: usize, value: f64 },

    #[error("{path}: {message} (line {line})")]
    DescriptorFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message} (line {line})")]
    ManifestFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message} (line {line})")]
    SplitsFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("need at least {needed} distinct points for k-means, got {got}")]
    TooFewDistinctPoints { needed: usize, got: usize },

    #[error("GMM with {k} components needs at least {needed} points, got {got}")]
    TooFewPoints {
        k: usize,
        needed: usize,
        got: usize,
    },

    #[error("GMM component {index} degenerated twice (weight below {floor:e})")]
    DegenerateComponent { index: usize, floor: f64 },

    #[error("SVM training needs at least 2 classes, got {0}")]
    SingleClass(usize),

    #[error("kernel gamma for channel {channel} is not positive ({gamma})")]
    NonPositiveGamma { channel: usize, gamma: f64 },

    #[error("missing channel {index}: {count_x} vectors on one side, {count_y} on the other")]
    MissingChannel {
        index: usize,
        count_x: usize,
        count_y: usize,
    },

    #[error("kernel matrix is not symmetric at ({row}, {col}): {a} vs {b}")]
    AsymmetricKernel {
        row: usize,
        col: usize,
        a: f64,
        b: f64,
    },

    #[error("kernel diagonal entry {index} is {value}, expected 1")]
    KernelDiagonal { index: usize, value: f64 },

    #[error("SMO did not converge within {iterations} iterations (max KKT violation {violation:e})")]
    NoConvergence { iterations: usize, violation: f64 },

    #[error("class '{label}' has {count} videos; at least 2 are required")]
    ClassTooSmall { label: String, count: usize },

    #[error("missing feature vector for video '{video}' (channel '{channel}')")]
    MissingFeature { video: String, channel: String },

    #[error("trial count must be positive")]
    ZeroTrials,

    #[error("train fraction {0} must lie in (0, 1)")]
    BadTrainFraction(f64),

    #[error("duplicate video id '{0}'")]
    DuplicateVideo(String),

    #[error("split plan references unknown video id '{0}'")]
    UnknownVideo(String),

    #[error("manifest declares fewer than 2 classes")]
    TooFewClasses,

    #[error("video '{video}' does not resolve channel '{channel}': {reason}")]
    UnresolvedChannel {
        video: String,
        channel: String,
        reason: String,
    },

    #[error("refusing to overwrite existing file {0}")]
    WouldClobber(PathBuf),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
