use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zoom out of range: {0} (expected 0..=22)")]
    ZoomOutOfRange(u32),

    #[error("invalid tile {z}/{x}/{y}")]
    InvalidTile { z: u32, x: u32, y: u32 },

    #[error("invalid pixel ({i}, {j}); tiles are 256x256")]
    InvalidPixel { i: u32, j: u32 },

    #[error("invalid stroke width {0}")]
    InvalidWidth(u32),

    #[error("coordinate out of range: lon={lon}, lat={lat}")]
    ProjectionOutOfRange { lon: f64, lat: f64 },

    #[error("parse error at record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("no features")]
    NoFeatures,

    #[error("invalid geometry in record {record}: {message}")]
    InvalidGeometry { record: usize, message: String },

    #[error("empty input: an index needs at least one primitive")]
    EmptyInput,

    #[error("duplicate dataset `{0}`")]
    DuplicateDataset(String),

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("invalid dataset name `{0}`")]
    InvalidName(String),

    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),

    #[error("bad index file: {0}")]
    IndexFormat(String),

    #[error("index file version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("index file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("index file checksum mismatch")]
    Checksum,

    #[error("png: {0}")]
    Png(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
