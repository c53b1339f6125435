use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: source coincides with array position")]
    DegenerateGeometry,

    #[error("invalid array geometry: {0}")]
    InvalidGeometry(String),

    #[error("user index {index} out of range (K = {count})")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("stream of {len} samples is not a whole number of blocks of length {block_len}")]
    StreamLength { len: usize, block_len: usize },

    #[error("empty observation set")]
    EmptyObservations,

    #[error("snapshot dimension L = {snapshot_len} must exceed source count K = {sources}")]
    TooFewSnapshotDims { snapshot_len: usize, sources: usize },

    #[error("covariance matrix is singular; use positive diagonal loading")]
    SingularCovariance,

    #[error("signal power is zero; SNR is undefined")]
    ZeroSignalPower,

    #[error("could not place {users} users with {min_sep_deg}° separation after {retries} retries")]
    SeparationUnsatisfiable {
        users: usize,
        min_sep_deg: f64,
        retries: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
