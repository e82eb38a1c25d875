use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("not a RIFF/WAVE file: {0}")]
    NotWav(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("truncated WAV data: {0}")]
    TruncatedData(String),
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),

    #[error("invalid tone specification: {0}")]
    InvalidSpec(String),
    #[error("signal is empty")]
    EmptySignal,
    #[error("invalid front-end configuration: {0}")]
    InvalidConfig(String),
    #[error("bad FFT size {size}: must be a power of two and at least the frame length {frame_len}")]
    BadFftSize { size: usize, frame_len: usize },
    #[error("negative frequency {0} Hz")]
    NegativeFrequency(f64),
    #[error("negative mel value {0}")]
    NegativeMel(f64),
    #[error("too many filters: filter {filter} collapses onto FFT bin {bin}")]
    TooManyFilters { filter: usize, bin: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("signal sample rate {signal} Hz does not match configured rate {config} Hz")]
    SampleRateMismatch { signal: u32, config: u32 },

    #[error("sequence is empty")]
    EmptySequence,
    #[error("slope constraint admits no warp path for lengths {n} and {m}")]
    InfeasibleConstraints { n: usize, m: usize },

    #[error("config fingerprint mismatch: expected `{expected}`, got `{actual}`")]
    FingerprintMismatch { expected: String, actual: String },
    #[error("corrupt template {}: {reason}", path.display())]
    CorruptTemplate { path: PathBuf, reason: String },
    #[error("store mixes config fingerprints: `{first}` and `{second}`")]
    MixedFingerprints { first: String, second: String },
    #[error("template store is empty")]
    NoTemplates,
    #[error("invalid label `{0}`: must be non-empty with no whitespace or path separators")]
    InvalidLabel(String),
    #[error("malformed CSV {}: {reason}", path.display())]
    MalformedCsv { path: PathBuf, reason: String },
}
