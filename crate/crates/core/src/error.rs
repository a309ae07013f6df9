use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic at byte {offset}: expected `CRAST v1`")]
    BadMagic { path: PathBuf, offset: usize },

    #[error("{path}: malformed header at byte {offset}: {detail}")]
    MalformedHeader {
        path: PathBuf,
        offset: usize,
        detail: String,
    },

    #[error("{path}: unsupported dtype `{found}` at byte {offset} ({detail})")]
    UnsupportedDtype {
        path: PathBuf,
        offset: usize,
        found: String,
        detail: String,
    },

    #[error("{path}: band count {found} at byte {offset}, expected {expected}")]
    BadBandCount {
        path: PathBuf,
        offset: usize,
        expected: u64,
        found: u64,
    },

    #[error(
        "{path}: payload holds {found} bytes but header implies {expected} (payload starts at byte {offset})"
    )]
    PayloadSize {
        path: PathBuf,
        offset: usize,
        expected: u64,
        found: u64,
    },

    #[error("{path}: sample {index} has value {value}, outside {expected}")]
    SampleRange {
        path: PathBuf,
        index: usize,
        value: f64,
        expected: String,
    },

    #[error("image geometry invalid: {width}x{height} with {len} pixels")]
    ImageGeometry {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("stack must contain at least one image")]
    EmptyStack,

    #[error("dimension mismatch: {found_ctx} is {found_w}x{found_h}, but {expected_ctx} is {expected_w}x{expected_h}")]
    DimensionMismatch {
        expected_ctx: String,
        expected_w: usize,
        expected_h: usize,
        found_ctx: String,
        found_w: usize,
        found_h: usize,
    },

    #[error("duplicate acquisition date {date} ({first} and {second})")]
    DuplicateDate {
        date: NaiveDate,
        first: String,
        second: String,
    },

    #[error("stack dates must be strictly ascending ({prev} then {next})")]
    DatesNotAscending { prev: NaiveDate, next: NaiveDate },

    #[error("invalid cloud bracket [{lo}, {hi}]: lo must not exceed hi")]
    InvalidBracket { lo: u8, hi: u8 },

    #[error("invalid mask fill {fill}: only 0 and 255 are supported")]
    InvalidFill { fill: u8 },

    #[error("invalid resample scale {scale}: must be positive and finite")]
    InvalidScale { scale: f64 },

    #[error("invalid class breaks: {detail}")]
    InvalidBreaks { detail: String },

    #[error("invalid scene specification: {detail}")]
    InvalidSceneSpec { detail: String },

    #[error("invalid cloud specification: {detail}")]
    InvalidCloudSpec { detail: String },

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
