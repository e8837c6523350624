use chrono::NaiveDate;
use thiserror::Error;

use crate::series::ScaleKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("duplicate date {date} at row {row}")]
    DuplicateDate { row: usize, date: NaiveDate },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("date range {start}..={end} selects no observations")]
    EmptySlice { start: NaiveDate, end: NaiveDate },

    #[error("scale mismatch: expected {expected:?} series, found {found:?}")]
    ScaleMismatch { expected: ScaleKind, found: ScaleKind },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate scale: all {0} values are equal")]
    DegenerateScale(usize),

    #[error("split error: {0}")]
    Split(String),

    #[error("insufficient data: {len} values cannot fill a window of {window}")]
    InsufficientData { len: usize, window: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: usize },

    #[error("checkpoint error at byte {offset}: {msg}")]
    Checkpoint { offset: usize, msg: String },

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
