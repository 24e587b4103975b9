use alloc::string::String;

use crate::tensor::Dims;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Dims, found: Dims },

    #[error("tensor data length {len} does not match dims {dims}")]
    LengthMismatch { dims: Dims, len: usize },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt stream: {0}")]
    CorruptStream(&'static str),

    #[error("class model has no classes")]
    EmptyClassList,

    #[error("class index {index} out of range for {count} classes")]
    ClassIndexOutOfRange { index: usize, count: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("mask selects no pixels")]
    EmptyMask,

    #[error("zero channel capacity cannot carry {bits} bits")]
    ZeroCapacity { bits: f64 },

    #[error("channel capacity is zero, no bit budget to optimize against")]
    InfeasibleChannel,

    #[error("no coder profile reaches the minimum PSNR D0 = {d0_psnr_db} dB")]
    NoFeasibleProfile { d0_psnr_db: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("evaluation oracle failed: {0}")]
    Oracle(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
