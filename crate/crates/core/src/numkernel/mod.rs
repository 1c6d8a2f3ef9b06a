//! Dense `f64` tensors with reverse-mode differentiation.

mod archive;
mod params;
mod tape;
mod tensor;

pub use archive::{Archive, FORMAT_VERSION};
pub use params::{Gradients, ParamId, ParamSet, Parameter};
pub use tape::{Tape, Var, LOG_EPSILON};
pub use tensor::{argmax, sigmoid, softmax, Tensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("invalid shape {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("shape {shape:?} does not hold {len} values")]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("rows have different lengths")]
    RaggedRows,
    #[error("slice [{start}, {end}) out of range for length {len}")]
    SliceOutOfRange { start: usize, end: usize, len: usize },
    #[error("{rows} rows but {targets} targets")]
    TargetCount { rows: usize, targets: usize },
    #[error("index {target} out of range for {classes} entries")]
    TargetOutOfRange { target: usize, classes: usize },
    #[error("dropout keep probability must be in (0, 1], got {0}")]
    InvalidKeep(f64),
    #[error("expected a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("backward called without a loss recorded on this tape")]
    NoLoss,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("parameter layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("archive: {0}")]
    Archive(String),
}
