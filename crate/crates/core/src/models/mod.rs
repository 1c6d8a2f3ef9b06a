//! Sequence taggers: the two-pass attention RNN and the recurrent baselines.

mod attention;
mod baseline;
mod cells;
mod config;
mod model;

pub use attention::{attention_scores, context_vector, decode_step};
pub use baseline::{baseline_output, BaselineVars};
pub use cells::{
    elman_step, encode_bidirectional, jordan_step, lstm_step, run_direction, CellParams, CellVars,
};
pub use config::{Architecture, Cell, ModelConfig};
pub use model::{Feedback, Forward, Instance, Model};

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::numkernel::KernelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
