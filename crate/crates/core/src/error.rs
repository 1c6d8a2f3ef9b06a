use thiserror::Error;

use crate::corpus::CorpusError;
use crate::evaluation::EvalError;
use crate::models::ModelError;
use crate::numkernel::KernelError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// Invalid arguments or configuration.
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
