//! Sequence taggers for aspect extraction (AE) and joint aspect extraction
//! with sentiment classification (AESC) on product reviews.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkernel`]: dense tensors and a reverse-mode differentiation tape.
//! * [`corpus`]: corpus readers/writers, tokenization, IOB tag schemes,
//!   embeddings, context windows and linguistic features.
//! * [`models`]: the two-pass attention RNN and the Elman / Jordan / LSTM
//!   baselines (uni- and bidirectional).
//! * [`training`]: batching, SGD with decay and early stopping, k-fold splits.
//! * [`evaluation`]: conlleval-compatible phrase scoring, tag decoupling,
//!   per-sentiment F1 and Welch's t-test.
//! * [`adaptation`]: WEIGHTED and PRED transfer from a source corpus.

pub mod adaptation;
pub mod corpus;
pub mod evaluation;
pub mod models;
pub mod numkernel;
pub mod training;

mod error;

pub use error::{Error, Result};
