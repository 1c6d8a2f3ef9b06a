//! Phrase-level scoring, tag decoupling, per-sentiment F1 and significance tests.

mod conlleval;
mod report;
mod sentiment;
mod ttest;

pub use conlleval::{conlleval_f1, round2, PhraseScores};
pub use report::{evaluate, evaluate_model, EvalReport};
pub use sentiment::{decouple, sentiment_class_f1, ClassScores, Decoupled};
pub use ttest::{ttest_two_sided, Significance};

use thiserror::Error;

use crate::models::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{gold} gold sentences but {predicted} predicted")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {sentence}: {gold} gold labels but {predicted} predicted")]
    LengthMismatch {
        sentence: usize,
        gold: usize,
        predicted: usize,
    },
    #[error("t-test needs at least 2 values per sample, got {a} and {b}")]
    TooFewSamples { a: usize, b: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}
