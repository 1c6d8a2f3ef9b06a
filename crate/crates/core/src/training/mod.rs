//! Mini-batch SGD with learning-rate decay and F1-based early stopping,
//! plus k-fold splitting.

mod batch;
mod kfold;
mod train;

pub use batch::{make_batches, Batch};
pub use kfold::{kfold_split, Fold};
pub use train::{train, EarlyStopState, Progress, TrainConfig, TrainSummary};
