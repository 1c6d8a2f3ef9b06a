use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::make_batches;
use crate::corpus::Sentence;
use crate::evaluation::evaluate_model;
use crate::models::{Architecture, Model};
use crate::numkernel::{ParamSet, Tape};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Learning-rate multiplier applied after every epoch.
    pub decay: f64,
    pub batch_size: usize,
    pub max_len: usize,
    pub max_epochs: usize,
    /// Stop once this many steps pass without a better validation F1.
    pub patience_steps: usize,
    /// Validate every `n` steps; `None` validates at the end of each epoch.
    pub validate_every: Option<usize>,
    /// Rescale gradients whose global norm exceeds this.
    pub clip_norm: Option<f64>,
    /// Visit batches in a new random order each epoch.
    pub shuffle: bool,
    /// Stop as soon as validation F1 reaches this value.
    pub target_f1: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            decay: 0.9,
            batch_size: 1,
            max_len: 200,
            max_epochs: 5,
            patience_steps: 1000,
            validate_every: None,
            clip_norm: Some(5.0),
            shuffle: true,
            target_f1: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults per architecture: the ARNN uses batches of 16, validates every
    /// 100 steps and runs until early stopping (capped at 50 epochs); the
    /// baselines train per sentence for 5 epochs.
    pub fn for_architecture(arch: Architecture) -> Self {
        match arch {
            Architecture::Arnn => TrainConfig {
                batch_size: 16,
                max_epochs: 50,
                validate_every: Some(100),
                ..Default::default()
            },
            _ => TrainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let positive = self.learning_rate > 0.0
            && self.decay > 0.0
            && self.batch_size >= 1
            && self.max_len >= 1
            && self.max_epochs >= 1
            && self.patience_steps >= 1
            && self.validate_every != Some(0)
            && self.clip_norm.is_none_or(|c| c > 0.0);
        if positive {
            Ok(())
        } else {
            Err(Error::Usage(format!("training settings must be positive: {self:?}")))
        }
    }

    /// Learning rate during `epoch` (0-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.decay.powi(epoch as i32)
    }
}

/// Best validation score seen so far and the parameters that produced it.
#[derive(Clone, Debug)]
pub struct EarlyStopState {
    pub best_f1: Option<f64>,
    pub best_step: usize,
    pub best_epoch: usize,
    pub snapshot: Option<ParamSet>,
}

impl EarlyStopState {
    pub fn new() -> Self {
        EarlyStopState {
            best_f1: None,
            best_step: 0,
            best_epoch: 0,
            snapshot: None,
        }
    }

    /// Records a validation score; keeps a snapshot only on strict improvement.
    pub fn update(&mut self, step: usize, epoch: usize, f1: f64, params: &ParamSet) -> bool {
        if self.best_f1.is_some_and(|b| f1 <= b) {
            return false;
        }
        self.best_f1 = Some(f1);
        self.best_step = step;
        self.best_epoch = epoch;
        self.snapshot = Some(params.clone());
        true
    }

    pub fn steps_since_improvement(&self, step: usize) -> usize {
        step - self.best_step
    }

    pub fn should_stop(&self, step: usize, patience: usize) -> bool {
        self.best_f1.is_some() && self.steps_since_improvement(step) >= patience
    }
}

impl Default for EarlyStopState {
    fn default() -> Self {
        Self::new()
    }
}

/// One progress-log entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub step: usize,
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean batch loss since the previous entry.
    pub train_loss: f64,
    pub validation_f1: Option<f64>,
}

impl Progress {
    pub fn line(&self) -> String {
        let f1 = self.validation_f1.map_or("-".to_string(), |f| format!("{f:.2}"));
        format!(
            "step {:>6}  epoch {:>3}  lr {:.6}  loss {:.6}  val_f1 {}",
            self.step, self.epoch, self.learning_rate, self.train_loss, f1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub best_f1: Option<f64>,
    pub best_step: usize,
    pub best_epoch: usize,
    pub steps: usize,
    pub epochs: usize,
    pub stopped_early: bool,
    pub truncated_sentences: usize,
    /// Mean training loss of each completed epoch.
    pub epoch_losses: Vec<f64>,
    pub history: Vec<Progress>,
    pub wall_time_secs: f64,
}

/// Trains `model` in place and leaves it at the parameters with the best
/// validation F1 (or the final ones when `validation` is empty).
pub fn train(
    model: &mut Model,
    train_set: &[Sentence],
    validation: &[Sentence],
    config: &TrainConfig,
) -> Result<TrainSummary, Error> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    let started = Instant::now();
    let instances: Vec<_> = train_set.iter().map(|s| model.instance(s)).collect();
    let (batches, truncated) = make_batches(&instances, config.batch_size, config.max_len);
    let batches: Vec<Vec<_>> = batches.iter().map(|b| b.instances()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..batches.len()).collect();

    let mut early = EarlyStopState::new();
    let mut history = Vec::new();
    let mut epoch_losses = Vec::new();
    let (mut step, mut epochs, mut stopped_early) = (0, 0, false);
    let (mut window_loss, mut window_n) = (0.0, 0);

    let validate = |model: &Model, step: usize, epoch: usize, early: &mut EarlyStopState| -> Result<Option<f64>, Error> {
        if validation.is_empty() {
            return Ok(None);
        }
        let f1 = evaluate_model(model, validation)?.0.f1();
        early.update(step, epoch, f1, model.params());
        Ok(Some(f1))
    };

    let reached = |f1: Option<f64>| matches!((f1, config.target_f1), (Some(f), Some(t)) if f >= t);

    'epochs: for epoch in 0..config.max_epochs {
        let lr = config.learning_rate_at(epoch);
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let (mut epoch_loss, mut epoch_n) = (0.0, 0);
        for &b in &order {
            let grads = {
                let mut tape = Tape::new(model.params());
                let Some(loss) = model.loss(&mut tape, &batches[b], true, &mut rng)? else {
                    continue;
                };
                let value = tape.value(loss).data()[0];
                epoch_loss += value;
                window_loss += value;
                epoch_n += 1;
                window_n += 1;
                tape.backward(loss)?
            };
            let params = model.params_mut();
            params.zero_grad();
            params.accumulate(&grads);
            if let Some(clip) = config.clip_norm {
                let norm = params.grad_norm();
                if norm > clip {
                    params.scale_grads(clip / norm);
                }
            }
            params.sgd_step(lr);
            step += 1;

            if let Some(every) = config.validate_every {
                if step % every == 0 {
                    let f1 = validate(model, step, epoch, &mut early)?;
                    let p = Progress {
                        step,
                        epoch,
                        learning_rate: lr,
                        train_loss: window_loss / window_n.max(1) as f64,
                        validation_f1: f1,
                    };
                    log::info!("{}", p.line());
                    history.push(p);
                    (window_loss, window_n) = (0.0, 0);
                    if early.should_stop(step, config.patience_steps) || reached(f1) {
                        stopped_early = true;
                        epochs = epoch + 1;
                        break 'epochs;
                    }
                }
            }
        }
        epochs = epoch + 1;
        epoch_losses.push(epoch_loss / epoch_n.max(1) as f64);
        if config.validate_every.is_none() {
            let f1 = validate(model, step, epoch, &mut early)?;
            let p = Progress {
                step,
                epoch,
                learning_rate: lr,
                train_loss: window_loss / window_n.max(1) as f64,
                validation_f1: f1,
            };
            log::info!("{}", p.line());
            history.push(p);
            (window_loss, window_n) = (0.0, 0);
            if early.should_stop(step, config.patience_steps) || reached(f1) {
                stopped_early = true;
                break;
            }
        }
    }

    // Step-based validation may not have seen the final parameters.
    if let Some(every) = config.validate_every {
        if !stopped_early && step % every != 0 && step > 0 {
            let f1 = validate(model, step, epochs.saturating_sub(1), &mut early)?;
            let p = Progress {
                step,
                epoch: epochs.saturating_sub(1),
                learning_rate: config.learning_rate_at(epochs.saturating_sub(1)),
                train_loss: window_loss / window_n.max(1) as f64,
                validation_f1: f1,
            };
            log::info!("{}", p.line());
            history.push(p);
        }
    }

    if let Some(best) = &early.snapshot {
        model.params_mut().copy_values_from(best)?;
    }
    Ok(TrainSummary {
        best_f1: early.best_f1,
        best_step: early.best_step,
        best_epoch: early.best_epoch,
        steps: step,
        epochs,
        stopped_early,
        truncated_sentences: truncated,
        epoch_losses,
        history,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
