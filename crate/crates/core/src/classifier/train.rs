use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, ModelConfig};
use super::model::{argmax, Model, ModelGrads};
use crate::datagen::TrainingExample;
use crate::neural::{cross_entropy, Optimizer};

/// Examples per gradient work unit. Fixed so the summation order, and
/// hence the result, does not depend on the worker count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub metrics: Vec<EpochMetrics>,
    /// Epoch whose parameters were returned; `None` when no epoch ran or
    /// there was no validation data (the last parameters are returned).
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("example {index}: {message}")]
    BadExample { index: usize, message: String },
    #[error("training diverged at epoch {epoch}, batch {batch}: {detail}")]
    Diverged {
        epoch: usize,
        batch: usize,
        detail: String,
    },
}

fn check_examples(
    config: &ModelConfig,
    vocab_size: usize,
    examples: &[TrainingExample],
) -> Result<(), TrainError> {
    for (index, ex) in examples.iter().enumerate() {
        let bad = |message: String| Err(TrainError::BadExample { index, message });
        if ex.error_type != config.error_type {
            return bad(format!(
                "error type {} but model is {}",
                ex.error_type, config.error_type
            ));
        }
        if ex.label >= config.classes() {
            return bad(format!(
                "label {} out of range for {} classes",
                ex.label,
                config.classes()
            ));
        }
        if ex.left_ids.is_empty() || ex.right_ids.is_empty() {
            return bad("empty context".into());
        }
        let max_id = ex
            .left_ids
            .iter()
            .chain(&ex.right_ids)
            .chain([&ex.target_base_id])
            .max()
            .copied()
            .unwrap_or(0);
        if max_id as usize >= vocab_size {
            return bad(format!(
                "token id {max_id} outside vocabulary of {vocab_size}"
            ));
        }
    }
    Ok(())
}

/// Epoch shuffle as a pure function of seed and epoch.
pub fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (epoch as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    order.shuffle(&mut rng);
    order
}

struct ChunkResult {
    grads: ModelGrads,
    loss: f64,
    correct: usize,
}

fn chunk_gradients(model: &Model, chunk: &[&TrainingExample], scale: f64) -> ChunkResult {
    let mut grads = ModelGrads::zeros_like(model);
    let mut loss = 0.0;
    let mut correct = 0;
    for ex in chunk {
        let cache = model.forward_cached(ex);
        if argmax(cache.probs()).0 == ex.label {
            correct += 1;
        }
        loss += model.backward(ex, &cache, scale, &mut grads);
    }
    ChunkResult {
        grads,
        loss,
        correct,
    }
}

/// Mean loss and accuracy of `model` on `examples`.
pub fn evaluate(model: &Model, examples: &[TrainingExample]) -> (f64, f64) {
    if examples.is_empty() {
        return (0.0, 0.0);
    }
    let (loss, correct) = examples
        .par_iter()
        .map(|ex| {
            let probs = model.forward(ex);
            (
                cross_entropy(&probs, ex.label).loss,
                usize::from(argmax(&probs).0 == ex.label),
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0), |(l, c), (dl, dc)| (l + dl, c + dc));
    let n = examples.len() as f64;
    (loss / n, correct as f64 / n)
}

/// Trains a fresh model on `train`, selecting the parameters with the
/// lowest loss on `validation`. `patience` 0 disables early stopping.
pub fn train(
    config: &ModelConfig,
    vocab_size: usize,
    vocab_fingerprint: u64,
    train: &[TrainingExample],
    validation: &[TrainingExample],
    workers: usize,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    check_examples(config, vocab_size, train)?;
    check_examples(config, vocab_size, validation)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");

    let mut model = Model::new(config.clone(), vocab_size, vocab_fingerprint)?;
    let mut optimizer = Optimizer::new(config.optimizer).with_clip_norm(config.clip_norm);
    let mut metrics = Vec::new();
    let mut best: Option<(f64, usize, Model)> = None;
    let mut stale = 0;

    for epoch in 1..=config.epochs {
        let order = epoch_order(train.len(), config.seed, epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let examples: Vec<&TrainingExample> = batch.iter().map(|&i| &train[i]).collect();
            let scale = 1.0 / examples.len() as f64;
            let chunks: Vec<ChunkResult> = if workers > 1 {
                pool.install(|| {
                    examples
                        .par_chunks(GRAD_CHUNK)
                        .map(|c| chunk_gradients(&model, c, scale))
                        .collect()
                })
            } else {
                examples
                    .chunks(GRAD_CHUNK)
                    .map(|c| chunk_gradients(&model, c, scale))
                    .collect()
            };
            let mut iter = chunks.into_iter();
            let mut acc = iter.next().expect("non-empty batch");
            for c in iter {
                acc.grads.merge(&c.grads);
                acc.loss += c.loss;
                acc.correct += c.correct;
            }
            if !acc.loss.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    batch: b,
                    detail: format!("non-finite loss {}", acc.loss),
                });
            }
            loss_sum += acc.loss;
            correct += acc.correct;
            let grads = acc.grads.as_grads();
            optimizer
                .step(&mut model.tensors_mut(), &grads)
                .map_err(|e| TrainError::Diverged {
                    epoch,
                    batch: b,
                    detail: e.to_string(),
                })?;
        }
        let n = train.len() as f64;
        let (val_loss, val_accuracy) = if validation.is_empty() {
            (None, None)
        } else {
            let (l, a) = pool.install(|| evaluate(&model, validation));
            (Some(l), Some(a))
        };
        let m = EpochMetrics {
            epoch,
            train_loss: loss_sum / n,
            train_accuracy: correct as f64 / n,
            val_loss,
            val_accuracy,
        };
        log::info!(
            "epoch {epoch}: train loss {:.4} acc {:.4}{}",
            m.train_loss,
            m.train_accuracy,
            match (val_loss, val_accuracy) {
                (Some(l), Some(a)) => format!(", val loss {l:.4} acc {a:.4}"),
                _ => String::new(),
            }
        );
        metrics.push(m);
        if let Some(vl) = val_loss {
            if !vl.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    batch: 0,
                    detail: format!("non-finite validation loss {vl}"),
                });
            }
            if best.as_ref().is_none_or(|(b, _, _)| vl < *b) {
                best = Some((vl, epoch, model.clone()));
                stale = 0;
            } else {
                stale += 1;
                if config.patience > 0 && stale >= config.patience {
                    log::info!("stopping early after {epoch} epochs");
                    break;
                }
            }
        }
    }
    Ok(match best {
        Some((_, epoch, model)) => TrainOutcome {
            model,
            metrics,
            best_epoch: Some(epoch),
        },
        None => TrainOutcome {
            model,
            metrics,
            best_epoch: None,
        },
    })
}
