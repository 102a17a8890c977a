//! Per-error-type classifiers: configuration, the split-context model,
//! training, prediction and checkpoints.

mod checkpoint;
mod config;
mod model;
mod pretrained;
mod train;

pub use checkpoint::{
    load_model, read_model, save_model, write_model, CheckpointError, CHECKPOINT_VERSION,
};
pub use config::{default_config, required_variant, ConfigError, ModelConfig, DEFAULT_SEED};
pub use model::{argmax, Model, ModelGrads, EMBEDDING_INIT};
pub use pretrained::{load_pretrained, PretrainedError};
pub use train::{epoch_order, evaluate, train, EpochMetrics, TrainError, TrainOutcome};

use crate::corpus::Vocab;
use crate::datagen::{extract_example, TargetSite};
use crate::linguistics::TaggedSentence;

/// Most probable label for a site and its probability.
pub fn predict(
    model: &Model,
    ts: &TaggedSentence,
    site: &TargetSite,
    vocab: &Vocab,
) -> (usize, f64) {
    argmax(&model.forward(&extract_example(ts, site, vocab)))
}
