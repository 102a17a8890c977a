use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linguistics::ErrorType;
use crate::neural::{AttentionVariant, OptimizerKind, DEFAULT_CLIP_NORM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub error_type: ErrorType,
    pub attention: AttentionVariant,
    pub optimizer: OptimizerKind,
    pub gru_hidden: usize,
    pub embedding_dim: usize,
    pub mlp_hidden: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping early.
    pub patience: usize,
    pub seed: u64,
    /// Minimum predicted-class probability for the pipeline to edit.
    pub threshold: f64,
    pub clip_norm: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 20_170_731;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{error_type} requires {expected:?} attention, got {found:?}")]
    Variant {
        error_type: ErrorType,
        expected: AttentionVariant,
        found: AttentionVariant,
    },
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("threshold {0} outside [0, 1]")]
    Threshold(f64),
    #[error("learning rate {0} must be positive and finite")]
    LearningRate(f64),
}

/// Attention variant an error type must use.
pub fn required_variant(error_type: ErrorType) -> AttentionVariant {
    if error_type.uses_target_word() {
        AttentionVariant::TargetAware
    } else {
        AttentionVariant::ContextOnly
    }
}

/// Per-type defaults: SGD 0.08 for article, preposition and agreement,
/// Adam 0.001 for verb form and noun number; GRU 128 for article and
/// preposition, 256 otherwise; threshold 0.85 for preposition, 0.9
/// otherwise; embedding 300 and MLP 512 everywhere.
pub fn default_config(error_type: ErrorType) -> ModelConfig {
    let (optimizer, gru_hidden, threshold) = match error_type {
        ErrorType::Article => (OptimizerKind::sgd(0.08), 128, 0.9),
        ErrorType::Preposition => (OptimizerKind::sgd(0.08), 128, 0.85),
        ErrorType::VerbForm => (OptimizerKind::adam(0.001), 256, 0.9),
        ErrorType::NounNumber => (OptimizerKind::adam(0.001), 256, 0.9),
        ErrorType::SubjAgreement => (OptimizerKind::sgd(0.08), 256, 0.9),
    };
    ModelConfig {
        error_type,
        attention: required_variant(error_type),
        optimizer,
        gru_hidden,
        embedding_dim: 300,
        mlp_hidden: 512,
        batch_size: 32,
        epochs: 20,
        patience: 3,
        seed: DEFAULT_SEED,
        threshold,
        clip_norm: Some(DEFAULT_CLIP_NORM),
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let expected = required_variant(self.error_type);
        if self.attention != expected {
            return Err(ConfigError::Variant {
                error_type: self.error_type,
                expected,
                found: self.attention,
            });
        }
        for (name, v) in [
            ("gru_hidden", self.gru_hidden),
            ("embedding_dim", self.embedding_dim),
            ("mlp_hidden", self.mlp_hidden),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        let lr = self.optimizer.learning_rate();
        if !(lr.is_finite() && lr > 0.0) {
            return Err(ConfigError::LearningRate(lr));
        }
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.error_type.class_count()
    }

    /// Width of one side's attention state.
    pub fn state_size(&self) -> usize {
        match self.attention {
            AttentionVariant::ContextOnly => 2 * self.gru_hidden,
            AttentionVariant::TargetAware => 2 * self.gru_hidden + self.embedding_dim,
        }
    }
}
