use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use gec_core::classifier::{self, default_config, save_model, ModelConfig, TrainError};
use gec_core::datagen::TrainingExample;
use gec_core::neural::OptimizerKind;

use crate::io::{create, load_dataset, load_vocab};
use crate::{input_error, OptimizerChoice, TrainArgs};

/// Table defaults for the type, overridden by whatever flags were given.
pub fn config_from_args(
    args: &TrainArgs,
    error_type: gec_core::linguistics::ErrorType,
) -> ModelConfig {
    let mut c = default_config(error_type);
    let default_lr = |choice| match choice {
        OptimizerChoice::Sgd => OptimizerKind::sgd(0.08),
        OptimizerChoice::Adam => OptimizerKind::adam(0.001),
    };
    if let Some(choice) = args.optimizer {
        c.optimizer = default_lr(choice);
    }
    if let Some(lr) = args.learning_rate {
        c.optimizer = match c.optimizer {
            OptimizerKind::Sgd { .. } => OptimizerKind::sgd(lr),
            OptimizerKind::Adam { .. } => OptimizerKind::adam(lr),
        };
    }
    if let Some(h) = args.gru_hidden {
        c.gru_hidden = h;
    }
    if let Some(t) = args.threshold {
        c.threshold = t;
    }
    c.embedding_dim = args.embedding_dim;
    c.mlp_hidden = args.mlp_hidden;
    c.batch_size = args.batch_size;
    c.epochs = args.epochs;
    c.patience = args.patience;
    c.seed = args.seed;
    c.clip_norm = (!args.no_clip).then_some(args.clip_norm);
    c
}

/// Holds out an evenly spread `fraction` of the examples.
pub fn split_validation(
    examples: Vec<TrainingExample>,
    fraction: f64,
) -> (Vec<TrainingExample>, Vec<TrainingExample>) {
    let (mut fit, mut held) = (Vec::new(), Vec::new());
    for (i, ex) in examples.into_iter().enumerate() {
        let before = (i as f64 * fraction).floor();
        let after = ((i + 1) as f64 * fraction).floor();
        if after > before {
            held.push(ex);
        } else {
            fit.push(ex);
        }
    }
    (fit, held)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let vocab = load_vocab(&args.vocab)?;
    let dataset = load_dataset(&args.dataset)?;
    let error_type = args.error_type.unwrap_or(dataset.header.error_type);
    if error_type != dataset.header.error_type {
        return Err(input_error!(
            "--error-type {error_type} but {} holds {} examples",
            args.dataset.display(),
            dataset.header.error_type
        ));
    }
    if dataset.header.vocab_fingerprint != vocab.fingerprint() {
        return Err(input_error!(
            "{} was generated with vocabulary {:016x}, but {} is {:016x}",
            args.dataset.display(),
            dataset.header.vocab_fingerprint,
            args.vocab.display(),
            vocab.fingerprint()
        ));
    }
    if !(0.0..1.0).contains(&args.validation_fraction) {
        return Err(input_error!("--validation-fraction must be in [0, 1)"));
    }
    let config = config_from_args(&args, error_type);
    config.validate().map_err(|e| input_error!("{e}"))?;

    let (fit, validation) = match &args.validation {
        Some(path) => {
            let v = load_dataset(path)?;
            if v.header.error_type != error_type
                || v.header.vocab_fingerprint != vocab.fingerprint()
            {
                return Err(input_error!(
                    "validation set {} does not match the training set's type and vocabulary",
                    path.display()
                ));
            }
            (dataset.examples, v.examples)
        }
        None => split_validation(dataset.examples, args.validation_fraction),
    };
    log::info!(
        "training {error_type} on {} examples, validating on {} ({} vocabulary entries)",
        fit.len(),
        validation.len(),
        vocab.len()
    );
    let outcome = classifier::train(
        &config,
        vocab.len(),
        vocab.fingerprint(),
        &fit,
        &validation,
        args.workers.max(1),
    )
    .map_err(|e| match e {
        TrainError::Diverged { .. } => anyhow::Error::new(e),
        other => input_error!("{other}"),
    })?;

    save_model(&outcome.model, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let metrics_path = args.metrics.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".metrics.jsonl");
        PathBuf::from(p)
    });
    let mut out = create(&metrics_path)?;
    for m in &outcome.metrics {
        serde_json::to_writer(&mut out, m)?;
        writeln!(out)?;
    }
    out.flush()?;

    match outcome.metrics.last() {
        None => println!(
            "{error_type}: 0 epochs, wrote initial parameters to {}",
            args.out.display()
        ),
        Some(last) => {
            let best = outcome
                .best_epoch
                .and_then(|e| outcome.metrics.get(e - 1))
                .unwrap_or(last);
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            println!(
                "{error_type}: {} epochs, kept epoch {}: train loss {:.4}, val loss {}, val accuracy {}",
                outcome.metrics.len(),
                best.epoch,
                best.train_loss,
                fmt(best.val_loss),
                fmt(best.val_accuracy)
            );
        }
    }
    Ok(())
}
