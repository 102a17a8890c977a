use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use gec_core::classifier::load_model;
use gec_core::corpus::{read_corpus, Sentence};
use gec_core::linguistics::{parse_tagged, ErrorType, MorphLexicon, TaggedParseError};
use gec_core::pipeline::{write_edits, Corrector, ModelPredictor, StreamItem};

use crate::io::{create, load_vocab, open, output};
use crate::{input_error, CorrectArgs};

fn checkpoint_paths(args: &CorrectArgs) -> Result<Vec<(ErrorType, PathBuf)>> {
    let types: Vec<ErrorType> = if args.types.is_empty() {
        ErrorType::ALL.to_vec()
    } else {
        args.types.clone()
    };
    let explicit: BTreeMap<ErrorType, PathBuf> = args.models.iter().cloned().collect();
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for t in types {
        let path = explicit
            .get(&t)
            .cloned()
            .or_else(|| args.model_dir.as_ref().map(|d| d.join(format!("{t}.gecm"))));
        match path {
            Some(p) if p.is_file() => out.push((t, p)),
            Some(p) => missing.push(format!("{t} ({})", p.display())),
            None => missing.push(t.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(input_error!(
            "missing checkpoint for {}; pass --model TYPE=PATH or --model-dir, or restrict with --types",
            missing.join(", ")
        ));
    }
    out.dedup_by_key(|(t, _)| *t);
    Ok(out)
}

pub fn correct(args: CorrectArgs) -> Result<()> {
    let vocab = load_vocab(&args.vocab)?;
    let lex = MorphLexicon::english();
    let overrides: BTreeMap<ErrorType, f64> = args.thresholds.iter().copied().collect();

    let mut corrector = Corrector::new(&lex);
    for (t, path) in checkpoint_paths(&args)? {
        let model = load_model(&path, Some(vocab.fingerprint()), !args.allow_vocab_mismatch)
            .map_err(|e| input_error!("checkpoint {}: {e}", path.display()))?;
        if model.config.error_type != t {
            return Err(input_error!(
                "{} holds a {} model, expected {t}",
                path.display(),
                model.config.error_type
            ));
        }
        let threshold = overrides.get(&t).copied().unwrap_or(model.config.threshold);
        log::info!("{t}: {} (threshold {threshold})", path.display());
        corrector = corrector.with_pass(
            t,
            Box::new(ModelPredictor {
                model,
                vocab: &vocab,
            }),
            threshold,
        );
    }
    for t in overrides.keys() {
        if !corrector.error_types().contains(t) {
            log::warn!("--threshold given for {t}, which is not being run");
        }
    }

    let input = open(&args.input)?;
    let items: Vec<StreamItem> = if args.tagged {
        let mut items = Vec::new();
        for item in parse_tagged(input) {
            items.push(match item {
                Ok(ts) => StreamItem::Tagged(ts),
                Err(TaggedParseError::Io(e)) => {
                    return Err(input_error!("{}: {e}", args.input.display()))
                }
                Err(e) => StreamItem::Invalid {
                    raw: Sentence::from_tokens(Vec::<String>::new()),
                    reason: e.to_string(),
                },
            });
        }
        items
    } else {
        read_corpus(input)
            .map_err(|e| input_error!("{}: {e}", args.input.display()))?
            .into_iter()
            .map(StreamItem::Plain)
            .collect()
    };

    let results = corrector.correct_stream(items, args.workers.max(1));
    let mut text = if args.diff && args.out.is_none() {
        None
    } else {
        Some(output(args.out.as_deref())?)
    };
    let mut edits_out = args.edits_out.as_deref().map(create).transpose()?;
    let mut changed = 0;
    let mut edit_count = 0;
    let stdout = std::io::stdout();
    for (i, r) in results.iter().enumerate() {
        if let Some(d) = &r.diagnostic {
            log::warn!("sentence {}: {d}", i + 1);
        }
        let res = &r.result;
        if let Some(out) = text.as_mut() {
            writeln!(out, "{}", res.corrected)?;
        }
        if let Some(out) = edits_out.as_mut() {
            write_edits(out, i, &res.edits)?;
        }
        if !res.edits.is_empty() {
            changed += 1;
            edit_count += res.edits.len();
            if args.diff {
                let mut lock = stdout.lock();
                writeln!(lock, "- {}", res.original)?;
                writeln!(lock, "+ {}", res.corrected)?;
            }
        }
    }
    if let Some(mut out) = text {
        out.flush()?;
    }
    if let Some(mut out) = edits_out {
        out.flush()?;
    }
    log::info!(
        "{} sentences, {changed} changed, {edit_count} edits",
        results.len()
    );
    Ok(())
}
