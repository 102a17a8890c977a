use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use gec_core::classifier::{default_config, save_model, train, ModelConfig};
use gec_core::corpus::{build_vocab, Vocab, DEFAULT_CAPACITY};
use gec_core::datagen::{self, write_dataset, BalancePolicy, Dataset, Provenance};
use gec_core::eval::score;
use gec_core::linguistics::{tag, ErrorType, MorphLexicon, TaggedSentence};
use gec_core::neural::OptimizerKind;
use gec_core::pipeline::{write_edits, Corrector, Edit, ModelPredictor};
use gec_core::toy;

use super::evaluate::format_scores;
use super::generate::print_histogram;
use super::train::split_validation;
use crate::io::create;
use crate::DemoArgs;

const TYPES: [ErrorType; 2] = [ErrorType::SubjAgreement, ErrorType::NounNumber];

/// Table defaults shrunk to toy size.
fn toy_config(error_type: ErrorType, epochs: usize, seed: u64) -> ModelConfig {
    let mut c = default_config(error_type);
    c.embedding_dim = 32;
    c.gru_hidden = 32;
    c.mlp_hidden = 64;
    c.epochs = epochs;
    c.seed = seed;
    if let OptimizerKind::Adam { .. } = c.optimizer {
        c.optimizer = OptimizerKind::adam(0.005);
    }
    c
}

fn write_lines<'a, I: IntoIterator<Item = &'a gec_core::corpus::Sentence>>(
    path: &Path,
    lines: I,
) -> Result<()> {
    let mut out = create(path)?;
    for s in lines {
        writeln!(out, "{s}")?;
    }
    out.flush()?;
    Ok(())
}

fn write_gold(path: &Path, items: &[toy::Corrupted]) -> Result<()> {
    let mut out = create(path)?;
    for c in items {
        writeln!(out, "S {}", c.corrupted)?;
        let g = &c.gold;
        let kind = g.error_type.map_or("-", ErrorType::name);
        writeln!(
            out,
            "A {} {}|||{kind}|||{}",
            g.start,
            g.end,
            g.replacement.join(" ")
        )?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn demo(args: DemoArgs) -> Result<()> {
    let lex = MorphLexicon::english();
    let workers = args.workers.max(1);
    let training = toy::corpus(args.sentences, args.seed);
    let held_out = toy::corpus(args.held_out, args.seed.wrapping_add(1));
    let vocab: Vocab = build_vocab(training.iter().map(|t| &t.sentence), DEFAULT_CAPACITY);
    let tagged: Vec<TaggedSentence> = training.iter().map(|t| tag(&t.sentence, &lex)).collect();
    println!(
        "toy corpus: {} training sentences, {} held out, vocabulary of {}",
        training.len(),
        held_out.len(),
        vocab.len()
    );
    let dir = args.out_dir.as_deref();
    if let Some(d) = dir {
        write_lines(&d.join("corpus.txt"), training.iter().map(|t| &t.sentence))?;
        let mut out = create(&d.join("vocab.txt"))?;
        vocab.write(&mut out)?;
    }

    let mut corrector = Corrector::new(&lex);
    for t in TYPES {
        let generated = datagen::generate(
            tagged.iter().cloned().map(Ok),
            t,
            &vocab,
            &lex,
            &BalancePolicy::default_for(t, args.seed),
            workers,
        );
        let dataset = Dataset::new(
            t,
            Provenance::BuiltinTagger,
            vocab.fingerprint(),
            generated.examples,
        );
        println!("{t}: {} examples", dataset.examples.len());
        print_histogram(t, &dataset.header.class_counts);
        if let Some(d) = dir {
            let mut out = create(&d.join(format!("{t}.gecd")))?;
            write_dataset(&mut out, &dataset)?;
            out.flush()?;
        }
        let config = toy_config(t, args.epochs, args.seed);
        let (fit, validation) = split_validation(dataset.examples, 0.1);
        let outcome = train(
            &config,
            vocab.len(),
            vocab.fingerprint(),
            &fit,
            &validation,
            workers,
        )
        .with_context(|| format!("training {t}"))?;
        if let Some(m) = outcome.best_epoch.and_then(|e| outcome.metrics.get(e - 1)) {
            println!(
                "{t}: kept epoch {} of {}, val loss {:.4}, val accuracy {:.4}",
                m.epoch,
                outcome.metrics.len(),
                m.val_loss.unwrap_or(f64::NAN),
                m.val_accuracy.unwrap_or(f64::NAN)
            );
        }
        if let Some(d) = dir {
            save_model(&outcome.model, &d.join(format!("{t}.gecm")))?;
        }
        let threshold = config.threshold;
        corrector = corrector.with_pass(
            t,
            Box::new(ModelPredictor {
                model: outcome.model,
                vocab: &vocab,
            }),
            threshold,
        );
    }

    let corrupted: Vec<toy::Corrupted> = held_out
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let kind = TYPES[i % 2];
            toy::corrupt(s, kind, &lex).or_else(|| toy::corrupt(s, ErrorType::NounNumber, &lex))
        })
        .collect();
    let results: Vec<_> = corrupted
        .iter()
        .map(|c| corrector.correct(&c.corrupted))
        .collect();
    let system: Vec<Vec<Edit>> = results.iter().map(|r| r.edits.clone()).collect();
    let gold: Vec<Vec<Edit>> = corrupted.iter().map(|c| vec![c.gold.clone()]).collect();
    let report = score(&system, &gold)?;
    let restored = results
        .iter()
        .zip(&corrupted)
        .filter(|(r, c)| r.corrected == c.clean)
        .count();
    println!(
        "corrected {restored} of {} corrupted held-out sentences exactly",
        corrupted.len()
    );
    println!("{}", format_scores("overall", &report.overall));
    for (t, s) in &report.per_type {
        println!("{}", format_scores(t.name(), s));
    }
    for (r, _) in results
        .iter()
        .zip(&corrupted)
        .filter(|(r, _)| !r.edits.is_empty())
        .take(3)
    {
        println!("- {}\n+ {}", r.original, r.corrected);
    }

    if let Some(d) = dir {
        write_lines(
            &d.join("corrupted.txt"),
            corrupted.iter().map(|c| &c.corrupted),
        )?;
        write_lines(
            &d.join("corrected.txt"),
            results.iter().map(|r| &r.corrected),
        )?;
        write_gold(&d.join("gold.m2"), &corrupted)?;
        let mut out = create(&d.join("edits.tsv"))?;
        for (i, r) in results.iter().enumerate() {
            write_edits(&mut out, i, &r.edits)?;
        }
        out.flush()?;
        println!("files written to {}", d.display());
    }
    Ok(())
}
