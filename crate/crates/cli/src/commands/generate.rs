use std::io::Write;

use anyhow::{Context, Result};
use gec_core::corpus::read_corpus;
use gec_core::datagen::{self, write_dataset, BalancePolicy, Dataset, Provenance};
use gec_core::linguistics::{
    parse_tagged, tag, ErrorType, MorphLexicon, TaggedParseError, TaggedSentence,
};

use crate::io::{create, load_vocab, open};
use crate::{input_error, GenerateArgs};

/// One line per class: index, name, count, share.
pub fn print_histogram(error_type: ErrorType, counts: &[u64]) {
    let total: u64 = counts.iter().sum();
    for (label, &n) in counts.iter().enumerate() {
        let share = if total == 0 {
            0.0
        } else {
            100.0 * n as f64 / total as f64
        };
        println!(
            "  {label} {:<11} {n:>9} ({share:5.1}%)",
            error_type.label_name(label).unwrap_or("?")
        );
    }
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let vocab = load_vocab(&args.vocab)?;
    let lex = MorphLexicon::english();
    if let Some(r) = args.majority_ratio {
        if !(r.is_finite() && r > 0.0) {
            return Err(input_error!("--majority-ratio must be positive, got {r}"));
        }
    }
    if args.shard_size == 0 {
        return Err(input_error!("--shard-size must be at least 1"));
    }
    let mut policy = BalancePolicy::default_for(args.error_type, args.seed);
    policy.shard_size = args.shard_size;
    if args.no_balance {
        policy.majority_ratio = None;
    } else if args.majority_ratio.is_some() {
        policy.majority_ratio = args.majority_ratio;
    }

    let mut sentences: Vec<Result<TaggedSentence, TaggedParseError>> = Vec::new();
    for path in &args.corpus {
        let input = open(path)?;
        if args.tagged {
            for item in parse_tagged(input) {
                if let Err(TaggedParseError::Io(e)) = &item {
                    return Err(input_error!("{}: {e}", path.display()));
                }
                sentences.push(item);
            }
        } else {
            let corpus = read_corpus(input).map_err(|e| input_error!("{}: {e}", path.display()))?;
            sentences.extend(corpus.iter().map(|s| Ok(tag(s, &lex))));
        }
    }
    if sentences.is_empty() {
        log::warn!("corpus is empty; writing an empty dataset");
    }

    let generated = datagen::generate(
        sentences,
        args.error_type,
        &vocab,
        &lex,
        &policy,
        args.workers.max(1),
    );
    let stats = &generated.stats;
    let provenance = if args.tagged {
        Provenance::ExternalTags
    } else {
        Provenance::BuiltinTagger
    };
    let dataset = Dataset::new(
        args.error_type,
        provenance,
        vocab.fingerprint(),
        generated.examples,
    );
    let mut out = create(&args.out)?;
    write_dataset(&mut out, &dataset)?;
    out.flush()
        .with_context(|| format!("writing {}", args.out.display()))?;

    println!(
        "{}: {} sentences ({} too long, {} malformed), {} sites, {} inconsistent, {} removed by balancing",
        args.error_type,
        stats.sentences,
        stats.skipped_long,
        stats.skipped_malformed,
        stats.sites,
        stats.dropped_inconsistent,
        stats.dropped_by_balance
    );
    println!("{} examples:", dataset.examples.len());
    print_histogram(args.error_type, &dataset.header.class_counts);
    Ok(())
}
