mod correct;
mod demo;
mod evaluate;
mod generate;
mod train;

use std::io::Write;

use anyhow::{Context, Result};
use gec_core::corpus::{read_corpus, TokenCounts, Vocab};

use crate::io::{create, open};
use crate::BuildVocabArgs;

pub use correct::correct;
pub use demo::demo;
pub use evaluate::evaluate;
pub use generate::generate;
pub use train::train;

pub fn build_vocab(args: BuildVocabArgs) -> Result<()> {
    if args.capacity == 0 {
        return Err(crate::input_error!("--capacity must be at least 1"));
    }
    let mut counts = TokenCounts::new();
    let mut sentences = 0;
    for path in &args.corpus {
        let corpus =
            read_corpus(open(path)?).map_err(|e| crate::input_error!("{}: {e}", path.display()))?;
        sentences += corpus.len();
        for s in &corpus {
            counts.add_sentence(s);
        }
    }
    let vocab = Vocab::from_counts(&counts, args.capacity);
    let mut out = create(&args.out)?;
    vocab.write(&mut out)?;
    out.flush()
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{sentences} sentences, {} distinct tokens, capacity {}, kept {} entries (fingerprint {:016x})",
        counts.distinct(),
        args.capacity,
        vocab.len(),
        vocab.fingerprint()
    );
    Ok(())
}
