//! Self-supervised example generation: every target site in clean text is
//! labeled with the form that actually appears there.

mod dataset;
mod sites;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dataset::{read_dataset, write_dataset, Dataset, DatasetError, DatasetHeader, Provenance};
pub use sites::{find_targets, label_surface, reconstructs, TargetSite};

use crate::corpus::{Vocab, BOS_ID, EOS_ID, UNK_ID};
use crate::linguistics::{ErrorType, MorphLexicon, TaggedParseError, TaggedSentence};

/// Context tokens kept on each side of a site, not counting BOS/EOS.
pub const MAX_CONTEXT: usize = 50;
/// Longer sentences are skipped during generation.
pub const MAX_SENTENCE_LEN: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub error_type: ErrorType,
    /// BOS followed by the tokens left of the site, in reading order.
    pub left_ids: Vec<u32>,
    /// Tokens right of the site in reading order, followed by EOS.
    pub right_ids: Vec<u32>,
    /// Base form id for target-aware types; [`UNK_ID`] otherwise.
    pub target_base_id: u32,
    pub label: usize,
}

/// Builds the classifier input for one site. The target word (or, for
/// article slots, the article) appears in neither context.
pub fn extract_example(ts: &TaggedSentence, site: &TargetSite, vocab: &Vocab) -> TrainingExample {
    let tokens = ts.tokens();
    let (s, e) = site.span();
    let left_from = s.saturating_sub(MAX_CONTEXT);
    let right_to = (e + MAX_CONTEXT).min(tokens.len());

    let mut left_ids = Vec::with_capacity(s - left_from + 1);
    left_ids.push(BOS_ID);
    left_ids.extend(vocab.ids_of_tokens(&tokens[left_from..s]));
    let mut right_ids = vocab.ids_of_tokens(&tokens[e..right_to]);
    right_ids.push(EOS_ID);

    let target_base_id = if site.error_type.uses_target_word() {
        vocab.id(&site.base_form)
    } else {
        UNK_ID
    };
    TrainingExample {
        error_type: site.error_type,
        left_ids,
        right_ids,
        target_base_id,
        label: site.observed_label,
    }
}

/// Majority-class cap applied independently to each shard of
/// `shard_size` sentences, so output does not depend on worker count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancePolicy {
    /// Keep at most `ratio` × (examples of all other classes) of the
    /// majority class; `None` disables balancing.
    pub majority_ratio: Option<f64>,
    pub shard_size: usize,
    pub seed: u64,
}

impl BalancePolicy {
    pub const DEFAULT_SHARD_SIZE: usize = 1000;

    pub fn none() -> Self {
        BalancePolicy {
            majority_ratio: None,
            shard_size: Self::DEFAULT_SHARD_SIZE,
            seed: 0,
        }
    }

    /// 2:1 cap for articles, where no-article slots dominate; no cap
    /// for the other types.
    pub fn default_for(error_type: ErrorType, seed: u64) -> Self {
        BalancePolicy {
            majority_ratio: (error_type == ErrorType::Article).then_some(2.0),
            shard_size: Self::DEFAULT_SHARD_SIZE,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateStats {
    pub sentences: u64,
    pub skipped_long: u64,
    pub skipped_malformed: u64,
    pub sites: u64,
    /// Sites whose observed label does not regenerate the observed text.
    pub dropped_inconsistent: u64,
    pub dropped_by_balance: u64,
    pub class_counts: Vec<u64>,
}

impl GenerateStats {
    fn new(classes: usize) -> Self {
        GenerateStats {
            class_counts: vec![0; classes],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &GenerateStats) {
        self.sentences += other.sentences;
        self.skipped_long += other.skipped_long;
        self.skipped_malformed += other.skipped_malformed;
        self.sites += other.sites;
        self.dropped_inconsistent += other.dropped_inconsistent;
        self.dropped_by_balance += other.dropped_by_balance;
        for (a, b) in self.class_counts.iter_mut().zip(&other.class_counts) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub examples: Vec<TrainingExample>,
    pub stats: GenerateStats,
}

/// Runs site detection and extraction over one sentence, keeping only
/// sites whose label reconstructs the observed text.
pub fn sentence_examples(
    ts: &TaggedSentence,
    error_type: ErrorType,
    vocab: &Vocab,
    lex: &MorphLexicon,
) -> (Vec<TrainingExample>, u64, u64) {
    let sites = find_targets(ts, error_type, lex);
    let total = sites.len() as u64;
    let kept: Vec<TrainingExample> = sites
        .iter()
        .filter(|s| reconstructs(ts, s, lex))
        .map(|s| extract_example(ts, s, vocab))
        .collect();
    let dropped = total - kept.len() as u64;
    (kept, total, dropped)
}

fn process_shard(
    shard_index: usize,
    shard: &[TaggedSentence],
    error_type: ErrorType,
    policy: &BalancePolicy,
    vocab: &Vocab,
    lex: &MorphLexicon,
) -> Generated {
    let mut stats = GenerateStats::new(error_type.class_count());
    let mut examples = Vec::new();
    for ts in shard {
        stats.sentences += 1;
        if ts.len() > MAX_SENTENCE_LEN {
            stats.skipped_long += 1;
            continue;
        }
        let (ex, sites, dropped) = sentence_examples(ts, error_type, vocab, lex);
        stats.sites += sites;
        stats.dropped_inconsistent += dropped;
        examples.extend(ex);
    }
    if let Some(ratio) = policy.majority_ratio {
        examples = balance(
            examples,
            error_type,
            ratio,
            policy.seed,
            shard_index,
            &mut stats,
        );
    }
    for e in &examples {
        stats.class_counts[e.label] += 1;
    }
    Generated { examples, stats }
}

fn balance(
    examples: Vec<TrainingExample>,
    error_type: ErrorType,
    ratio: f64,
    seed: u64,
    shard_index: usize,
    stats: &mut GenerateStats,
) -> Vec<TrainingExample> {
    let mut counts = vec![0usize; error_type.class_count()];
    for e in &examples {
        counts[e.label] += 1;
    }
    // ties go to the lowest label
    let (majority, &n_major) = counts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, &c)| c)
        .expect("at least two classes");
    let others = examples.len() - n_major;
    let cap = ((others as f64) * ratio).floor() as usize;
    if n_major <= cap {
        return examples;
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (shard_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut keep = vec![false; n_major];
    for i in index::sample(&mut rng, n_major, cap) {
        keep[i] = true;
    }
    stats.dropped_by_balance += (n_major - cap) as u64;
    let mut k = 0;
    examples
        .into_iter()
        .filter(|e| {
            if e.label != majority {
                return true;
            }
            k += 1;
            keep[k - 1]
        })
        .collect()
}

/// Turns a stream of tagged sentences into labeled examples for one error
/// type. Malformed sentences are logged and skipped. Output is a pure
/// function of input order and policy; `workers` only affects speed.
pub fn generate<I>(
    sentences: I,
    error_type: ErrorType,
    vocab: &Vocab,
    lex: &MorphLexicon,
    policy: &BalancePolicy,
    workers: usize,
) -> Generated
where
    I: IntoIterator<Item = Result<TaggedSentence, TaggedParseError>>,
{
    let mut malformed = 0;
    let sentences: Vec<TaggedSentence> = sentences
        .into_iter()
        .filter_map(|r| match r {
            Ok(ts) => Some(ts),
            Err(e) => {
                log::warn!("skipping malformed sentence: {e}");
                malformed += 1;
                None
            }
        })
        .collect();
    let shard_size = policy.shard_size.max(1);
    let run = |(i, shard): (usize, &[TaggedSentence])| {
        process_shard(i, shard, error_type, policy, vocab, lex)
    };
    let shards: Vec<Generated> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            sentences
                .par_chunks(shard_size)
                .enumerate()
                .map(run)
                .collect()
        })
    } else {
        sentences.chunks(shard_size).enumerate().map(run).collect()
    };
    let mut stats = GenerateStats::new(error_type.class_count());
    stats.skipped_malformed = malformed;
    let mut examples = Vec::new();
    for g in shards {
        stats.merge(&g.stats);
        examples.extend(g.examples);
    }
    Generated { examples, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, UNK_ID};
    use crate::linguistics::tag;
    use proptest::prelude::*;

    fn tagged(words: &str, tags: &str) -> TaggedSentence {
        TaggedSentence::new(
            words.split_whitespace().map(str::to_string).collect(),
            tags.split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn vocab_for(text: &str) -> Vocab {
        let mut words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        words.sort();
        words.dedup();
        Vocab::from_words(words)
    }

    #[test]
    fn subject_agreement_example() {
        let ts = tagged("she eats an apple everyday .", "PRP VBZ DT NN NN .");
        let vocab = vocab_for("she eats an apple everyday . eat");
        let lex = MorphLexicon::english();
        let site = &find_targets(&ts, ErrorType::SubjAgreement, &lex)[0];
        let ex = extract_example(&ts, site, &vocab);
        let ids = |ws: &str| vocab.ids_of_tokens(&ws.split_whitespace().collect::<Vec<_>>());
        let mut left = vec![BOS_ID];
        left.extend(ids("she"));
        let mut right = ids("an apple everyday .");
        right.push(EOS_ID);
        assert_eq!(ex.left_ids, left);
        assert_eq!(ex.right_ids, right);
        assert_eq!(ex.target_base_id, UNK_ID);
        assert_eq!(ex.label, 1);
    }

    #[test]
    fn target_aware_types_carry_base_id() {
        let ts = tagged("she eats apples", "PRP VBZ NNS");
        let vocab = vocab_for("she eats apple");
        let lex = MorphLexicon::english();
        let site = &find_targets(&ts, ErrorType::NounNumber, &lex)[0];
        let ex = extract_example(&ts, site, &vocab);
        assert_eq!(ex.target_base_id, vocab.id("apple"));
        assert_eq!(ex.right_ids, vec![EOS_ID]);
    }

    #[test]
    fn site_at_start_has_bos_only() {
        let ts = tagged("cars are fast", "NNS VBP JJ");
        let vocab = vocab_for("cars are fast");
        let lex = MorphLexicon::english();
        let site = &find_targets(&ts, ErrorType::NounNumber, &lex)[0];
        assert_eq!(extract_example(&ts, site, &vocab).left_ids, vec![BOS_ID]);
    }

    #[test]
    fn article_excluded_from_context() {
        let ts = tagged("i drive the car", "PRP VBP DT NN");
        let vocab = vocab_for("i drive the car");
        let lex = MorphLexicon::english();
        let site = &find_targets(&ts, ErrorType::Article, &lex)[0];
        let ex = extract_example(&ts, site, &vocab);
        assert_eq!(ex.label, 1);
        assert_eq!(ex.left_ids, vec![BOS_ID, vocab.id("i"), vocab.id("drive")]);
        assert_eq!(ex.right_ids, vec![vocab.id("car"), EOS_ID]);
    }

    #[test]
    fn contexts_are_truncated() {
        let n = 130;
        let words: Vec<String> = (0..n)
            .map(|i| if i == 60 { "cars".into() } else { "x".into() })
            .collect();
        let tags: Vec<_> = (0..n)
            .map(|i| if i == 60 { "NNS" } else { "SYM" })
            .collect();
        let ts = tagged(&words.join(" "), &tags.join(" "));
        let vocab = vocab_for("x cars");
        let lex = MorphLexicon::english();
        let site = &find_targets(&ts, ErrorType::NounNumber, &lex)[0];
        let ex = extract_example(&ts, site, &vocab);
        assert_eq!(ex.left_ids.len(), MAX_CONTEXT + 1);
        assert_eq!(ex.left_ids[0], BOS_ID);
        assert_eq!(ex.right_ids.len(), MAX_CONTEXT + 1);
        assert_eq!(*ex.right_ids.last().unwrap(), EOS_ID);
    }

    #[test]
    fn composition_counts() {
        let lex = MorphLexicon::english();
        let ts = tagged("dog food", "NN NN");
        let vocab = vocab_for("dog food");
        let g = generate(
            [Ok(ts)],
            ErrorType::NounNumber,
            &vocab,
            &lex,
            &BalancePolicy::none(),
            1,
        );
        assert_eq!(g.examples.len(), 2);
        assert!(g.examples.iter().all(|e| e.label == 0));
        let g = generate(
            Vec::new(),
            ErrorType::NounNumber,
            &vocab,
            &lex,
            &BalancePolicy::none(),
            1,
        );
        assert!(g.examples.is_empty());
    }

    #[test]
    fn balance_caps_majority() {
        let lex = MorphLexicon::english();
        let mut corpus = Vec::new();
        for _ in 0..100 {
            corpus.push(tagged("i like cars", "PRP VBP NNS"));
        }
        for _ in 0..10 {
            corpus.push(tagged("i like the car", "PRP VBP DT NN"));
        }
        let vocab = vocab_for("i like cars the car");
        let policy = BalancePolicy::default_for(ErrorType::Article, 3);
        let g = generate(
            corpus.iter().cloned().map(Ok),
            ErrorType::Article,
            &vocab,
            &lex,
            &policy,
            1,
        );
        // brute-force count of emitted labels
        let no_article = g.examples.iter().filter(|e| e.label == 2).count();
        let with_the = g.examples.iter().filter(|e| e.label == 1).count();
        assert_eq!(with_the, 10);
        assert!(no_article <= 20);
        assert_eq!(no_article, 20);
        assert_eq!(g.stats.dropped_by_balance, 80);
        assert_eq!(g.stats.class_counts, vec![0, 10, 20]);
    }

    #[test]
    fn output_independent_of_workers() {
        let lex = MorphLexicon::english();
        let corpus: Vec<TaggedSentence> = (0..300)
            .map(|i| {
                let s = if i % 7 == 0 {
                    "the dog sees a cat ."
                } else {
                    "dogs see cats ."
                };
                tag(&Sentence::from_pretokenized(s), &lex)
            })
            .collect();
        let vocab = vocab_for("the dog sees a cat . dogs see cats");
        let policy = BalancePolicy {
            majority_ratio: Some(2.0),
            shard_size: 16,
            seed: 9,
        };
        let a = generate(
            corpus.iter().cloned().map(Ok),
            ErrorType::Article,
            &vocab,
            &lex,
            &policy,
            1,
        );
        let b = generate(
            corpus.iter().cloned().map(Ok),
            ErrorType::Article,
            &vocab,
            &lex,
            &policy,
            4,
        );
        assert_eq!(a.examples, b.examples);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn long_sentences_skipped() {
        let lex = MorphLexicon::english();
        let words = vec!["cars"; MAX_SENTENCE_LEN + 1].join(" ");
        let tags = vec!["NNS"; MAX_SENTENCE_LEN + 1].join(" ");
        let vocab = vocab_for("cars");
        let g = generate(
            [Ok(tagged(&words, &tags))],
            ErrorType::NounNumber,
            &vocab,
            &lex,
            &BalancePolicy::none(),
            1,
        );
        assert!(g.examples.is_empty());
        assert_eq!(g.stats.skipped_long, 1);
    }

    proptest! {
        #[test]
        fn target_token_not_in_context(words in proptest::collection::vec(
            prop_oneof![Just("dogs"), Just("dog"), Just("runs"), Just("run"), Just("the"), Just("in"), Just("big")],
            1..12,
        )) {
            let lex = MorphLexicon::english();
            let sentence = Sentence::from_tokens(words.iter().enumerate().map(|(i, w)| format!("{w}{i}")));
            // indexed tokens make every position distinct
            let ts = TaggedSentence::new(
                sentence.tokens().to_vec(),
                tag(&Sentence::from_tokens(&words), &lex).tags().to_vec(),
            ).unwrap();
            let vocab = Vocab::from_words(sentence.tokens().to_vec());
            for t in [ErrorType::NounNumber, ErrorType::VerbForm, ErrorType::SubjAgreement, ErrorType::Preposition] {
                for site in find_targets(&ts, t, &lex) {
                    let ex = extract_example(&ts, &site, &vocab);
                    let target = vocab.id(&ts.tokens()[site.position]);
                    prop_assert!(!ex.left_ids.contains(&target));
                    prop_assert!(!ex.right_ids.contains(&target));
                    prop_assert_eq!(ex.left_ids.len() + ex.right_ids.len(), ts.len() + 1);
                }
            }
        }
    }
}
