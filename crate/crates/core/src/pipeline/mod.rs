//! Sentence correction: the five classifiers applied one error type at a
//! time, editing only where the model is confident the text is wrong.

mod edits;

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

pub use edits::{
    apply_edits, check_edits, read_edits, write_edits, Edit, EditError, EditsFileError,
};

use crate::classifier::{predict, Model};
use crate::corpus::{Sentence, Vocab};
use crate::datagen::{find_targets, label_surface, reconstructs, TargetSite};
use crate::linguistics::{tag, ErrorType, MorphLexicon, TaggedSentence};

/// Source of per-site predictions: a trained model, or a stand-in in tests.
pub trait SitePredictor: Send + Sync {
    /// Predicted label and its probability, or `None` to skip the site.
    fn predict(&self, ts: &TaggedSentence, site: &TargetSite) -> Option<(usize, f64)>;
}

pub struct ModelPredictor<'a> {
    pub model: Model,
    pub vocab: &'a Vocab,
}

impl SitePredictor for ModelPredictor<'_> {
    fn predict(&self, ts: &TaggedSentence, site: &TargetSite) -> Option<(usize, f64)> {
        if site.error_type != self.model.config.error_type {
            log::warn!(
                "{} model asked about a {} site",
                self.model.config.error_type,
                site.error_type
            );
            return None;
        }
        Some(predict(&self.model, ts, site, self.vocab))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub original: Sentence,
    pub corrected: Sentence,
    /// Edits in original coordinates, sorted by span.
    pub edits: Vec<Edit>,
}

impl CorrectionResult {
    pub fn unchanged(sentence: Sentence) -> Self {
        CorrectionResult {
            corrected: sentence.clone(),
            original: sentence,
            edits: Vec::new(),
        }
    }
}

struct Pass<'a> {
    error_type: ErrorType,
    predictor: Box<dyn SitePredictor + 'a>,
    threshold: f64,
}

/// Working token with its provenance in the original sentence.
#[derive(Debug, Clone)]
struct WorkToken {
    text: String,
    origin: Option<usize>,
    changed_by: Option<(ErrorType, f64)>,
}

pub struct Corrector<'a> {
    lexicon: &'a MorphLexicon,
    passes: Vec<Pass<'a>>,
}

impl<'a> Corrector<'a> {
    pub fn new(lexicon: &'a MorphLexicon) -> Self {
        Corrector {
            lexicon,
            passes: Vec::new(),
        }
    }

    /// Adds (or replaces) the pass for `error_type`. Passes always run in
    /// [`ErrorType::CORRECTION_ORDER`]; an edit requires probability
    /// strictly above `threshold`.
    pub fn with_pass(
        mut self,
        error_type: ErrorType,
        predictor: Box<dyn SitePredictor + 'a>,
        threshold: f64,
    ) -> Self {
        self.passes.retain(|p| p.error_type != error_type);
        self.passes.push(Pass {
            error_type,
            predictor,
            threshold,
        });
        self.passes.sort_by_key(|p| {
            ErrorType::CORRECTION_ORDER
                .iter()
                .position(|&t| t == p.error_type)
        });
        self
    }

    pub fn error_types(&self) -> Vec<ErrorType> {
        self.passes.iter().map(|p| p.error_type).collect()
    }

    pub fn set_threshold(&mut self, error_type: ErrorType, threshold: f64) {
        for p in &mut self.passes {
            if p.error_type == error_type {
                p.threshold = threshold;
            }
        }
    }

    pub fn correct(&self, sentence: &Sentence) -> CorrectionResult {
        self.correct_tagged(&tag(sentence, self.lexicon))
    }

    /// Corrects a sentence whose tags are supplied. The supplied tags are
    /// used until an edit changes the text; later passes re-tag.
    pub fn correct_tagged(&self, tagged: &TaggedSentence) -> CorrectionResult {
        let original = tagged.sentence();
        let mut work: Vec<WorkToken> = tagged
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| WorkToken {
                text: t.clone(),
                origin: Some(i),
                changed_by: None,
            })
            .collect();
        let mut deleted: Vec<(usize, ErrorType, f64)> = Vec::new();
        let mut ts = tagged.clone();
        for pass in &self.passes {
            let planned = self.plan_pass(pass, &ts);
            if planned.is_empty() {
                continue;
            }
            // right to left keeps earlier spans valid
            for (start, end, replacement, prob) in planned.into_iter().rev() {
                let info = Some((pass.error_type, prob));
                match (end - start, replacement) {
                    (1, Some(text)) => {
                        work[start].text = text;
                        work[start].changed_by = info;
                    }
                    (1, None) => {
                        let gone = work.remove(start);
                        if let Some(o) = gone.origin {
                            deleted.push((o, pass.error_type, prob));
                        }
                    }
                    (0, Some(text)) => work.insert(
                        start,
                        WorkToken {
                            text,
                            origin: None,
                            changed_by: info,
                        },
                    ),
                    _ => {}
                }
            }
            let sentence = Sentence::from_tokens(work.iter().map(|w| w.text.clone()));
            ts = tag(&sentence, self.lexicon);
        }
        let corrected = Sentence::from_tokens(work.iter().map(|w| w.text.clone()));
        let edits = derive_edits(&original, &work, &deleted);
        CorrectionResult {
            original,
            corrected,
            edits,
        }
    }

    /// Predicts every site of one pass against the same sentence; returns
    /// (start, end, new token or None for deletion, probability) in span
    /// order.
    fn plan_pass(
        &self,
        pass: &Pass<'_>,
        ts: &TaggedSentence,
    ) -> Vec<(usize, usize, Option<String>, f64)> {
        let mut planned = Vec::new();
        for site in find_targets(ts, pass.error_type, self.lexicon) {
            if !reconstructs(ts, &site, self.lexicon) {
                continue;
            }
            let Some((label, prob)) = pass.predictor.predict(ts, &site) else {
                continue;
            };
            if label == site.observed_label
                || prob.partial_cmp(&pass.threshold) != Some(std::cmp::Ordering::Greater)
            {
                continue;
            }
            let Some(surface) = label_surface(ts, &site, label, self.lexicon) else {
                log::debug!(
                    "skipping {} site at {}: not inflectable",
                    site.error_type,
                    site.position
                );
                continue;
            };
            let (start, end) = site.span();
            if surface.as_slice() == &ts.tokens()[start..end] {
                continue;
            }
            planned.push((start, end, surface.into_iter().next(), prob));
        }
        planned
    }

    /// Corrects a stream of sentences; output order matches input order.
    /// A sentence that cannot be processed passes through unchanged with a
    /// diagnostic.
    pub fn correct_stream<I>(&self, items: I, workers: usize) -> Vec<StreamResult>
    where
        I: IntoIterator<Item = StreamItem>,
    {
        let items: Vec<StreamItem> = items.into_iter().collect();
        let run = |item: &StreamItem| self.correct_item(item);
        if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool");
            pool.install(|| items.par_iter().map(run).collect())
        } else {
            items.iter().map(run).collect()
        }
    }

    fn correct_item(&self, item: &StreamItem) -> StreamResult {
        let (fallback, outcome) = match item {
            StreamItem::Invalid { raw, reason } => {
                return StreamResult {
                    result: CorrectionResult::unchanged(raw.clone()),
                    diagnostic: Some(reason.clone()),
                }
            }
            StreamItem::Plain(s) => (
                s.clone(),
                catch_unwind(AssertUnwindSafe(|| self.correct(s))),
            ),
            StreamItem::Tagged(ts) => (
                ts.sentence(),
                catch_unwind(AssertUnwindSafe(|| self.correct_tagged(ts))),
            ),
        };
        match outcome {
            Ok(result) => StreamResult {
                result,
                diagnostic: None,
            },
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "unknown failure".into());
                StreamResult {
                    result: CorrectionResult::unchanged(fallback),
                    diagnostic: Some(format!("correction failed: {msg}")),
                }
            }
        }
    }
}

/// One input unit for [`Corrector::correct_stream`].
#[derive(Debug, Clone)]
pub enum StreamItem {
    Plain(Sentence),
    Tagged(TaggedSentence),
    /// Input that could not be parsed; passed through as `raw`.
    Invalid {
        raw: Sentence,
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct StreamResult {
    pub result: CorrectionResult,
    pub diagnostic: Option<String>,
}

/// Edits that turn `original` into the working tokens, one per changed
/// original token plus one per run of inserted tokens.
fn derive_edits(
    original: &Sentence,
    work: &[WorkToken],
    deleted: &[(usize, ErrorType, f64)],
) -> Vec<Edit> {
    let mut edits = Vec::new();
    let typed = |e: Edit, info: Option<(ErrorType, f64)>| match info {
        Some((t, p)) => e.typed(t).with_probability(p),
        None => e,
    };
    for &(o, t, p) in deleted {
        edits.push(typed(
            Edit::new(o, o + 1, Vec::<String>::new()),
            Some((t, p)),
        ));
    }
    let mut i = 0;
    while i < work.len() {
        let w = &work[i];
        if let Some(o) = w.origin {
            if w.text != original.tokens()[o] {
                edits.push(typed(Edit::new(o, o + 1, [w.text.clone()]), w.changed_by));
            }
            i += 1;
            continue;
        }
        let run_start = i;
        while i < work.len() && work[i].origin.is_none() {
            i += 1;
        }
        let at = work[i..]
            .iter()
            .find_map(|w| w.origin)
            .unwrap_or(original.len());
        let replacement: Vec<String> = work[run_start..i].iter().map(|w| w.text.clone()).collect();
        edits.push(typed(
            Edit::new(at, at, replacement),
            work[run_start].changed_by,
        ));
    }
    edits.sort_by_key(|e| (e.start, e.end));
    edits
}
