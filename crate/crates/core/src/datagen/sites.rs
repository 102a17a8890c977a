use crate::linguistics::{
    article_surface, inflect, lemma, surface_label, ErrorType, MorphLexicon, Tag, TaggedSentence,
    PREPOSITIONS,
};

/// A position in a sentence where one error type's classifier applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSite {
    pub error_type: ErrorType,
    /// Token index of the target word. For articles, the index of the
    /// first token of the noun phrase; any article sits just before it.
    pub position: usize,
    pub observed_label: usize,
    /// Lemma of the target word; empty for articles.
    pub base_form: String,
}

impl TargetSite {
    /// Whether an article token precedes an article slot.
    pub fn has_article(&self) -> bool {
        self.error_type == ErrorType::Article && self.observed_label != 2
    }

    /// Token span the site's surface form occupies.
    pub fn span(&self) -> (usize, usize) {
        match self.error_type {
            ErrorType::Article if self.has_article() => (self.position - 1, self.position),
            ErrorType::Article => (self.position, self.position),
            _ => (self.position, self.position + 1),
        }
    }
}

const QUANTIFIERS: &[&str] = &[
    "many", "much", "few", "several", "more", "most", "less", "least", "enough",
];

const DEGREE_ADVERBS: &[&str] = &[
    "very",
    "quite",
    "rather",
    "really",
    "so",
    "too",
    "extremely",
    "fairly",
    "highly",
    "more",
    "most",
    "less",
    "least",
];

fn in_np(tag: Tag) -> bool {
    matches!(tag, Tag::Jj | Tag::Jjr | Tag::Jjs | Tag::Nn | Tag::Nns)
}

fn blocks_article(word: &str, tag: Tag) -> bool {
    match tag {
        Tag::Dt => !matches!(word, "a" | "an" | "the"),
        Tag::PrpS | Tag::Pos | Tag::Cd | Tag::Wdt | Tag::WpS | Tag::Pdt => true,
        _ => false,
    }
}

fn article_sites(ts: &TaggedSentence) -> Vec<TargetSite> {
    let tokens = ts.tokens();
    let tags = ts.tags();
    let mut sites = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !in_np(tags[i]) || (i > 0 && in_np(tags[i - 1])) {
            i += 1;
            continue;
        }
        let mut end = i;
        while end < tokens.len() && in_np(tags[end]) {
            end += 1;
        }
        let run = i..end;
        i = end;
        if !run.clone().any(|k| matches!(tags[k], Tag::Nn | Tag::Nns)) {
            continue;
        }
        let mut start = run.start;
        // "the most important thing": the degree word belongs to the phrase
        if QUANTIFIERS.contains(&tokens[start].as_str())
            && !(start + 1 < run.end && tags[start + 1].is_adjective())
        {
            continue;
        }
        if tags[start].is_adjective() {
            while start > 0 && DEGREE_ADVERBS.contains(&tokens[start - 1].as_str()) {
                start -= 1;
            }
        }
        let label = match start.checked_sub(1).map(|p| (tokens[p].as_str(), tags[p])) {
            Some(("a" | "an", _)) => 0,
            Some(("the", _)) => 1,
            Some((w, t)) if blocks_article(w, t) => continue,
            _ => 2,
        };
        sites.push(TargetSite {
            error_type: ErrorType::Article,
            position: start,
            observed_label: label,
            base_form: String::new(),
        });
    }
    sites
}

/// Every site of `error_type` in a tagged sentence, left to right.
///
/// Article sites are one slot per noun phrase: a maximal run of adjectives
/// and common nouns containing at least one noun, extended left over
/// degree adverbs. Phrases led by a quantifier or preceded by another
/// determiner, a possessive or a number are not article sites.
pub fn find_targets(
    ts: &TaggedSentence,
    error_type: ErrorType,
    lex: &MorphLexicon,
) -> Vec<TargetSite> {
    if error_type == ErrorType::Article {
        return article_sites(ts);
    }
    ts.iter()
        .enumerate()
        .filter_map(|(i, (word, tag))| {
            let label = surface_label(word, tag, error_type)?;
            let base_form = match error_type {
                ErrorType::Preposition => word.to_string(),
                _ => lemma(word, tag, lex),
            };
            Some(TargetSite {
                error_type,
                position: i,
                observed_label: label,
                base_form,
            })
        })
        .collect()
}

/// Surface tokens a label would produce at `site`, or `None` when the
/// morphology cannot be produced with confidence.
pub fn label_surface(
    ts: &TaggedSentence,
    site: &TargetSite,
    label: usize,
    lex: &MorphLexicon,
) -> Option<Vec<String>> {
    match site.error_type {
        ErrorType::Article => {
            let next = ts
                .tokens()
                .get(site.position)
                .map(String::as_str)
                .unwrap_or("");
            Some(
                article_surface(label, next)
                    .map(str::to_string)
                    .into_iter()
                    .collect(),
            )
        }
        ErrorType::Preposition => PREPOSITIONS.get(label).map(|p| vec![p.to_string()]),
        t => inflect(&site.base_form, t, label, lex)
            .ok()
            .map(|w| vec![w]),
    }
}

/// Whether the observed label regenerates the text actually at the site.
pub fn reconstructs(ts: &TaggedSentence, site: &TargetSite, lex: &MorphLexicon) -> bool {
    let (s, e) = site.span();
    match label_surface(ts, site, site.observed_label, lex) {
        Some(surface) => surface.as_slice() == &ts.tokens()[s..e],
        None => false,
    }
}
