//! POS tagging, morphology, and the per-error-type label schemes.

mod lexicon;
mod morph;
mod tagged_io;
mod tagger;
mod tags;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use lexicon::{LexiconError, MorphLexicon, VerbParadigm, VerbSlot};
pub use morph::{
    article_surface, inflect, lemma, preposition_index, surface_label, surface_labels,
    InflectError, PREPOSITIONS,
};
pub use tagged_io::{parse_tagged, write_tagged, TaggedParseError, TaggedReader};
pub use tagger::tag;
pub use tags::{Tag, UnknownTag};

use crate::corpus::Sentence;

/// The five grammatical error types, each handled by its own classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorType {
    Article,
    Preposition,
    VerbForm,
    NounNumber,
    SubjAgreement,
}

impl ErrorType {
    pub const ALL: [ErrorType; 5] = [
        ErrorType::Article,
        ErrorType::Preposition,
        ErrorType::VerbForm,
        ErrorType::NounNumber,
        ErrorType::SubjAgreement,
    ];

    /// Order in which the correction pipeline applies the models.
    pub const CORRECTION_ORDER: [ErrorType; 5] = [
        ErrorType::VerbForm,
        ErrorType::NounNumber,
        ErrorType::Article,
        ErrorType::Preposition,
        ErrorType::SubjAgreement,
    ];

    pub fn class_count(self) -> usize {
        match self {
            ErrorType::Article => 3,
            ErrorType::Preposition => PREPOSITIONS.len(),
            ErrorType::VerbForm => 3,
            ErrorType::NounNumber => 2,
            ErrorType::SubjAgreement => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::Article => "article",
            ErrorType::Preposition => "preposition",
            ErrorType::VerbForm => "verb-form",
            ErrorType::NounNumber => "noun-number",
            ErrorType::SubjAgreement => "subj-agreement",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            ErrorType::Article => 0,
            ErrorType::Preposition => 1,
            ErrorType::VerbForm => 2,
            ErrorType::NounNumber => 3,
            ErrorType::SubjAgreement => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == code)
    }

    /// Short human-readable name of a class, for reports.
    pub fn label_name(self, label: usize) -> Option<&'static str> {
        let names: &[&str] = match self {
            ErrorType::Article => &["a/an", "the", "none"],
            ErrorType::Preposition => &PREPOSITIONS,
            ErrorType::VerbForm => &["base", "gerund", "participle"],
            ErrorType::NounNumber => &["singular", "plural"],
            ErrorType::SubjAgreement => &["non-3sg", "3sg"],
        };
        names.get(label).copied()
    }

    /// Whether the type's classifier attends with the target word's base form.
    pub fn uses_target_word(self) -> bool {
        matches!(self, ErrorType::NounNumber | ErrorType::VerbForm)
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error type {0:?}")]
pub struct UnknownErrorType(pub String);

impl FromStr for ErrorType {
    type Err = UnknownErrorType;

    /// Accepts the canonical names plus the CoNLL-2014 annotation codes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "article" | "artordet" | "art" => Ok(ErrorType::Article),
            "preposition" | "prep" => Ok(ErrorType::Preposition),
            "verb-form" | "vform" => Ok(ErrorType::VerbForm),
            "noun-number" | "nn" => Ok(ErrorType::NounNumber),
            "subj-agreement" | "subject-agreement" | "sva" => Ok(ErrorType::SubjAgreement),
            _ => Err(UnknownErrorType(s.to_string())),
        }
    }
}

/// Tokens paired one-to-one with Penn Treebank tags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedSentence {
    tokens: Vec<String>,
    tags: Vec<Tag>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{tokens} tokens but {tags} tags")]
pub struct LengthMismatch {
    pub tokens: usize,
    pub tags: usize,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<String>, tags: Vec<Tag>) -> Result<Self, LengthMismatch> {
        if tokens.len() != tags.len() {
            return Err(LengthMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(TaggedSentence { tokens, tags })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Tag)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.tags.iter().copied())
    }

    pub fn sentence(&self) -> Sentence {
        Sentence::from_tokens(&self.tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = ErrorType::ALL.iter().map(|t| t.class_count()).collect();
        assert_eq!(counts, [3, 8, 3, 2, 2]);
    }

    #[test]
    fn names_parse_back() {
        for t in ErrorType::ALL {
            assert_eq!(t.name().parse::<ErrorType>().unwrap(), t);
            assert_eq!(ErrorType::from_code(t.code()), Some(t));
        }
        assert_eq!(
            "SVA".parse::<ErrorType>().unwrap(),
            ErrorType::SubjAgreement
        );
        assert_eq!("ArtOrDet".parse::<ErrorType>().unwrap(), ErrorType::Article);
        assert!("spelling".parse::<ErrorType>().is_err());
    }

    #[test]
    fn every_class_has_a_name() {
        for t in ErrorType::ALL {
            assert!((0..t.class_count()).all(|l| t.label_name(l).is_some()));
            assert_eq!(t.label_name(t.class_count()), None);
        }
        assert_eq!(ErrorType::Preposition.label_name(7), Some("about"));
    }

    #[test]
    fn target_word_types() {
        let with: Vec<_> = ErrorType::ALL
            .into_iter()
            .filter(|t| t.uses_target_word())
            .collect();
        assert_eq!(with, [ErrorType::VerbForm, ErrorType::NounNumber]);
    }

    #[test]
    fn tagged_sentence_rejects_length_mismatch() {
        let err = TaggedSentence::new(vec!["a".into()], vec![]).unwrap_err();
        assert_eq!(err, LengthMismatch { tokens: 1, tags: 0 });
    }
}
