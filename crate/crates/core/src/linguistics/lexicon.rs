//! Word lists and irregular paradigms backing the tagger and morphology.
//!
//! The default lexicon is compiled in from `data/`; a directory with the
//! same file names can be loaded instead to extend or replace it.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::Tag;

const IRREGULAR_VERBS: &str = include_str!("../../data/irregular_verbs.tsv");
const IRREGULAR_NOUNS: &str = include_str!("../../data/irregular_nouns.tsv");
const CLOSED_CLASS: &str = include_str!("../../data/closed_class.tsv");
const REGULAR_VERBS: &str = include_str!("../../data/regular_verbs.txt");
const REGULAR_NOUNS: &str = include_str!("../../data/regular_nouns.txt");
const ADJECTIVES: &str = include_str!("../../data/adjectives.txt");

pub const FILE_NAMES: [&str; 6] = [
    "irregular_verbs.tsv",
    "irregular_nouns.tsv",
    "closed_class.tsv",
    "regular_verbs.txt",
    "regular_nouns.txt",
    "adjectives.txt",
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("i/o error reading {file}: {source}")]
    Io { file: String, source: io::Error },
    #[error("{file} line {line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },
}

/// Inflected forms of one irregular verb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbParadigm {
    pub base: String,
    pub third_singular: String,
    pub gerund: String,
    pub past: String,
    pub participle: String,
}

/// Which slot of a verb paradigm a surface form fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerbSlot {
    Base,
    ThirdSingular,
    Gerund,
    Past,
    Participle,
}

#[derive(Debug, Clone, Default)]
pub struct MorphLexicon {
    verbs: HashMap<String, VerbParadigm>,
    verb_forms: HashMap<String, Vec<(String, VerbSlot)>>,
    plurals: HashMap<String, String>,
    singulars: HashMap<String, String>,
    closed: HashMap<String, Tag>,
    regular_verbs: HashSet<String>,
    regular_nouns: HashSet<String>,
    adjectives: HashSet<String>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn format_err(file: &str, line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Format {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

impl MorphLexicon {
    /// The bundled English lexicon.
    pub fn english() -> Self {
        Self::from_sources([
            IRREGULAR_VERBS,
            IRREGULAR_NOUNS,
            CLOSED_CLASS,
            REGULAR_VERBS,
            REGULAR_NOUNS,
            ADJECTIVES,
        ])
        .expect("bundled lexicon is well-formed")
    }

    /// Loads the six lexicon files from `dir`. Missing files fall back to
    /// the bundled versions.
    pub fn load_dir(dir: &Path) -> Result<Self, LexiconError> {
        let defaults = [
            IRREGULAR_VERBS,
            IRREGULAR_NOUNS,
            CLOSED_CLASS,
            REGULAR_VERBS,
            REGULAR_NOUNS,
            ADJECTIVES,
        ];
        let mut texts: Vec<String> = Vec::with_capacity(FILE_NAMES.len());
        for (name, default) in FILE_NAMES.iter().zip(defaults) {
            let path = dir.join(name);
            if path.exists() {
                let text = fs::read_to_string(&path).map_err(|source| LexiconError::Io {
                    file: path.display().to_string(),
                    source,
                })?;
                texts.push(text);
            } else {
                texts.push(default.to_string());
            }
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        Self::from_sources([refs[0], refs[1], refs[2], refs[3], refs[4], refs[5]])
    }

    fn from_sources(src: [&str; 6]) -> Result<Self, LexiconError> {
        let mut lex = MorphLexicon::default();
        for (line, row) in content_lines(src[0]) {
            let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
            if cols.len() != 5 || cols.iter().any(|c| c.is_empty()) {
                return Err(format_err(
                    FILE_NAMES[0],
                    line,
                    "expected 5 tab-separated columns",
                ));
            }
            let p = VerbParadigm {
                base: cols[0].to_lowercase(),
                third_singular: cols[1].to_lowercase(),
                gerund: cols[2].to_lowercase(),
                past: cols[3].to_lowercase(),
                participle: cols[4].to_lowercase(),
            };
            lex.add_verb(p);
        }
        for (line, row) in content_lines(src[1]) {
            let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
            if cols.len() != 2 || cols.iter().any(|c| c.is_empty()) {
                return Err(format_err(
                    FILE_NAMES[1],
                    line,
                    "expected 2 tab-separated columns",
                ));
            }
            lex.plurals
                .insert(cols[0].to_lowercase(), cols[1].to_lowercase());
            lex.singulars
                .insert(cols[1].to_lowercase(), cols[0].to_lowercase());
        }
        for (line, row) in content_lines(src[2]) {
            let cols: Vec<&str> = row.split('\t').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(format_err(FILE_NAMES[2], line, "expected word<TAB>tag"));
            }
            let tag: Tag = cols[1]
                .parse()
                .map_err(|e| format_err(FILE_NAMES[2], line, format!("{e}")))?;
            lex.closed.insert(cols[0].to_lowercase(), tag);
        }
        let words = |text: &str| -> HashSet<String> {
            content_lines(text)
                .flat_map(|(_, l)| {
                    l.split_whitespace()
                        .map(str::to_lowercase)
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        lex.regular_verbs = words(src[3]);
        lex.regular_nouns = words(src[4]);
        lex.adjectives = words(src[5]);
        Ok(lex)
    }

    fn add_verb(&mut self, p: VerbParadigm) {
        let slots = [
            (&p.base, VerbSlot::Base),
            (&p.third_singular, VerbSlot::ThirdSingular),
            (&p.gerund, VerbSlot::Gerund),
            (&p.past, VerbSlot::Past),
            (&p.participle, VerbSlot::Participle),
        ];
        for (form, slot) in slots {
            let entry = self.verb_forms.entry(form.clone()).or_default();
            if !entry.contains(&(p.base.clone(), slot)) {
                entry.push((p.base.clone(), slot));
            }
        }
        self.verbs.insert(p.base.clone(), p);
    }

    pub fn irregular_verb(&self, base: &str) -> Option<&VerbParadigm> {
        self.verbs.get(base)
    }

    pub fn irregular_verbs(&self) -> impl Iterator<Item = &VerbParadigm> {
        self.verbs.values()
    }

    /// Paradigm slots a surface form fills in the irregular table.
    pub fn verb_form(&self, form: &str) -> &[(String, VerbSlot)] {
        self.verb_forms.get(form).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn irregular_plural(&self, singular: &str) -> Option<&str> {
        self.plurals.get(singular).map(String::as_str)
    }

    pub fn irregular_singular(&self, plural: &str) -> Option<&str> {
        self.singulars.get(plural).map(String::as_str)
    }

    pub fn irregular_nouns(&self) -> impl Iterator<Item = (&str, &str)> {
        self.plurals.iter().map(|(s, p)| (s.as_str(), p.as_str()))
    }

    pub fn closed_class(&self, word: &str) -> Option<Tag> {
        self.closed.get(word).copied()
    }

    /// Base form of any verb the lexicon knows about.
    pub fn is_known_verb(&self, base: &str) -> bool {
        self.verbs.contains_key(base) || self.regular_verbs.contains(base)
    }

    /// Singular form of any noun the lexicon knows about.
    pub fn is_known_noun(&self, singular: &str) -> bool {
        self.plurals.contains_key(singular) || self.regular_nouns.contains(singular)
    }

    pub fn is_adjective(&self, word: &str) -> bool {
        self.adjectives.contains(word)
    }

    pub fn regular_verbs(&self) -> impl Iterator<Item = &str> {
        self.regular_verbs.iter().map(String::as_str)
    }

    pub fn regular_nouns(&self) -> impl Iterator<Item = &str> {
        self.regular_nouns.iter().map(String::as_str)
    }

    pub fn adjectives(&self) -> impl Iterator<Item = &str> {
        self.adjectives.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_sizes() {
        let lex = MorphLexicon::english();
        assert!(
            lex.verbs.len() >= 200,
            "{} irregular verbs",
            lex.verbs.len()
        );
        assert!(lex.plurals.len() >= 90);
        assert!(lex.regular_verbs.len() > 300);
        assert!(lex.regular_nouns.len() > 300);
        assert_eq!(lex.closed_class("of"), Some(Tag::In));
        assert_eq!(lex.irregular_verb("have").unwrap().third_singular, "has");
        assert_eq!(lex.irregular_singular("people"), Some("person"));
    }

    #[test]
    fn verb_form_index_is_consistent() {
        let lex = MorphLexicon::english();
        for p in lex.irregular_verbs() {
            for form in [
                &p.base,
                &p.third_singular,
                &p.gerund,
                &p.past,
                &p.participle,
            ] {
                assert!(
                    lex.verb_form(form).iter().any(|(b, _)| b == &p.base),
                    "{form} not indexed under {}",
                    p.base
                );
            }
        }
    }

    #[test]
    fn load_dir_overrides_and_falls_back() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("regular_verbs.txt"), "zork\n").unwrap();
        let lex = MorphLexicon::load_dir(dir.path()).unwrap();
        assert!(lex.is_known_verb("zork"));
        assert!(!lex.is_known_verb("walk"));
        assert!(lex.is_known_verb("go"));
    }

    #[test]
    fn malformed_table_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("irregular_nouns.tsv"),
            "# c\nman\tmen\nfoot\n",
        )
        .unwrap();
        match MorphLexicon::load_dir(dir.path()) {
            Err(LexiconError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
