//! Text ingestion: tokenization, vocabulary construction and id mapping.
//!
//! Corpora are read as one sentence per line. Everything is lowercased;
//! the vocabulary keeps the most frequent tokens up to a capacity and maps
//! everything else to a single unknown-word id.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";

pub const UNK_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
const SENTINELS: [&str; 3] = [UNK, BOS, EOS];

/// Default vocabulary capacity (most common words kept).
pub const DEFAULT_CAPACITY: usize = 40_000;

const DETACHABLE: [char; 6] = ['.', ',', '!', '?', ';', ':'];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("vocab file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// A lowercased, tokenized sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    /// Builds a sentence from already-tokenized words.
    ///
    /// Tokens are lowercased; empty tokens are dropped and tokens containing
    /// whitespace are split.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokens = tokens
            .into_iter()
            .flat_map(|t| {
                t.as_ref()
                    .split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
            })
            .collect();
        Sentence { tokens }
    }

    /// Splits on whitespace without punctuation handling. Use for
    /// pre-tokenized text.
    pub fn from_pretokenized(line: &str) -> Self {
        Self::from_tokens(line.split_whitespace())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Whitespace tokenization with terminal punctuation detached and
/// everything lowercased.
pub fn tokenize(text: &str) -> Sentence {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let lower = word.to_lowercase();
        if lower.chars().all(|c| c.is_ascii_punctuation()) {
            tokens.push(lower);
            continue;
        }
        let core = lower.trim_end_matches(DETACHABLE);
        let tail = &lower[core.len()..];
        if !core.is_empty() {
            tokens.push(core.to_string());
        }
        if !tail.is_empty() {
            // "..." stays one token, "word.," becomes [word, ., ,]
            if tail.chars().all(|c| c == '.') && tail.len() > 1 {
                tokens.push(tail.to_string());
            } else {
                tokens.extend(tail.chars().map(String::from));
            }
        }
    }
    Sentence { tokens }
}

/// Token frequency table. Counts from different shards merge commutatively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenCounts {
    counts: HashMap<String, u64>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sentence(&mut self, sentence: &Sentence) {
        for token in sentence.tokens() {
            if SENTINELS.contains(&token.as_str()) {
                continue;
            }
            *self.counts.entry(token.clone()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (token, n) in other.counts {
            *self.counts.entry(token).or_insert(0) += n;
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }
}

impl<'a> FromIterator<&'a Sentence> for TokenCounts {
    fn from_iter<T: IntoIterator<Item = &'a Sentence>>(iter: T) -> Self {
        let mut counts = TokenCounts::new();
        for s in iter {
            counts.add_sentence(s);
        }
        counts
    }
}

/// Word → id mapping. Ids 0..3 are the `<unk>`, `<bos>` and `<eos>`
/// sentinels; the rest are ordered by descending frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocab {
    /// Keeps the `capacity` most frequent tokens; ties are broken by
    /// ascending lexicographic order.
    pub fn from_counts(counts: &TokenCounts, capacity: usize) -> Self {
        assert!(capacity >= 1, "vocabulary capacity must be at least 1");
        let mut entries: Vec<(&String, u64)> = counts.counts.iter().map(|(w, &n)| (w, n)).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        entries.truncate(capacity);
        Self::from_words(entries.into_iter().map(|(w, _)| w.clone()))
    }

    /// Builds a vocabulary from non-sentinel words in id order.
    pub fn from_words<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut all: Vec<String> = SENTINELS.iter().map(|s| s.to_string()).collect();
        let mut ids: HashMap<String, u32> = all
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        for w in words {
            if ids.contains_key(&w) {
                continue;
            }
            ids.insert(w.clone(), all.len() as u32);
            all.push(w);
        }
        Vocab { words: all, ids }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.len() == SENTINELS.len()
    }

    pub fn id(&self, word: &str) -> u32 {
        self.ids.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn ids_of(&self, sentence: &Sentence) -> Vec<u32> {
        self.ids_of_tokens(sentence.tokens())
    }

    pub fn ids_of_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Stable 64-bit digest of the word list, used to detect models and
    /// datasets built against a different vocabulary.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = File::create(path)?;
        self.write(BufWriter::new(file))?;
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut words = Vec::new();
        let mut seen = 0usize;
        for (i, line) in input.lines().enumerate() {
            seen += 1;
            let line = line?;
            let lineno = i + 1;
            if i < SENTINELS.len() {
                if line != SENTINELS[i] {
                    return Err(CorpusError::Format {
                        line: lineno,
                        message: format!("expected sentinel {}, found {line:?}", SENTINELS[i]),
                    });
                }
                continue;
            }
            if line.is_empty() || line.contains(char::is_whitespace) {
                return Err(CorpusError::Format {
                    line: lineno,
                    message: "vocabulary entries must be non-empty single tokens".into(),
                });
            }
            words.push(line);
        }
        if seen < SENTINELS.len() {
            return Err(CorpusError::Format {
                line: seen + 1,
                message: "missing sentinel lines".into(),
            });
        }
        Ok(Vocab::from_words(words))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

/// Builds a vocabulary from a stream of sentences.
pub fn build_vocab<'a, I>(corpus: I, capacity: usize) -> Vocab
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let counts: TokenCounts = corpus.into_iter().collect();
    Vocab::from_counts(&counts, capacity)
}

/// Reads a corpus file: one sentence per line, tokenized with [`tokenize`].
/// Blank lines are skipped.
pub fn read_corpus<R: BufRead>(input: R) -> io::Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let s = tokenize(&line?);
        if !s.is_empty() {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn read_corpus_file(path: &Path) -> io::Result<Vec<Sentence>> {
    read_corpus(BufReader::new(File::open(path)?))
}
