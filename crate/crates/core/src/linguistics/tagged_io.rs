//! `token<TAB>TAG` text format, one token per line, blank line between
//! sentences.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Tag, TaggedSentence};

#[derive(Debug, Error)]
pub enum TaggedParseError {
    #[error("line {line}: expected token<TAB>tag, found {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: {source}")]
    UnknownTag {
        line: usize,
        source: super::UnknownTag,
    },
    #[error("line {line}: empty sentence")]
    EmptySentence { line: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl TaggedParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            TaggedParseError::Malformed { line, .. }
            | TaggedParseError::UnknownTag { line, .. }
            | TaggedParseError::EmptySentence { line } => Some(*line),
            TaggedParseError::Io(_) => None,
        }
    }
}

/// Streaming reader over tagged text. A malformed block yields one error
/// and reading resumes at the next sentence.
pub struct TaggedReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    seen_sentence: bool,
    /// a non-blank line read while reporting an empty block
    pending: Option<(usize, String)>,
}

pub fn parse_tagged<R: BufRead>(input: R) -> TaggedReader<R> {
    TaggedReader {
        lines: input.lines(),
        line_no: 0,
        seen_sentence: false,
        pending: None,
    }
}

fn parse_line(line_no: usize, line: &str) -> Result<(String, Tag), TaggedParseError> {
    let malformed = || TaggedParseError::Malformed {
        line: line_no,
        text: line.to_string(),
    };
    let mut parts = line.split('\t');
    let (token, tag) = match (parts.next(), parts.next(), parts.next()) {
        (Some(tok), Some(tag), None) => (tok.trim(), tag.trim()),
        _ => return Err(malformed()),
    };
    if token.is_empty() || tag.is_empty() || token.contains(char::is_whitespace) {
        return Err(malformed());
    }
    let tag = tag
        .parse::<Tag>()
        .map_err(|source| TaggedParseError::UnknownTag {
            line: line_no,
            source,
        })?;
    Ok((token.to_lowercase(), tag))
}

impl<R: BufRead> TaggedReader<R> {
    fn read_line(&mut self) -> Option<io::Result<(usize, String)>> {
        if let Some(p) = self.pending.take() {
            return Some(Ok(p));
        }
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(line.map(|l| (self.line_no, l.trim_end_matches('\r').to_string())))
    }
}

impl<R: BufRead> Iterator for TaggedReader<R> {
    type Item = Result<TaggedSentence, TaggedParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        let mut error: Option<TaggedParseError> = None;
        let mut started = false;
        let mut blanks = 0usize;
        let mut first_blank = 0usize;
        loop {
            let (line_no, line) = match self.read_line() {
                None => break,
                Some(Err(e)) => return Some(Err(e.into())),
                Some(Ok(l)) => l,
            };
            if line.trim().is_empty() {
                if started {
                    break;
                }
                if blanks == 0 {
                    first_blank = line_no;
                }
                blanks += 1;
                continue;
            }
            if !started && blanks >= 1 && self.seen_sentence {
                // an empty block between two sentences
                self.pending = Some((line_no, line));
                self.seen_sentence = false;
                return Some(Err(TaggedParseError::EmptySentence { line: first_blank }));
            }
            started = true;
            if error.is_some() {
                continue;
            }
            match parse_line(line_no, &line) {
                Ok((tok, tag)) => {
                    tokens.push(tok);
                    tags.push(tag);
                }
                Err(e) => error = Some(e),
            }
        }
        if !started {
            return None;
        }
        self.seen_sentence = true;
        if let Some(e) = error {
            return Some(Err(e));
        }
        Some(Ok(
            TaggedSentence::new(tokens, tags).expect("parallel vectors")
        ))
    }
}

pub fn write_tagged<W: Write>(mut out: W, sentences: &[TaggedSentence]) -> io::Result<()> {
    for s in sentences {
        for (tok, tag) in s.iter() {
            writeln!(out, "{tok}\t{tag}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}
