use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;
use crate::linguistics::ErrorType;

/// Replacement of the original tokens `start..end`. `start == end` is an
/// insertion; an empty replacement is a deletion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<String>,
    pub error_type: Option<ErrorType>,
    pub probability: Option<f64>,
}

impl Edit {
    pub fn new<S: Into<String>>(
        start: usize,
        end: usize,
        replacement: impl IntoIterator<Item = S>,
    ) -> Self {
        Edit {
            start,
            end,
            replacement: replacement.into_iter().map(Into::into).collect(),
            error_type: None,
            probability: None,
        }
    }

    pub fn typed(mut self, error_type: ErrorType) -> Self {
        self.error_type = Some(error_type);
        self
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.probability = Some(p);
        self
    }

    /// Span and replacement, ignoring type and probability.
    pub fn same_change(&self, other: &Edit) -> bool {
        self.start == other.start && self.end == other.end && self.replacement == other.replacement
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}) -> [{}]",
            self.start,
            self.end,
            self.replacement.join(" ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("edit span ({start}, {end}) outside sentence of length {len}")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("edits ({0}, {1}) and ({2}, {3}) overlap")]
    Overlap(usize, usize, usize, usize),
}

/// Sorts edits by span and rejects overlaps. Two insertions at the same
/// point overlap; an insertion at the start of a span does not.
pub fn check_edits(len: usize, edits: &[Edit]) -> Result<Vec<&Edit>, EditError> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for e in &sorted {
        if e.start > e.end || e.end > len {
            return Err(EditError::OutOfBounds {
                start: e.start,
                end: e.end,
                len,
            });
        }
    }
    for w in sorted.windows(2) {
        let (a, b) = (w[0], w[1]);
        let clash = b.start < a.end || (a.start == a.end && b.start == b.end && a.start == b.start);
        if clash {
            return Err(EditError::Overlap(a.start, a.end, b.start, b.end));
        }
    }
    Ok(sorted)
}

/// Applies non-overlapping edits given in original coordinates.
pub fn apply_edits(sentence: &Sentence, edits: &[Edit]) -> Result<Sentence, EditError> {
    let sorted = check_edits(sentence.len(), edits)?;
    let mut tokens = sentence.tokens().to_vec();
    for e in sorted.into_iter().rev() {
        tokens.splice(e.start..e.end, e.replacement.iter().cloned());
    }
    Ok(Sentence::from_tokens(tokens))
}

/// Writes `sentence_index<TAB>start<TAB>end<TAB>type<TAB>replacement<TAB>probability`
/// lines. Missing type or probability is written as `-`.
pub fn write_edits<W: Write>(mut out: W, index: usize, edits: &[Edit]) -> io::Result<()> {
    for e in edits {
        let t = e.error_type.map_or("-", |t| t.name());
        let p = e.probability.map_or("-".to_string(), |p| format!("{p:.6}"));
        writeln!(
            out,
            "{index}\t{}\t{}\t{t}\t{}\t{p}",
            e.start,
            e.end,
            e.replacement.join(" ")
        )?;
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum EditsFileError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Reads an edits file into (sentence index, edit) pairs.
pub fn read_edits<R: BufRead>(input: R) -> Result<Vec<(usize, Edit)>, EditsFileError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| EditsFileError::Format {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(bad(format!("{} fields, expected 6", fields.len())));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad {what} {s:?}")))
        };
        let idx = num(fields[0], "sentence index")?;
        let mut edit = Edit::new(
            num(fields[1], "start")?,
            num(fields[2], "end")?,
            fields[4].split_whitespace(),
        );
        if fields[3] != "-" {
            edit.error_type = Some(fields[3].parse().map_err(|e| bad(format!("{e}")))?);
        }
        if fields[5] != "-" {
            edit.probability = Some(
                fields[5]
                    .parse()
                    .map_err(|_| bad(format!("bad probability {:?}", fields[5])))?,
            );
        }
        out.push((idx, edit));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sentence {
        Sentence::from_pretokenized(text)
    }

    #[test]
    fn no_edits_is_identity() {
        assert_eq!(apply_edits(&s("she eat ."), &[]).unwrap(), s("she eat ."));
    }

    #[test]
    fn substitution_keeps_length() {
        let out = apply_edits(&s("she eat an apple"), &[Edit::new(1, 2, ["eats"])]).unwrap();
        assert_eq!(out, s("she eats an apple"));
    }

    #[test]
    fn insertion_and_deletion() {
        let out = apply_edits(&s("how does car come"), &[Edit::new(2, 2, ["the"])]).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out, s("how does the car come"));
        let out = apply_edits(
            &s("for the young people"),
            &[Edit::new(1, 2, Vec::<String>::new())],
        )
        .unwrap();
        assert_eq!(out, s("for young people"));
    }

    #[test]
    fn insertion_before_substitution() {
        let out = apply_edits(
            &s("a car"),
            &[Edit::new(1, 2, ["cars"]), Edit::new(1, 1, ["red"])],
        )
        .unwrap();
        assert_eq!(out, s("a red cars"));
    }

    #[test]
    fn edits_file_roundtrip() {
        let edits = vec![
            Edit::new(3, 3, ["the"])
                .typed(ErrorType::Article)
                .with_probability(0.97),
            Edit::new(5, 6, Vec::<String>::new()),
        ];
        let mut buf = Vec::new();
        write_edits(&mut buf, 4, &edits).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone())
                .unwrap()
                .lines()
                .next()
                .unwrap(),
            "4\t3\t3\tarticle\tthe\t0.970000"
        );
        let back = read_edits(buf.as_slice()).unwrap();
        assert_eq!(back.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![4, 4]);
        assert_eq!(back[0].1, edits[0]);
        assert_eq!(back[1].1, edits[1]);
        assert!(read_edits("1\t2\n".as_bytes()).is_err());
    }

    #[test]
    fn overlaps_rejected() {
        let base = s("a b c d");
        assert!(matches!(
            apply_edits(&base, &[Edit::new(0, 2, ["x"]), Edit::new(1, 3, ["y"])]),
            Err(EditError::Overlap(..))
        ));
        assert!(matches!(
            apply_edits(&base, &[Edit::new(1, 1, ["x"]), Edit::new(1, 1, ["y"])]),
            Err(EditError::Overlap(..))
        ));
        assert!(matches!(
            apply_edits(&base, &[Edit::new(3, 5, ["x"])]),
            Err(EditError::OutOfBounds { .. })
        ));
    }
}
