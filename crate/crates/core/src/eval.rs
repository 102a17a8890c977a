//! Edit-level scoring with precision, recall and F0.5.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Sentence;
use crate::linguistics::ErrorType;
use crate::pipeline::Edit;

/// `(1 + β²)·p·r / (β²·p + r)`, or 0 when both are 0.
pub fn f_beta(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / denom
    }
}

/// Token-level diff via longest common subsequence. Runs of unmatched
/// tokens between two matches become one edit.
pub fn extract_edits(original: &Sentence, corrected: &Sentence) -> Vec<Edit> {
    let a = original.tokens();
    let b = corrected.tokens();
    let (n, m) = (a.len(), b.len());
    // lcs[i][j] = LCS length of a[i..] and b[j..]
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut edits = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (mut si, mut sj) = (0, 0);
    let flush = |edits: &mut Vec<Edit>, si: usize, i: usize, sj: usize, j: usize| {
        if si != i || sj != j {
            edits.push(Edit::new(si, i, b[sj..j].iter().cloned()));
        }
    };
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1 {
            flush(&mut edits, si, i, sj, j);
            i += 1;
            j += 1;
            si = i;
            sj = j;
        } else if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            j += 1;
        } else {
            i += 1;
        }
    }
    flush(&mut edits, si, i, sj, j);
    edits
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_half: f64,
}

impl Scores {
    /// Precision is 1 with no proposals; recall is 1 with no gold edits.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        Scores {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f_half: f_beta(precision, recall, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub overall: Scores,
    /// Present for types that occur in the gold annotations.
    pub per_type: BTreeMap<ErrorType, Scores>,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{system} system sentences but {gold} gold sentences")]
    CountMismatch { system: usize, gold: usize },
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

/// Scores system edits against gold edits, sentence by sentence. An edit
/// matches when span and replacement are equal. Untyped system edits take
/// the type of the gold edit they match.
pub fn score(system: &[Vec<Edit>], gold: &[Vec<Edit>]) -> Result<ScoreReport, EvalError> {
    if system.len() != gold.len() {
        return Err(EvalError::CountMismatch {
            system: system.len(),
            gold: gold.len(),
        });
    }
    let mut overall = Counts::default();
    let mut per_type: BTreeMap<ErrorType, Counts> = BTreeMap::new();
    for t in gold.iter().flatten().filter_map(|e| e.error_type) {
        per_type.entry(t).or_default();
    }
    for (sys, gold) in system.iter().zip(gold) {
        let mut used = vec![false; gold.len()];
        for e in sys {
            let hit = gold
                .iter()
                .enumerate()
                .position(|(k, g)| !used[k] && g.same_change(e));
            let t = e
                .error_type
                .or_else(|| hit.and_then(|k| gold[k].error_type));
            let slot = t.and_then(|t| per_type.get_mut(&t));
            match hit {
                Some(k) => {
                    used[k] = true;
                    overall.tp += 1;
                    if let Some(c) = slot {
                        c.tp += 1;
                    }
                }
                None => {
                    overall.fp += 1;
                    if let Some(c) = slot {
                        c.fp += 1;
                    }
                }
            }
        }
        for (k, g) in gold.iter().enumerate() {
            if used[k] {
                continue;
            }
            overall.fn_ += 1;
            if let Some(c) = g.error_type.and_then(|t| per_type.get_mut(&t)) {
                c.fn_ += 1;
            }
        }
    }
    Ok(ScoreReport {
        overall: Scores::from_counts(overall.tp, overall.fp, overall.fn_),
        per_type: per_type
            .into_iter()
            .map(|(t, c)| (t, Scores::from_counts(c.tp, c.fp, c.fn_)))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldAnnotation {
    pub sentence: Sentence,
    pub edits: Vec<Edit>,
}

#[derive(Debug, Error)]
pub enum GoldError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("gold line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Parses `S tokens...` blocks followed by `A start end|||type|||replacement`
/// lines, blank-line separated. Unknown type tags are kept untyped; an
/// empty replacement or `-NONE-` is a deletion; `-1 -1` no-op lines are
/// skipped.
pub fn parse_gold<R: BufRead>(input: R) -> Result<Vec<GoldAnnotation>, GoldError> {
    let mut out: Vec<GoldAnnotation> = Vec::new();
    let mut open = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let bad = |message: String| GoldError::Format {
            line: line_no,
            message,
        };
        let trimmed = line.trim_end();
        if trimmed.trim().is_empty() {
            open = false;
            continue;
        }
        if let Some(rest) = trimmed
            .strip_prefix("S ")
            .or_else(|| (trimmed == "S").then_some(""))
        {
            out.push(GoldAnnotation {
                sentence: Sentence::from_pretokenized(rest),
                edits: Vec::new(),
            });
            open = true;
            continue;
        }
        let Some(rest) = trimmed.strip_prefix("A ") else {
            return Err(bad(format!("expected an S or A line, got {trimmed:?}")));
        };
        if !open {
            return Err(bad("annotation without a preceding S line".into()));
        }
        let fields: Vec<&str> = rest.split("|||").collect();
        if fields.len() < 3 {
            return Err(bad("expected start end|||type|||replacement".into()));
        }
        let span: Vec<&str> = fields[0].split_whitespace().collect();
        if span.len() != 2 {
            return Err(bad(format!("bad span {:?}", fields[0])));
        }
        if span == ["-1", "-1"] {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad offset {s:?}")))
        };
        let (start, end) = (parse(span[0])?, parse(span[1])?);
        let ann = out.last_mut().expect("open sentence");
        if start > end || end > ann.sentence.len() {
            return Err(bad(format!(
                "span ({start}, {end}) outside sentence of {} tokens",
                ann.sentence.len()
            )));
        }
        let replacement: Vec<&str> = match fields[2].trim() {
            "-NONE-" => Vec::new(),
            r => r.split_whitespace().collect(),
        };
        let mut edit = Edit::new(start, end, replacement);
        edit.error_type = fields[1].trim().parse().ok();
        ann.edits.push(edit);
    }
    Ok(out)
}
