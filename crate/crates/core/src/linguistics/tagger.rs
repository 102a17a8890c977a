//! Deterministic lexicon + suffix POS tagger.
//!
//! Each token first gets a set of candidate tags from closed-class lists,
//! the irregular tables, the word lists and suffix rules. A left-to-right
//! pass then picks one candidate per token from the neighbouring tags.

use super::{lemma, MorphLexicon, Tag, TaggedSentence, VerbSlot};
use crate::corpus::Sentence;

const HAVE_FORMS: &[&str] = &["have", "has", "had", "having", "'ve", "'d"];
const BE_FORMS: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m",
];
const DO_FORMS: &[&str] = &["do", "does", "did"];

fn punctuation_tag(token: &str) -> Option<Tag> {
    if !token.chars().all(|c| c.is_ascii_punctuation()) {
        return None;
    }
    Some(match token {
        "." | "!" | "?" => Tag::Period,
        "," => Tag::Comma,
        "``" | "\"" => Tag::OpenQuote,
        "''" => Tag::CloseQuote,
        "(" | "[" | "{" => Tag::LeftParen,
        ")" | "]" | "}" => Tag::RightParen,
        "$" => Tag::Dollar,
        "#" => Tag::Hash,
        "'s" => Tag::Pos,
        t if t.starts_with("..") => Tag::Colon,
        ":" | ";" | "-" | "--" => Tag::Colon,
        _ => Tag::Sym,
    })
}

fn is_number(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/' | '%'))
}

/// Candidate tags for a token out of context, most likely first.
fn candidates(token: &str, lex: &MorphLexicon) -> Vec<Tag> {
    if let Some(t) = punctuation_tag(token) {
        return vec![t];
    }
    if is_number(token) {
        return vec![Tag::Cd];
    }
    match token {
        "am" | "are" => return vec![Tag::Vbp],
        "is" | "'s" => return vec![Tag::Vbz],
        "was" | "were" => return vec![Tag::Vbd],
        _ => {}
    }
    if let Some(t) = lex.closed_class(token) {
        return vec![t];
    }

    let mut out: Vec<Tag> = Vec::new();
    let add = |t: Tag, out: &mut Vec<Tag>| {
        if !out.contains(&t) {
            out.push(t);
        }
    };

    // verbs from the irregular table
    for (_, slot) in lex.verb_form(token) {
        let t = match slot {
            VerbSlot::Base => Tag::Vbp,
            VerbSlot::ThirdSingular => Tag::Vbz,
            VerbSlot::Gerund => Tag::Vbg,
            VerbSlot::Past => Tag::Vbd,
            VerbSlot::Participle => Tag::Vbn,
        };
        add(t, &mut out);
    }
    // nouns
    if lex.is_known_noun(token) {
        add(Tag::Nn, &mut out);
    }
    if lex.irregular_singular(token).is_some() {
        add(Tag::Nns, &mut out);
    }
    // regular verbs
    if lex.is_known_verb(token) {
        add(Tag::Vbp, &mut out);
    }
    if token.ends_with('s') && token.len() > 2 {
        if lex.is_known_verb(&lemma(token, Tag::Vbz, lex)) && lex.irregular_verb(token).is_none() {
            add(Tag::Vbz, &mut out);
        }
        let sg = lemma(token, Tag::Nns, lex);
        if sg != token && lex.is_known_noun(&sg) {
            add(Tag::Nns, &mut out);
        }
    }
    if token.ends_with("ing") && lex.is_known_verb(&lemma(token, Tag::Vbg, lex)) {
        add(Tag::Vbg, &mut out);
    }
    if token.ends_with("ed") && lex.is_known_verb(&lemma(token, Tag::Vbn, lex)) {
        add(Tag::Vbd, &mut out);
        add(Tag::Vbn, &mut out);
    }
    if lex.is_adjective(token) {
        add(Tag::Jj, &mut out);
    }
    if !out.is_empty() {
        return out;
    }

    // suffix heuristics for unknown words
    let n = token.len();
    if n > 4 && token.ends_with("ing") {
        vec![Tag::Vbg]
    } else if n > 3 && token.ends_with("ed") {
        vec![Tag::Vbd, Tag::Vbn]
    } else if n > 3 && token.ends_with("ly") {
        vec![Tag::Rb]
    } else if ["ous", "ful", "ive", "able", "ible", "less", "ic", "ish"]
        .iter()
        .any(|s| n > s.len() + 2 && token.ends_with(s))
    {
        vec![Tag::Jj]
    } else if n > 3
        && token.ends_with('s')
        && !token.ends_with("ss")
        && !token.ends_with("us")
        && !token.ends_with("is")
    {
        vec![Tag::Nns]
    } else {
        vec![Tag::Nn]
    }
}

fn noun_context(prev: Option<Tag>) -> bool {
    matches!(
        prev,
        Some(
            Tag::Dt
                | Tag::PrpS
                | Tag::Jj
                | Tag::Jjr
                | Tag::Jjs
                | Tag::Cd
                | Tag::Pos
                | Tag::Pdt
                | Tag::In
                | Tag::WpS
        )
    )
}

fn verb_context(prev: Option<Tag>) -> bool {
    matches!(
        prev,
        Some(
            Tag::Prp
                | Tag::Md
                | Tag::To
                | Tag::Nn
                | Tag::Nns
                | Tag::Nnp
                | Tag::Nnps
                | Tag::Wdt
                | Tag::Wp
                | Tag::Ex
        )
    )
}

/// Looks back over adverbs for a modal, infinitival "to", or do-support.
fn needs_bare_infinitive(tokens: &[String], tags: &[Tag], i: usize) -> bool {
    let mut j = i;
    while j > 0 {
        j -= 1;
        match tags[j] {
            Tag::Rb => continue,
            Tag::Md | Tag::To => return true,
            _ => return DO_FORMS.contains(&tokens[j].as_str()),
        }
    }
    // sentence-initial base verb reads as an imperative
    true
}

fn after_auxiliary(tokens: &[String], tags: &[Tag], i: usize) -> bool {
    let mut j = i;
    let mut steps = 0;
    while j > 0 && steps < 3 {
        j -= 1;
        steps += 1;
        let w = tokens[j].as_str();
        if HAVE_FORMS.contains(&w) || BE_FORMS.contains(&w) {
            return true;
        }
        if tags[j] != Tag::Rb {
            return false;
        }
    }
    false
}

fn nounish(c: &[Tag]) -> bool {
    c.iter().any(|t| t.is_common_noun() || t.is_adjective())
}

/// Tags a lowercased sentence. Never fails; unknown words fall back to
/// suffix rules and finally NN.
pub fn tag(sentence: &Sentence, lex: &MorphLexicon) -> TaggedSentence {
    let tokens = sentence.tokens();
    let cands: Vec<Vec<Tag>> = tokens.iter().map(|t| candidates(t, lex)).collect();
    let mut tags: Vec<Tag> = Vec::with_capacity(tokens.len());

    for i in 0..tokens.len() {
        let c = &cands[i];
        let prev = tags.last().copied();
        let next = cands.get(i + 1);
        let word = tokens[i].as_str();
        let has = |t: Tag| c.contains(&t);

        let chosen = if word == "her" {
            match next {
                Some(n) if nounish(n) => Tag::PrpS,
                _ => Tag::Prp,
            }
        } else if word == "there"
            && next.is_some_and(|n| {
                n.iter()
                    .any(|t| matches!(t, Tag::Vbz | Tag::Vbp | Tag::Vbd))
            })
            && tokens
                .get(i + 1)
                .is_some_and(|w| BE_FORMS.contains(&w.as_str()))
        {
            Tag::Ex
        } else if c.len() == 1 {
            c[0]
        } else {
            let noun = c.iter().copied().find(|t| t.is_common_noun());
            let verb = c.iter().copied().find(|t| t.is_verb());
            let adj = has(Tag::Jj);
            if adj && next.is_some_and(|n| n.first().is_some_and(|t| t.is_common_noun())) {
                Tag::Jj
            } else if let (Some(n), Some(v)) = (noun, verb) {
                if noun_context(prev) && !(v == Tag::Vbg && prev == Some(Tag::In)) {
                    n
                } else if verb_context(prev) || v == Tag::Vbg || v == Tag::Vbd || v == Tag::Vbn {
                    v
                } else {
                    n
                }
            } else if has(Tag::Vbd) && has(Tag::Vbn) {
                Tag::Vbd
            } else if let Some(n) = noun {
                n
            } else if let Some(v) = verb {
                v
            } else {
                c[0]
            }
        };

        let resolved = match chosen {
            Tag::Vbp | Tag::Vb if word != "am" && word != "are" => {
                if needs_bare_infinitive(tokens, &tags, i) {
                    Tag::Vb
                } else {
                    Tag::Vbp
                }
            }
            Tag::Vbd if has(Tag::Vbn) && after_auxiliary(tokens, &tags, i) => Tag::Vbn,
            Tag::Vbd if has(Tag::Vbn) && !verb_context(prev) && prev.is_some() => Tag::Vbn,
            Tag::Vbn
                if has(Tag::Vbd) && !after_auxiliary(tokens, &tags, i) && verb_context(prev) =>
            {
                Tag::Vbd
            }
            t => t,
        };
        tags.push(resolved);
    }
    TaggedSentence::new(tokens.to_vec(), tags).expect("one tag per token")
}
