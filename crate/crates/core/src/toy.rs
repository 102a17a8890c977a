//! A small templated grammar with known agreement structure, used by the
//! `demo` command and end-to-end tests. Every noun phrase carries a
//! number-marking determiner, so noun number is recoverable from context
//! even when the verb does not agree (past tense, modals).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;
use crate::linguistics::{inflect, ErrorType, MorphLexicon};
use crate::pipeline::Edit;

/// (singular, plural)
pub const NOUNS: &[(&str, &str)] = &[
    ("dog", "dogs"),
    ("cat", "cats"),
    ("bird", "birds"),
    ("teacher", "teachers"),
    ("student", "students"),
    ("farmer", "farmers"),
    ("doctor", "doctors"),
    ("baby", "babies"),
    ("city", "cities"),
    ("box", "boxes"),
    ("child", "children"),
    ("man", "men"),
    ("woman", "women"),
    ("apple", "apples"),
    ("book", "books"),
    ("car", "cars"),
];

/// (base, third singular, past)
pub const VERBS: &[(&str, &str, &str)] = &[
    ("like", "likes", "liked"),
    ("follow", "follows", "followed"),
    ("admire", "admires", "admired"),
    ("ignore", "ignores", "ignored"),
    ("chase", "chases", "chased"),
    ("carry", "carries", "carried"),
    ("find", "finds", "found"),
    ("know", "knows", "knew"),
    ("meet", "meets", "met"),
    ("teach", "teaches", "taught"),
];

pub const ADJECTIVES: &[&str] = &["big", "small", "old", "young", "happy", "clever", "quiet"];
const SINGULAR_DETS: &[&str] = &["this", "that", "a", "one", "every"];
const PLURAL_DETS: &[&str] = &["these", "those", "two", "many", "several"];
const SINGULAR_PRONOUNS: &[&str] = &["he", "she"];
const PLURAL_PRONOUNS: &[&str] = &["they", "we"];
const MODALS: &[&str] = &["will", "can", "should"];
const PREPOSITIONS: &[&str] = &["with", "near"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    Present,
    Past,
    Modal,
}

/// A generated sentence and the positions of its corruptible words.
#[derive(Debug, Clone, PartialEq)]
pub struct ToySentence {
    pub sentence: Sentence,
    pub tense: Tense,
    /// Index of the agreeing present-tense verb.
    pub verb: Option<usize>,
    /// Index of the object noun.
    pub object: usize,
}

fn noun_phrase<R: Rng>(rng: &mut R, out: &mut Vec<String>) -> usize {
    let plural = rng.gen_bool(0.5);
    let &(sg, pl) = NOUNS.choose(rng).unwrap();
    let det = if plural { PLURAL_DETS } else { SINGULAR_DETS };
    let mut det = *det.choose(rng).unwrap();
    let adjective = rng.gen_bool(0.3).then(|| *ADJECTIVES.choose(rng).unwrap());
    if det == "a"
        && matches!(
            adjective.unwrap_or(sg).as_bytes()[0],
            b'a' | b'e' | b'i' | b'o' | b'u'
        )
    {
        det = "an";
    }
    out.push(det.to_string());
    out.extend(adjective.map(str::to_string));
    out.push(if plural { pl } else { sg }.to_string());
    out.len() - 1
}

/// Generates one sentence.
pub fn sentence<R: Rng>(rng: &mut R) -> ToySentence {
    let mut tokens = Vec::new();
    let singular_subject = if rng.gen_bool(0.25) {
        let sg = rng.gen_bool(0.5);
        let p = if sg {
            SINGULAR_PRONOUNS
        } else {
            PLURAL_PRONOUNS
        };
        tokens.push(p.choose(rng).unwrap().to_string());
        sg
    } else {
        let head = noun_phrase(rng, &mut tokens);
        NOUNS.iter().any(|(s, _)| *s == tokens[head])
    };
    let &(base, third, past) = VERBS.choose(rng).unwrap();
    let tense = match rng.gen_range(0..10) {
        0..=5 => Tense::Present,
        6..=7 => Tense::Past,
        _ => Tense::Modal,
    };
    let verb = match tense {
        Tense::Present => {
            tokens.push(if singular_subject { third } else { base }.to_string());
            Some(tokens.len() - 1)
        }
        Tense::Past => {
            tokens.push(past.to_string());
            None
        }
        Tense::Modal => {
            tokens.push(MODALS.choose(rng).unwrap().to_string());
            tokens.push(base.to_string());
            None
        }
    };
    let object = noun_phrase(rng, &mut tokens);
    if rng.gen_bool(0.3) {
        tokens.push(PREPOSITIONS.choose(rng).unwrap().to_string());
        noun_phrase(rng, &mut tokens);
    }
    tokens.push(".".to_string());
    ToySentence {
        sentence: Sentence::from_tokens(tokens),
        tense,
        verb,
        object,
    }
}

/// `n` sentences from a seeded generator.
pub fn corpus(n: usize, seed: u64) -> Vec<ToySentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sentence(&mut rng)).collect()
}

/// A sentence with one injected error and the edit that repairs it.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrupted {
    pub clean: Sentence,
    pub corrupted: Sentence,
    pub gold: Edit,
}

fn flip_noun(word: &str) -> Option<String> {
    NOUNS.iter().find_map(|&(s, p)| {
        if word == s {
            Some(p.to_string())
        } else if word == p {
            Some(s.to_string())
        } else {
            None
        }
    })
}

/// Injects one error of `kind`: a disagreeing present-tense verb, or an
/// object noun whose number contradicts its determiner. The corrupted
/// form is produced by the inverse of the morphology mapping.
pub fn corrupt(toy: &ToySentence, kind: ErrorType, lex: &MorphLexicon) -> Option<Corrupted> {
    let tokens = toy.sentence.tokens();
    let (index, wrong) = match kind {
        ErrorType::SubjAgreement => {
            let v = toy.verb?;
            let &(base, third, _) = VERBS
                .iter()
                .find(|(b, t, _)| tokens[v] == *b || tokens[v] == *t)?;
            let label = usize::from(tokens[v] == base);
            let wrong = inflect(base, kind, label, lex).ok()?;
            debug_assert_eq!(wrong, if label == 1 { third } else { base });
            (v, wrong)
        }
        ErrorType::NounNumber => {
            let o = toy.object;
            let &(sg, _) = NOUNS
                .iter()
                .find(|(s, p)| tokens[o] == *s || tokens[o] == *p)?;
            let label = usize::from(tokens[o] == sg);
            let wrong = inflect(sg, kind, label, lex).ok()?;
            debug_assert_eq!(Some(&wrong), flip_noun(&tokens[o]).as_ref());
            (o, wrong)
        }
        _ => return None,
    };
    let mut bad = tokens.to_vec();
    bad[index] = wrong;
    Some(Corrupted {
        clean: toy.sentence.clone(),
        corrupted: Sentence::from_tokens(bad),
        gold: Edit::new(index, index + 1, [tokens[index].clone()]).typed(kind),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{find_targets, reconstructs};
    use crate::linguistics::{tag, Tag};

    #[test]
    fn deterministic() {
        assert_eq!(corpus(50, 3), corpus(50, 3));
        assert_ne!(corpus(50, 3), corpus(50, 4));
    }

    #[test]
    fn tagger_reads_the_grammar() {
        let lex = MorphLexicon::english();
        for toy in corpus(500, 1) {
            let ts = tag(&toy.sentence, &lex);
            let tags = ts.tags();
            if let Some(v) = toy.verb {
                assert!(
                    matches!(tags[v], Tag::Vbz | Tag::Vbp),
                    "{} {:?}",
                    toy.sentence,
                    tags
                );
            }
            assert!(
                matches!(tags[toy.object], Tag::Nn | Tag::Nns),
                "{} {:?}",
                toy.sentence,
                tags
            );
            for t in [ErrorType::SubjAgreement, ErrorType::NounNumber] {
                for site in find_targets(&ts, t, &lex) {
                    assert!(
                        reconstructs(&ts, &site, &lex),
                        "{} {t} at {}",
                        toy.sentence,
                        site.position
                    );
                }
            }
            let sa = find_targets(&ts, ErrorType::SubjAgreement, &lex);
            assert_eq!(
                sa.len(),
                usize::from(toy.verb.is_some()),
                "{} {:?}",
                toy.sentence,
                tags
            );
        }
    }

    #[test]
    fn corruption_inverts() {
        let lex = MorphLexicon::english();
        for toy in corpus(200, 2) {
            for kind in [ErrorType::SubjAgreement, ErrorType::NounNumber] {
                let Some(c) = corrupt(&toy, kind, &lex) else {
                    assert!(kind == ErrorType::SubjAgreement && toy.verb.is_none());
                    continue;
                };
                assert_ne!(c.corrupted, c.clean);
                let fixed =
                    crate::pipeline::apply_edits(&c.corrupted, std::slice::from_ref(&c.gold))
                        .unwrap();
                assert_eq!(fixed, c.clean);
            }
        }
    }
}
