//! Lemmatization, inflection and the label ↔ surface-form mapping.
//!
//! Irregular forms come from the lexicon tables. Regular forms follow the
//! usual English spelling rules; when a rule cannot be applied with
//! confidence (unknown word with an ambiguous doubling or plural pattern)
//! inflection reports [`InflectError::NotInflectable`] rather than guessing.

use thiserror::Error;

use super::{ErrorType, MorphLexicon, Tag, VerbSlot};

/// The eight prepositions handled, in label order.
pub const PREPOSITIONS: [&str; 8] = ["in", "to", "of", "on", "by", "for", "with", "about"];

/// Words that start with a vowel letter but take "a".
const A_BEFORE_VOWEL_LETTER: &[&str] = &[
    "one",
    "once",
    "ones",
    "unique",
    "unit",
    "units",
    "united",
    "union",
    "unicorn",
    "uniform",
    "universal",
    "universe",
    "university",
    "universities",
    "usage",
    "use",
    "used",
    "useful",
    "useless",
    "user",
    "users",
    "usual",
    "usually",
    "utensil",
    "utility",
    "utopia",
    "eu",
    "euro",
    "european",
    "eulogy",
    "ewe",
    "uranium",
    "urine",
    "ukulele",
    "unanimous",
];

/// Words that start with a consonant letter but take "an".
const AN_BEFORE_CONSONANT_LETTER: &[&str] = &[
    "hour",
    "hours",
    "hourly",
    "honest",
    "honestly",
    "honesty",
    "honor",
    "honour",
    "honorable",
    "honourable",
    "heir",
    "heiress",
    "herb",
    "mba",
    "fbi",
    "html",
    "x-ray",
    "sos",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InflectError {
    /// The word's morphology is unknown; callers should skip the site.
    #[error("cannot inflect {0:?} with confidence")]
    NotInflectable(String),
    #[error("label {label} out of range for {error_type}")]
    LabelOutOfRange { error_type: ErrorType, label: usize },
    #[error("{0} labels do not map to word inflections")]
    UnsupportedType(ErrorType),
}

pub fn preposition_index(word: &str) -> Option<usize> {
    PREPOSITIONS.iter().position(|&p| p == word)
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn is_alpha_word(w: &str) -> bool {
    !w.is_empty() && w.bytes().all(|b| b.is_ascii_lowercase())
}

fn has_vowel(w: &str) -> bool {
    w.bytes().any(|b| is_vowel(b) || b == b'y')
}

fn vowel_groups(w: &str) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for b in w.bytes() {
        let v = is_vowel(b);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

/// Ends consonant-vowel-consonant with a final consonant other than w/x/y.
fn ends_cvc(w: &str) -> bool {
    let b = w.as_bytes();
    if b.len() < 3 {
        return false;
    }
    let (x, y, z) = (b[b.len() - 3], b[b.len() - 2], b[b.len() - 1]);
    !is_vowel(x) && is_vowel(y) && !is_vowel(z) && !matches!(z, b'w' | b'x' | b'y')
        // "qu" acts as a consonant cluster: quit, quiz
        && !(x == b'u' && b.len() >= 4 && b[b.len() - 4] == b'q')
}

/// Whether a regular verb doubles its final consonant before -ing/-ed.
/// `None` when the answer depends on stress we cannot know.
fn doubles_final(base: &str, lex: &MorphLexicon) -> Option<bool> {
    if !ends_cvc(base) {
        return Some(false);
    }
    if vowel_groups(base) == 1 {
        return Some(true);
    }
    if lex.is_known_verb(base) {
        Some(false)
    } else {
        None
    }
}

fn regular_third(base: &str) -> String {
    let b = base.as_bytes();
    if base.ends_with(['s', 'x', 'z']) || base.ends_with("ch") || base.ends_with("sh") {
        format!("{base}es")
    } else if b.len() > 1 && base.ends_with('y') && !is_vowel(b[b.len() - 2]) {
        format!("{}ies", &base[..base.len() - 1])
    } else if b.len() > 1 && base.ends_with('o') && !is_vowel(b[b.len() - 2]) {
        format!("{base}es")
    } else {
        format!("{base}s")
    }
}

fn regular_gerund(base: &str, lex: &MorphLexicon) -> Option<String> {
    if let Some(stem) = base.strip_suffix("ie") {
        return Some(format!("{stem}ying"));
    }
    if base.ends_with("ee") || base.ends_with("ye") || base.ends_with("oe") {
        return Some(format!("{base}ing"));
    }
    if base.len() > 2 && base.ends_with('e') {
        return Some(format!("{}ing", &base[..base.len() - 1]));
    }
    if doubles_final(base, lex)? {
        let last = &base[base.len() - 1..];
        return Some(format!("{base}{last}ing"));
    }
    Some(format!("{base}ing"))
}

fn regular_past(base: &str, lex: &MorphLexicon) -> Option<String> {
    let b = base.as_bytes();
    if base.ends_with('e') {
        return Some(format!("{base}d"));
    }
    if b.len() > 1 && base.ends_with('y') && !is_vowel(b[b.len() - 2]) {
        return Some(format!("{}ied", &base[..base.len() - 1]));
    }
    if doubles_final(base, lex)? {
        let last = &base[base.len() - 1..];
        return Some(format!("{base}{last}ed"));
    }
    Some(format!("{base}ed"))
}

fn regular_plural(singular: &str, lex: &MorphLexicon) -> Option<String> {
    let b = singular.as_bytes();
    let known = lex.is_known_noun(singular);
    let n = b.len();
    if !known {
        // -f/-fe (leaf, belief), consonant + o (potato, photo) and -is
        // (crisis) plurals are lexical
        let ambiguous = singular.ends_with('f')
            || singular.ends_with("fe")
            || singular.ends_with("is")
            || (n > 1 && singular.ends_with('o') && !is_vowel(b[n - 2]));
        if ambiguous {
            return None;
        }
    }
    if singular.ends_with(['s', 'x', 'z']) || singular.ends_with("ch") || singular.ends_with("sh") {
        Some(format!("{singular}es"))
    } else if n > 1 && singular.ends_with('y') && !is_vowel(b[n - 2]) {
        Some(format!("{}ies", &singular[..n - 1]))
    } else {
        Some(format!("{singular}s"))
    }
}

fn verb_slot_form(base: &str, slot: VerbSlot, lex: &MorphLexicon) -> Option<String> {
    if let Some(p) = lex.irregular_verb(base) {
        let form = match slot {
            VerbSlot::Base => &p.base,
            VerbSlot::ThirdSingular => &p.third_singular,
            VerbSlot::Gerund => &p.gerund,
            VerbSlot::Past => &p.past,
            VerbSlot::Participle => &p.participle,
        };
        return Some(form.clone());
    }
    if !is_alpha_word(base) || !has_vowel(base) {
        return None;
    }
    match slot {
        VerbSlot::Base => Some(base.to_string()),
        VerbSlot::ThirdSingular => Some(regular_third(base)),
        VerbSlot::Gerund => regular_gerund(base, lex),
        VerbSlot::Past | VerbSlot::Participle => regular_past(base, lex),
    }
}

fn plural_form(singular: &str, lex: &MorphLexicon) -> Option<String> {
    if let Some(p) = lex.irregular_plural(singular) {
        return Some(p.to_string());
    }
    if !is_alpha_word(singular) || !has_vowel(singular) {
        return None;
    }
    regular_plural(singular, lex)
}

/// Stems that usually lost a silent -e before a vowel suffix.
fn wants_silent_e(stem: &str) -> bool {
    const ENDINGS: &[&str] = &[
        "v", "c", "iz", "is", "at", "dg", "rg", "bl", "pl", "tl", "gl", "dl", "kl", "zl",
    ];
    let b = stem.as_bytes();
    let n = b.len();
    if ENDINGS.iter().any(|e| stem.ends_with(e)) {
        return true;
    }
    if stem.ends_with('z') && !stem.ends_with("zz") {
        return true;
    }
    n >= 3 && stem.ends_with("ur") && !is_vowel(b[n - 3])
}

fn undoubled(stem: &str) -> Option<&str> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) {
        Some(&stem[..n - 1])
    } else {
        None
    }
}

/// Candidate bases for a suffixed verb form, best guess first.
fn verb_candidates(word: &str, slot: VerbSlot) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |c: &str| {
        if !c.is_empty() && has_vowel(c) && !out.iter().any(|o| o == c) {
            out.push(c.to_string());
        }
    };
    match slot {
        VerbSlot::ThirdSingular => {
            if let Some(stem) = word.strip_suffix("ies") {
                push(&format!("{stem}y"));
            }
            if let Some(stem) = word.strip_suffix("es") {
                push(stem);
            }
            if let Some(stem) = word.strip_suffix('s') {
                push(stem);
            }
        }
        VerbSlot::Gerund => {
            if let Some(stem) = word.strip_suffix("ing") {
                if let Some(u) = undoubled(stem) {
                    if !matches!(&stem[stem.len() - 1..], "l" | "s" | "z" | "f") {
                        push(u);
                    }
                }
                if let Some(s) = stem.strip_suffix('y') {
                    push(&format!("{s}ie"));
                }
                if wants_silent_e(stem) {
                    push(&format!("{stem}e"));
                    push(stem);
                } else {
                    push(stem);
                    push(&format!("{stem}e"));
                }
                if let Some(u) = undoubled(stem) {
                    push(u);
                }
            }
        }
        VerbSlot::Past | VerbSlot::Participle => {
            if let Some(stem) = word.strip_suffix("ied") {
                push(&format!("{stem}y"));
            }
            if let Some(stem) = word.strip_suffix("ed") {
                if let Some(u) = undoubled(stem) {
                    if !matches!(&stem[stem.len() - 1..], "l" | "s" | "z" | "f") {
                        push(u);
                    }
                }
                if wants_silent_e(stem) {
                    push(&format!("{stem}e"));
                    push(stem);
                } else {
                    push(stem);
                    push(&format!("{stem}e"));
                }
                if let Some(u) = undoubled(stem) {
                    push(u);
                }
            }
        }
        VerbSlot::Base => {}
    }
    out
}

fn noun_candidates(word: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |c: &str| {
        if !c.is_empty() && has_vowel(c) && !out.iter().any(|o| o == c) {
            out.push(c.to_string());
        }
    };
    if let Some(stem) = word.strip_suffix("ies") {
        push(&format!("{stem}y"));
    }
    let es_plural = ["sses", "shes", "ches", "xes", "zes", "uses"]
        .iter()
        .any(|e| word.ends_with(e));
    if es_plural {
        push(&word[..word.len() - 2]);
    }
    if let Some(stem) = word.strip_suffix('s') {
        push(stem);
    }
    if let Some(stem) = word.strip_suffix("es") {
        push(stem);
    }
    out
}

fn pick(
    candidates: &[String],
    known: impl Fn(&str) -> bool,
    regenerates: impl Fn(&str) -> bool,
) -> Option<&String> {
    candidates
        .iter()
        .find(|c| known(c) && regenerates(c))
        .or_else(|| candidates.iter().find(|c| regenerates(c)))
}

fn verb_lemma(word: &str, slot: VerbSlot, lex: &MorphLexicon) -> String {
    if let Some((base, _)) = lex.verb_form(word).iter().find(|(_, s)| *s == slot) {
        return base.clone();
    }
    if lex.is_known_verb(word) {
        return word.to_string();
    }
    if slot == VerbSlot::Past {
        if let Some((base, _)) = lex
            .verb_form(word)
            .iter()
            .find(|(_, s)| *s == VerbSlot::Participle)
        {
            return base.clone();
        }
    }
    if slot == VerbSlot::Participle {
        if let Some((base, _)) = lex
            .verb_form(word)
            .iter()
            .find(|(_, s)| *s == VerbSlot::Past)
        {
            return base.clone();
        }
    }
    if let Some((base, _)) = lex.verb_form(word).first() {
        return base.clone();
    }
    let cands = verb_candidates(word, slot);
    let regen = |c: &str| {
        lex.irregular_verb(c).is_none() && verb_slot_form(c, slot, lex).as_deref() == Some(word)
    };
    match pick(&cands, |c| lex.is_known_verb(c), regen) {
        Some(c) => c.clone(),
        None => cands.into_iter().next().unwrap_or_else(|| word.to_string()),
    }
}

fn noun_lemma(word: &str, lex: &MorphLexicon) -> String {
    if let Some(s) = lex.irregular_singular(word) {
        return s.to_string();
    }
    if lex.is_known_noun(word) {
        return word.to_string();
    }
    if word.len() <= 3 || word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    let cands = noun_candidates(word);
    let regen = |c: &str| {
        lex.irregular_plural(c).is_none() && regular_plural(c, lex).as_deref() == Some(word)
    };
    match pick(&cands, |c| lex.is_known_noun(c), regen) {
        Some(c) => c.clone(),
        None => cands.into_iter().next().unwrap_or_else(|| word.to_string()),
    }
}

/// Base form of a verb or singular form of a noun. Words with other tags,
/// or for which no rule applies, come back unchanged.
pub fn lemma(word: &str, tag: Tag, lex: &MorphLexicon) -> String {
    match tag {
        Tag::Vb | Tag::Vbp => match word {
            "am" | "are" | "is" => "be".to_string(),
            _ => word.to_string(),
        },
        Tag::Vbz => verb_lemma(word, VerbSlot::ThirdSingular, lex),
        Tag::Vbg => verb_lemma(word, VerbSlot::Gerund, lex),
        Tag::Vbn => verb_lemma(word, VerbSlot::Participle, lex),
        Tag::Vbd => verb_lemma(word, VerbSlot::Past, lex),
        Tag::Nns | Tag::Nnps => noun_lemma(word, lex),
        _ => word.to_string(),
    }
}

/// Surface form of `base` for class `label` of a word-level error type.
pub fn inflect(
    base: &str,
    error_type: ErrorType,
    label: usize,
    lex: &MorphLexicon,
) -> Result<String, InflectError> {
    if label >= error_type.class_count() {
        return Err(InflectError::LabelOutOfRange { error_type, label });
    }
    let not = || InflectError::NotInflectable(base.to_string());
    let form = match (error_type, label) {
        (ErrorType::VerbForm, 0) => verb_slot_form(base, VerbSlot::Base, lex),
        (ErrorType::VerbForm, 1) => verb_slot_form(base, VerbSlot::Gerund, lex),
        (ErrorType::VerbForm, _) => verb_slot_form(base, VerbSlot::Participle, lex),
        (ErrorType::SubjAgreement, 0) if base == "be" => Some("are".to_string()),
        (ErrorType::SubjAgreement, 0) => verb_slot_form(base, VerbSlot::Base, lex),
        (ErrorType::SubjAgreement, _) => verb_slot_form(base, VerbSlot::ThirdSingular, lex),
        (ErrorType::NounNumber, 0) => is_alpha_word(base).then(|| base.to_string()),
        (ErrorType::NounNumber, _) => plural_form(base, lex),
        (t, _) => return Err(InflectError::UnsupportedType(t)),
    };
    form.ok_or_else(not)
}

/// Class of an observed (word, tag) pair under `error_type`, if the pair is
/// a target of that type.
pub fn surface_label(word: &str, tag: Tag, error_type: ErrorType) -> Option<usize> {
    match error_type {
        ErrorType::VerbForm => match tag {
            Tag::Vb | Tag::Vbp => Some(0),
            Tag::Vbg => Some(1),
            Tag::Vbn => Some(2),
            _ => None,
        },
        ErrorType::SubjAgreement => match tag {
            Tag::Vbp => Some(0),
            Tag::Vbz => Some(1),
            _ => None,
        },
        ErrorType::NounNumber => match tag {
            Tag::Nn => Some(0),
            Tag::Nns => Some(1),
            _ => None,
        },
        ErrorType::Preposition => preposition_index(word),
        ErrorType::Article => match word {
            "a" | "an" => Some(0),
            "the" => Some(1),
            _ => None,
        },
    }
}

/// Every (error type, label) an observed (word, tag) pair carries.
pub fn surface_labels(word: &str, tag: Tag) -> Vec<(ErrorType, usize)> {
    [
        ErrorType::VerbForm,
        ErrorType::SubjAgreement,
        ErrorType::NounNumber,
        ErrorType::Preposition,
    ]
    .into_iter()
    .filter_map(|t| surface_label(word, tag, t).map(|l| (t, l)))
    .collect()
}

fn takes_an(next_word: &str) -> bool {
    let w = next_word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let head = w.split('-').next().unwrap_or(w);
    if A_BEFORE_VOWEL_LETTER.contains(&w) || A_BEFORE_VOWEL_LETTER.contains(&head) {
        return false;
    }
    if AN_BEFORE_CONSONANT_LETTER.contains(&w) || AN_BEFORE_CONSONANT_LETTER.contains(&head) {
        return true;
    }
    if w.starts_with("uni") || w.starts_with("eu") || w.starts_with("use") || w.starts_with("usu") {
        return false;
    }
    matches!(w.bytes().next(), Some(b'a' | b'e' | b'i' | b'o' | b'u'))
}

/// Article for class `label`: 0 → "a"/"an" depending on `next_word`,
/// 1 → "the", 2 → no article.
pub fn article_surface(label: usize, next_word: &str) -> Option<&'static str> {
    match label {
        0 if takes_an(next_word) => Some("an"),
        0 => Some("a"),
        1 => Some("the"),
        _ => None,
    }
}
