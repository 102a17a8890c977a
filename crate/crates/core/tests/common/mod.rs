//! Shared fixtures for integration tests: a seeded generator of clean,
//! grammatical sentences that records the label of every site it plants.

#![allow(dead_code)]

use gec_core::corpus::Sentence;
use gec_core::linguistics::ErrorType;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (singular, plural)
const NOUNS: &[(&str, &str)] = &[
    ("dog", "dogs"),
    ("cat", "cats"),
    ("teacher", "teachers"),
    ("student", "students"),
    ("city", "cities"),
    ("box", "boxes"),
    ("child", "children"),
    ("man", "men"),
    ("woman", "women"),
    ("car", "cars"),
    ("river", "rivers"),
    ("friend", "friends"),
    ("family", "families"),
    ("story", "stories"),
    ("country", "countries"),
    ("church", "churches"),
    ("knife", "knives"),
    ("apple", "apples"),
    ("idea", "ideas"),
    ("engine", "engines"),
    ("girl", "girls"),
    ("boy", "boys"),
    ("doctor", "doctors"),
    ("garden", "gardens"),
];

/// (base, third singular, past, participle, gerund)
const VERBS: &[(&str, &str, &str, &str, &str)] = &[
    ("like", "likes", "liked", "liked", "liking"),
    ("follow", "follows", "followed", "followed", "following"),
    ("visit", "visits", "visited", "visited", "visiting"),
    ("watch", "watches", "watched", "watched", "watching"),
    ("carry", "carries", "carried", "carried", "carrying"),
    ("study", "studies", "studied", "studied", "studying"),
    ("help", "helps", "helped", "helped", "helping"),
    ("find", "finds", "found", "found", "finding"),
    ("know", "knows", "knew", "known", "knowing"),
    ("see", "sees", "saw", "seen", "seeing"),
    ("take", "takes", "took", "taken", "taking"),
    ("write", "writes", "wrote", "written", "writing"),
    ("give", "gives", "gave", "given", "giving"),
    ("make", "makes", "made", "made", "making"),
    ("bring", "brings", "brought", "brought", "bringing"),
    ("build", "builds", "built", "built", "building"),
];

const ADJECTIVES: &[&str] = &[
    "big", "small", "old", "young", "happy", "red", "green", "quiet", "strange", "famous", "heavy",
    "bright",
];

const PREPOSITIONS: &[&str] = &["in", "to", "of", "on", "by", "for", "with", "about"];

/// A planted site: `(error type, position, label)`. For articles the
/// position is the first word of the noun phrase after any article.
pub type Planted = (ErrorType, usize, usize);

#[derive(Debug, Clone)]
pub struct CleanSentence {
    pub sentence: Sentence,
    pub planted: Vec<Planted>,
    /// Sites the generator emits but which cannot be regenerated from
    /// their label ("are" as a verb-form target).
    pub unreconstructable: Vec<(ErrorType, usize)>,
}

struct Builder {
    tokens: Vec<String>,
    planted: Vec<Planted>,
    unreconstructable: Vec<(ErrorType, usize)>,
}

impl Builder {
    fn push(&mut self, word: &str, labels: &[(ErrorType, usize)]) {
        let i = self.tokens.len();
        self.planted.extend(labels.iter().map(|&(t, l)| (t, i, l)));
        self.tokens.push(word.to_string());
    }

    /// Returns whether the head noun is plural.
    fn noun_phrase<R: Rng>(&mut self, rng: &mut R) -> bool {
        let plural = rng.gen_bool(0.5);
        let &(sg, pl) = NOUNS.choose(rng).unwrap();
        let noun = if plural { pl } else { sg };
        let adjective = rng.gen_bool(0.35).then(|| *ADJECTIVES.choose(rng).unwrap());
        let first = adjective.unwrap_or(noun);
        let article = match (plural, rng.gen_range(0..3)) {
            (false, 0) | (true, 0) => Some("the"),
            (false, _) if matches!(first.as_bytes()[0], b'a' | b'e' | b'i' | b'o' | b'u') => {
                Some("an")
            }
            (false, _) => Some("a"),
            (true, _) => None,
        };
        let label = match article {
            Some("the") => 1,
            Some(_) => 0,
            None => 2,
        };
        if let Some(a) = article {
            self.push(a, &[]);
        }
        self.planted
            .push((ErrorType::Article, self.tokens.len(), label));
        if let Some(a) = adjective {
            self.push(a, &[]);
        }
        self.push(noun, &[(ErrorType::NounNumber, usize::from(plural))]);
        plural
    }

    fn subject<R: Rng>(&mut self, rng: &mut R) -> bool {
        if rng.gen_bool(0.3) {
            let &(word, plural) = [
                ("he", false),
                ("she", false),
                ("they", true),
                ("we", true),
                ("you", true),
            ]
            .choose(rng)
            .unwrap();
            self.push(word, &[]);
            plural
        } else {
            self.noun_phrase(rng)
        }
    }

    fn prepositional_phrase<R: Rng>(&mut self, rng: &mut R) {
        let p = rng.gen_range(0..PREPOSITIONS.len());
        self.push(PREPOSITIONS[p], &[(ErrorType::Preposition, p)]);
        self.noun_phrase(rng);
    }
}

pub fn clean_sentence<R: Rng>(rng: &mut R) -> CleanSentence {
    let mut b = Builder {
        tokens: Vec::new(),
        planted: Vec::new(),
        unreconstructable: Vec::new(),
    };
    if rng.gen_bool(0.15) {
        b.prepositional_phrase(rng);
        b.push(",", &[]);
    }
    let plural = b.subject(rng);
    let &(base, third, past, participle, gerund) = VERBS.choose(rng).unwrap();
    let agree = |sg: usize| if plural { 0 } else { sg };
    match rng.gen_range(0..5) {
        0 => {
            let word = if plural { base } else { third };
            let mut labels = vec![(ErrorType::SubjAgreement, agree(1))];
            if plural {
                labels.push((ErrorType::VerbForm, 0));
            }
            b.push(word, &labels);
        }
        1 => b.push(past, &[]),
        2 => {
            b.push(["will", "can", "should"].choose(rng).unwrap(), &[]);
            b.push(base, &[(ErrorType::VerbForm, 0)]);
        }
        3 => {
            let aux = if plural { "are" } else { "is" };
            if plural {
                b.unreconstructable
                    .push((ErrorType::VerbForm, b.tokens.len()));
            }
            b.push(aux, &[(ErrorType::SubjAgreement, agree(1))]);
            b.push(gerund, &[(ErrorType::VerbForm, 1)]);
        }
        _ => {
            let aux = if plural { "have" } else { "has" };
            let mut labels = vec![(ErrorType::SubjAgreement, agree(1))];
            if plural {
                labels.push((ErrorType::VerbForm, 0));
            }
            b.push(aux, &labels);
            b.push(participle, &[(ErrorType::VerbForm, 2)]);
        }
    }
    b.noun_phrase(rng);
    if rng.gen_bool(0.5) {
        b.prepositional_phrase(rng);
    }
    b.push(".", &[]);
    CleanSentence {
        sentence: Sentence::from_tokens(b.tokens),
        planted: b.planted,
        unreconstructable: b.unreconstructable,
    }
}

pub fn clean_corpus(n: usize, seed: u64) -> Vec<CleanSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| clean_sentence(&mut rng)).collect()
}
