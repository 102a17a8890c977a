use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! ptb_tags {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Penn Treebank part-of-speech tag.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Tag {
            $($variant),*
        }

        impl Tag {
            pub const ALL: &'static [Tag] = &[$(Tag::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Tag::$variant => $text),*
                }
            }
        }

        impl FromStr for Tag {
            type Err = UnknownTag;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Tag::$variant),)*
                    _ => Err(UnknownTag(s.to_string())),
                }
            }
        }
    };
}

ptb_tags! {
    Cc => "CC", Cd => "CD", Dt => "DT", Ex => "EX", Fw => "FW", In => "IN",
    Jj => "JJ", Jjr => "JJR", Jjs => "JJS", Ls => "LS", Md => "MD",
    Nn => "NN", Nns => "NNS", Nnp => "NNP", Nnps => "NNPS", Pdt => "PDT",
    Pos => "POS", Prp => "PRP", PrpS => "PRP$", Rb => "RB", Rbr => "RBR",
    Rbs => "RBS", Rp => "RP", Sym => "SYM", To => "TO", Uh => "UH",
    Vb => "VB", Vbd => "VBD", Vbg => "VBG", Vbn => "VBN", Vbp => "VBP",
    Vbz => "VBZ", Wdt => "WDT", Wp => "WP", WpS => "WP$", Wrb => "WRB",
    Period => ".", Comma => ",", Colon => ":", OpenQuote => "``",
    CloseQuote => "''", LeftParen => "-LRB-", RightParen => "-RRB-",
    Hash => "#", Dollar => "$",
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown POS tag {0:?}")]
pub struct UnknownTag(pub String);

impl Tag {
    pub fn is_noun(self) -> bool {
        matches!(self, Tag::Nn | Tag::Nns | Tag::Nnp | Tag::Nnps)
    }

    pub fn is_common_noun(self) -> bool {
        matches!(self, Tag::Nn | Tag::Nns)
    }

    pub fn is_verb(self) -> bool {
        matches!(
            self,
            Tag::Vb | Tag::Vbd | Tag::Vbg | Tag::Vbn | Tag::Vbp | Tag::Vbz
        )
    }

    pub fn is_adjective(self) -> bool {
        matches!(self, Tag::Jj | Tag::Jjr | Tag::Jjs)
    }

    pub fn is_punctuation(self) -> bool {
        matches!(
            self,
            Tag::Period
                | Tag::Comma
                | Tag::Colon
                | Tag::OpenQuote
                | Tag::CloseQuote
                | Tag::LeftParen
                | Tag::RightParen
        )
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
