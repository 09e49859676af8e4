use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token};
use crate::corpus::{normalize_text, NormalizationOptions};
use crate::error::{Error, Result};

pub const UNK: &str = "UNK";
pub const VERB: &str = "VERB";

/// Tag inventory of the bundled lexicon tagger.
pub const TAG_INVENTORY: [&str; 13] = [
    "ADJ", "ADV", "CONJ", "INTJ", "NOUN", "NUM", "PART", "PREP", "PRON", "PROPN", "PUNC", VERB, UNK,
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PosTag(pub String);

impl PosTag {
    pub fn unknown() -> Self {
        PosTag(UNK.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_verb(&self) -> bool {
        self.0 == VERB
    }
}

/// Anything that assigns exactly one tag per token.
pub trait PosTagger {
    fn inventory(&self) -> Vec<String>;
    fn tag(&self, tokens: &[Token]) -> Vec<PosTag>;
}

/// Longest-match lookup over a word/phrase → tag lexicon.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(String, String)>", into = "Vec<(String, String)>")]
pub struct LexiconTagger {
    entries: Vec<(String, String)>,
    index: HashMap<Vec<String>, usize>,
    max_len: usize,
}

impl From<Vec<(String, String)>> for LexiconTagger {
    fn from(entries: Vec<(String, String)>) -> Self {
        let mut tagger = LexiconTagger::default();
        for (phrase, tag) in entries {
            tagger.insert(phrase, tag);
        }
        tagger
    }
}

impl From<LexiconTagger> for Vec<(String, String)> {
    fn from(t: LexiconTagger) -> Self {
        t.entries
    }
}

impl LexiconTagger {
    /// Parses `phrase<TAB>TAG` lines; `#` starts a comment line.
    pub fn from_text(text: &str, norm: &NormalizationOptions) -> Result<Self> {
        let mut tagger = LexiconTagger::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (phrase, tag) = line.rsplit_once('\t').ok_or_else(|| Error::Lexicon {
                line: n + 1,
                message: "expected phrase<TAB>tag".into(),
            })?;
            let tag = tag.trim();
            if !TAG_INVENTORY.contains(&tag) {
                return Err(Error::Lexicon {
                    line: n + 1,
                    message: format!("tag {tag:?} is not in the inventory"),
                });
            }
            let phrase = normalize_text(phrase, norm);
            if phrase.is_empty() {
                return Err(Error::Lexicon {
                    line: n + 1,
                    message: "empty phrase".into(),
                });
            }
            tagger.insert(phrase, tag.to_string());
        }
        Ok(tagger)
    }

    fn insert(&mut self, phrase: String, tag: String) {
        let key: Vec<String> = tokenize(&phrase).into_iter().map(|t| t.surface).collect();
        if key.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(key.len());
        // later entries win, one row per phrase
        if let Some(&old) = self.index.get(&key) {
            self.entries[old].1 = tag;
        } else {
            self.index.insert(key, self.entries.len());
            self.entries.push((phrase, tag));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl PosTagger for LexiconTagger {
    fn inventory(&self) -> Vec<String> {
        TAG_INVENTORY.iter().map(|s| s.to_string()).collect()
    }

    fn tag(&self, tokens: &[Token]) -> Vec<PosTag> {
        let mut tags = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let longest = (1..=self.max_len.min(tokens.len() - i)).rev().find_map(|len| {
                let key: Vec<String> =
                    tokens[i..i + len].iter().map(|t| t.surface.clone()).collect();
                self.index.get(&key).map(|&e| (len, &self.entries[e].1))
            });
            match longest {
                Some((len, tag)) => {
                    tags.extend(std::iter::repeat_n(PosTag(tag.clone()), len));
                    i += len;
                }
                None => {
                    tags.push(PosTag::unknown());
                    i += 1;
                }
            }
        }
        tags
    }
}
