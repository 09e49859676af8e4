use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::pos::PosTag;
use super::tokenize::Token;
use crate::corpus::{normalize_text, NormalizationOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstVerbType {
    Active,
    Passive,
    NotApplicable,
    Undefined,
}

impl FirstVerbType {
    pub fn index(self) -> usize {
        match self {
            FirstVerbType::Active => 0,
            FirstVerbType::Passive => 1,
            FirstVerbType::NotApplicable => 2,
            FirstVerbType::Undefined => 3,
        }
    }
}

/// Verb forms known to be active or passive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbLexicon {
    pub active: BTreeSet<String>,
    pub passive: BTreeSet<String>,
}

impl VerbLexicon {
    /// Parses `form<TAB>active|passive` lines with `#` comments.
    pub fn from_text(text: &str, norm: &NormalizationOptions) -> Result<Self> {
        let mut lex = VerbLexicon::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| Error::Lexicon {
                line: n + 1,
                message: message.into(),
            };
            let (form, voice) = line
                .split_once('\t')
                .ok_or_else(|| err("expected form<TAB>active|passive"))?;
            let form = normalize_text(form.trim(), norm);
            if form.is_empty() {
                return Err(err("empty verb form"));
            }
            match voice.trim() {
                "active" => lex.active.insert(form),
                "passive" => lex.passive.insert(form),
                _ => return Err(err("voice must be active or passive")),
            };
        }
        Ok(lex)
    }
}

/// Voice of the first verb-tagged token; passive takes precedence when a
/// form is listed under both.
pub fn first_verb_type(tokens: &[Token], tags: &[PosTag], lexicon: &VerbLexicon) -> FirstVerbType {
    debug_assert_eq!(tokens.len(), tags.len());
    let Some((token, _)) = tokens.iter().zip(tags).find(|(_, tag)| tag.is_verb()) else {
        return FirstVerbType::NotApplicable;
    };
    if lexicon.passive.contains(&token.surface) {
        FirstVerbType::Passive
    } else if lexicon.active.contains(&token.surface) {
        FirstVerbType::Active
    } else {
        FirstVerbType::Undefined
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::pos::{LexiconTagger, PosTagger};
    use crate::features::tokenize::tokenize;

    fn setup() -> (LexiconTagger, VerbLexicon) {
        let norm = NormalizationOptions::all();
        let tagger = LexiconTagger::from_text(
            "اتحجز\tVERB\nعايز\tVERB\nيسافر\tVERB\nالتذكره\tNOUN\nانا\tPRON",
            &norm,
        )
        .unwrap();
        let verbs = VerbLexicon::from_text("اتحجز\tpassive\nعايز\tactive\n", &norm).unwrap();
        (tagger, verbs)
    }

    fn classify(text: &str) -> FirstVerbType {
        let (tagger, verbs) = setup();
        let toks = tokenize(text);
        let tags = tagger.tag(&toks);
        first_verb_type(&toks, &tags, &verbs)
    }

    #[test]
    fn no_verb() {
        assert_eq!(classify("انا التذكره"), FirstVerbType::NotApplicable);
    }

    #[test]
    fn unknown_voice() {
        assert_eq!(classify("انا يسافر"), FirstVerbType::Undefined);
    }

    #[test]
    fn passive_and_active() {
        assert_eq!(classify("التذكره اتحجز"), FirstVerbType::Passive);
        assert_eq!(classify("انا عايز اتحجز"), FirstVerbType::Active);
    }

    #[test]
    fn bad_voice_rejected() {
        assert!(VerbLexicon::from_text("x\tmiddle", &NormalizationOptions::all()).is_err());
    }
}
