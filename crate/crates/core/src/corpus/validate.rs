use std::collections::HashSet;

use serde::Serialize;

use super::normalize::{normalize_text, NormalizationOptions};
use super::Corpus;

/// One broken invariant, located down to the utterance where applicable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub dialogue: String,
    pub turn: Option<usize>,
    pub utterance: Option<usize>,
    pub rule: &'static str,
}

/// Checks every data-model invariant; an empty result means the corpus is valid.
pub fn validate_corpus(corpus: &Corpus) -> Vec<Violation> {
    let schema = &corpus.schema;
    let check = NormalizationOptions::all();
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for d in &corpus.dialogues {
        let at = |turn: Option<usize>, utterance: Option<usize>, rule| Violation {
            dialogue: d.id.clone(),
            turn,
            utterance,
            rule,
        };
        if !ids.insert(d.id.as_str()) {
            out.push(at(None, None, "duplicate-id"));
        }
        if d.turns.is_empty() {
            out.push(at(None, None, "no-turns"));
        }
        for (t, turn) in d.turns.iter().enumerate() {
            if turn.utterances.is_empty() {
                out.push(at(Some(t), None, "empty-turn"));
            }
            for (u, utt) in turn.utterances.iter().enumerate() {
                let here = |rule| at(Some(t), Some(u), rule);
                if normalize_text(&utt.text, &check).is_empty() {
                    out.push(here("empty-text"));
                }
                if utt.speaker != turn.speaker {
                    out.push(here("speaker-mismatch"));
                }
                if utt.index_in_turn != u {
                    out.push(here("index-gap"));
                }
                let cat = utt.category.as_deref();
                if let Some(c) = cat {
                    if schema.category_index(c).is_none() {
                        out.push(here("unknown-category"));
                    }
                }
                if let Some(a) = utt.act.as_deref() {
                    match schema.category_of_label(a) {
                        None => out.push(here("unknown-act")),
                        Some(owner) => {
                            if cat.is_some_and(|c| c != owner) {
                                out.push(here("act-category-mismatch"));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
