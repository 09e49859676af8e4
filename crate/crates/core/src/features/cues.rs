use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token};
use crate::corpus::{normalize_text, NormalizationOptions};

/// Cue words and phrases; an entry's id is its position in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct CueLexicon {
    entries: Vec<String>,
    token_seqs: Vec<Vec<String>>,
}

impl From<Vec<String>> for CueLexicon {
    fn from(entries: Vec<String>) -> Self {
        let mut lex = CueLexicon::default();
        for e in entries {
            lex.push_normalized(e);
        }
        lex
    }
}

impl From<CueLexicon> for Vec<String> {
    fn from(lex: CueLexicon) -> Self {
        lex.entries
    }
}

impl CueLexicon {
    /// One entry per line, `#` comments; duplicates after normalization are dropped.
    pub fn from_text(text: &str, norm: &NormalizationOptions) -> Self {
        let mut lex = CueLexicon::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            lex.push(line, norm);
        }
        lex
    }

    /// Appends an entry, returning its id (existing id if already present).
    pub fn push(&mut self, raw: &str, norm: &NormalizationOptions) -> Option<usize> {
        self.push_normalized(normalize_text(raw, norm))
    }

    fn push_normalized(&mut self, entry: String) -> Option<usize> {
        if let Some(id) = self.entries.iter().position(|e| *e == entry) {
            return Some(id);
        }
        let seq: Vec<String> = tokenize(&entry).into_iter().map(|t| t.surface).collect();
        if seq.is_empty() {
            return None;
        }
        self.entries.push(entry);
        self.token_seqs.push(seq);
        Some(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// Ids of every entry occurring as a contiguous token run, ascending.
    pub fn matches(&self, tokens: &[Token]) -> Vec<usize> {
        let present: HashSet<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
        self.token_seqs
            .iter()
            .enumerate()
            .filter(|(_, seq)| present.contains(seq[0].as_str()))
            .filter(|(_, seq)| {
                tokens
                    .windows(seq.len())
                    .any(|w| w.iter().zip(seq.iter()).all(|(t, s)| t.surface == *s))
            })
            .map(|(id, _)| id)
            .collect()
    }
}
