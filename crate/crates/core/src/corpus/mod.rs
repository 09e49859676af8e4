//! Dialogue data model: corpus, dialogues, turns and utterances.
//!
//! A corpus file is JSON Lines with one dialogue per line; the tag schema
//! lives in a separate JSON document. See [`parse_corpus`] and
//! [`write_corpus`].

mod folds;
mod normalize;
mod parse;
mod schema;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use folds::{split_folds, FoldAssignment};
pub use normalize::{normalize_text, NormalizationOptions};
pub use parse::{parse_corpus, parse_corpus_str, write_corpus, write_dialogue_line};
pub use schema::TagSchema;
pub use validate::{validate_corpus, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeakerRole {
    Operator,
    Customer,
}

impl SpeakerRole {
    pub const ALL: [SpeakerRole; 2] = [SpeakerRole::Operator, SpeakerRole::Customer];

    pub fn index(self) -> usize {
        match self {
            SpeakerRole::Operator => 0,
            SpeakerRole::Customer => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            SpeakerRole::Operator => SpeakerRole::Customer,
            SpeakerRole::Customer => SpeakerRole::Operator,
        }
    }
}

impl fmt::Display for SpeakerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeakerRole::Operator => "operator",
            SpeakerRole::Customer => "customer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
pub enum Genre {
    Bank,
    Flight,
    Im,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub text: String,
    pub speaker: SpeakerRole,
    pub category: Option<String>,
    pub act: Option<String>,
    pub index_in_turn: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub speaker: SpeakerRole,
    pub utterances: Vec<Utterance>,
}

impl Turn {
    /// Builds a turn from raw texts, fixing up speaker and index fields.
    pub fn new(speaker: SpeakerRole, utterances: Vec<Utterance>) -> Self {
        let utterances = utterances
            .into_iter()
            .enumerate()
            .map(|(i, mut u)| {
                u.speaker = speaker;
                u.index_in_turn = i;
                u
            })
            .collect();
        Self {
            speaker,
            utterances,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    pub id: String,
    pub genre: Genre,
    pub turns: Vec<Turn>,
}

impl Dialogue {
    /// Utterances in dialogue order together with their enclosing turn.
    pub fn utterances(&self) -> impl Iterator<Item = (&Turn, &Utterance)> {
        self.turns
            .iter()
            .flat_map(|t| t.utterances.iter().map(move |u| (t, u)))
    }

    pub fn utterances_mut(&mut self) -> impl Iterator<Item = &mut Utterance> {
        self.turns.iter_mut().flat_map(|t| t.utterances.iter_mut())
    }

    pub fn num_utterances(&self) -> usize {
        self.turns.iter().map(|t| t.utterances.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
    pub schema: TagSchema,
}

impl Corpus {
    pub fn new(schema: TagSchema) -> Self {
        Self {
            dialogues: Vec::new(),
            schema,
        }
    }

    pub fn num_utterances(&self) -> usize {
        self.dialogues.iter().map(Dialogue::num_utterances).sum()
    }

    /// A corpus over the same schema containing only the selected dialogues.
    pub fn subset<F: Fn(&Dialogue) -> bool>(&self, keep: F) -> Corpus {
        Corpus {
            dialogues: self.dialogues.iter().filter(|d| keep(d)).cloned().collect(),
            schema: self.schema.clone(),
        }
    }

    pub fn stats(&self) -> CorpusStats {
        let mut stats = CorpusStats {
            dialogues: self.dialogues.len(),
            ..CorpusStats::default()
        };
        for d in &self.dialogues {
            stats.turns += d.turns.len();
            for (_, u) in d.utterances() {
                stats.utterances += 1;
                stats.words += crate::features::word_count(&u.text);
            }
        }
        if stats.turns > 0 {
            stats.words_per_turn = stats.words as f64 / stats.turns as f64;
        }
        if stats.utterances > 0 {
            stats.words_per_utterance = stats.words as f64 / stats.utterances as f64;
        }
        stats
    }
}

/// Size figures of the kind used to describe dialogue corpora.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub dialogues: usize,
    pub turns: usize,
    pub utterances: usize,
    pub words: usize,
    pub words_per_turn: f64,
    pub words_per_utterance: f64,
}
