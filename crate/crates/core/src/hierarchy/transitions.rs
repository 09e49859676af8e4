use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TagSchema};
use crate::error::{Error, Result};

/// Smoothed P(act | previous act), one column per previous act plus START.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub alpha: f64,
    /// `columns[prev][act]`; the last column is START.
    pub columns: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn uniform(acts: usize) -> Self {
        Self {
            alpha: 1.0,
            columns: vec![vec![1.0 / acts as f64; acts]; acts + 1],
        }
    }

    /// `(count + α) / (total + α·|acts|)` from a `(acts + 1) × acts` count table.
    pub fn from_counts(counts: &[Vec<usize>], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("transition smoothing alpha must be positive, got {alpha}")));
        }
        let acts = counts.first().map_or(0, Vec::len);
        if counts.len() != acts + 1 || counts.iter().any(|c| c.len() != acts) {
            return Err(Error::InvalidInput("transition counts must be (acts + 1) × acts".into()));
        }
        let columns = counts
            .iter()
            .map(|col| {
                let total: usize = col.iter().sum();
                let denom = total as f64 + alpha * acts as f64;
                col.iter().map(|&c| (c as f64 + alpha) / denom).collect()
            })
            .collect();
        Ok(Self { alpha, columns })
    }

    pub fn num_acts(&self) -> usize {
        self.columns.len().saturating_sub(1)
    }

    pub fn start(&self) -> &[f64] {
        &self.columns[self.num_acts()]
    }

    /// Column for the previous act; `None` is the dialogue start.
    pub fn column(&self, prev: Option<usize>) -> &[f64] {
        match prev {
            Some(a) => &self.columns[a],
            None => self.start(),
        }
    }

    pub fn probability(&self, act: usize, prev: Option<usize>) -> f64 {
        self.column(prev)[act]
    }
}

/// Tallies `(acts + 1) × acts` transition counts in dialogue order, across turns.
pub fn transition_counts(corpus: &Corpus, schema: &TagSchema) -> Result<Vec<Vec<usize>>> {
    let acts = schema.num_acts();
    let mut counts = vec![vec![0usize; acts]; acts + 1];
    for d in &corpus.dialogues {
        let mut prev = acts;
        for (t, turn) in d.turns.iter().enumerate() {
            for (u, utt) in turn.utterances.iter().enumerate() {
                let act = utt
                    .act
                    .as_deref()
                    .and_then(|a| schema.act_index(a))
                    .ok_or_else(|| Error::Unlabeled {
                        dialogue: d.id.clone(),
                        turn: t,
                        utterance: u,
                    })?;
                counts[prev][act] += 1;
                prev = act;
            }
        }
    }
    Ok(counts)
}

pub fn estimate_transitions(corpus: &Corpus, schema: &TagSchema, alpha: f64) -> Result<TransitionMatrix> {
    TransitionMatrix::from_counts(&transition_counts(corpus, schema)?, alpha)
}
