use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Corpus;
use crate::error::{Error, Result};

/// Dialogue-level partition into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    pub fold_of: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.fold_of.values() {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn in_fold(&self, id: &str, fold: usize) -> bool {
        self.fold_of.get(id) == Some(&fold)
    }
}

/// Shuffles dialogues with a seeded RNG and deals them round-robin into folds.
pub fn split_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    let n = corpus.dialogues.len();
    if n < k {
        return Err(Error::Config(format!(
            "{n} dialogues cannot fill {k} folds"
        )));
    }
    let mut ids: Vec<&str> = corpus.dialogues.iter().map(|d| d.id.as_str()).collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let fold_of = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i % k))
        .collect();
    Ok(FoldAssignment { k, seed, fold_of })
}
