use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::Analysis;
use crate::error::{Error, Result};

/// Joins the parts of a bigram key.
pub const NGRAM_SEP: char = '\u{25B8}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Namespace {
    Unigram,
    Bigram,
    Pos,
}

/// N-gram → feature id map; ids are dense across all namespaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct Vocabulary {
    entries: Vec<(Namespace, String)>,
    index: HashMap<(Namespace, String), u32>,
    frozen: bool,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    entries: Vec<(Namespace, String)>,
}

impl From<VocabFile> for Vocabulary {
    fn from(file: VocabFile) -> Self {
        let mut v = Vocabulary::new();
        for (ns, key) in file.entries {
            v.insert(ns, key).expect("fresh vocabulary is open");
        }
        v.freeze();
        v
    }
}

impl From<Vocabulary> for VocabFile {
    fn from(v: Vocabulary) -> Self {
        VocabFile { entries: v.entries }
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            index: HashMap::new(),
            frozen: false,
        }
    }

    pub fn insert(&mut self, ns: Namespace, key: String) -> Result<u32> {
        if let Some(&id) = self.index.get(&(ns, key.clone())) {
            return Ok(id);
        }
        if self.frozen {
            return Err(Error::InvalidInput("vocabulary is frozen".into()));
        }
        let id = self.entries.len() as u32;
        self.entries.push((ns, key.clone()));
        self.index.insert((ns, key), id);
        Ok(id)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn get(&self, ns: Namespace, key: &str) -> Option<u32> {
        // TODO: borrow-friendly key type to avoid the allocation per lookup
        self.index.get(&(ns, key.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, ns: Namespace) -> usize {
        self.entries.iter().filter(|(n, _)| *n == ns).count()
    }

    pub fn entries(&self) -> &[(Namespace, String)] {
        &self.entries
    }
}

/// Every n-gram key an analysed utterance can fire, with multiplicity.
pub(crate) fn ngram_keys(analysis: &Analysis, pos_order: usize) -> Vec<(Namespace, String)> {
    let words = &analysis.tokens;
    let mut keys = Vec::new();
    for w in words {
        keys.push((Namespace::Unigram, w.surface.clone()));
    }
    for pair in words.windows(2) {
        keys.push((
            Namespace::Bigram,
            format!("{}{NGRAM_SEP}{}", pair[0].surface, pair[1].surface),
        ));
    }
    for n in 1..=pos_order {
        for gram in analysis.tags.windows(n) {
            let key = gram.iter().map(|t| t.as_str()).collect::<Vec<_>>();
            keys.push((Namespace::Pos, key.join(&NGRAM_SEP.to_string())));
        }
    }
    keys
}

/// Counts n-grams over analysed utterances and keeps those seen at least
/// `min_freq` times, ordered by namespace and then lexicographically.
pub(crate) fn vocabulary_from_analyses<'a, I>(
    analyses: I,
    pos_order: usize,
    min_freq: usize,
) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a Analysis>,
{
    let mut counts: BTreeMap<(Namespace, String), usize> = BTreeMap::new();
    let mut seen_any = false;
    for a in analyses {
        seen_any = true;
        for key in ngram_keys(a, pos_order) {
            *counts.entry(key).or_default() += 1;
        }
    }
    if !seen_any {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = Vocabulary::new();
    for ((ns, key), c) in counts {
        if c >= min_freq {
            vocab.insert(ns, key)?;
        }
    }
    vocab.freeze();
    Ok(vocab)
}
