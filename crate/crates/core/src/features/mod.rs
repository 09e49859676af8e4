//! Sparse feature encoding of an utterance in its dialogue context.
//!
//! Feature id layout (dimension grows left to right):
//!
//! ```text
//! [ n-gram vocabulary | length | first-verb ×4 | part-of-turn | speaker ×2 |
//!   prev-speaker ×2 | prev-act ×A | category ×C | prev-category ×C | cues ×L ]
//! ```
//!
//! The two category blocks are only filled for the second layer; every other
//! block is shared, so a second-layer vector restricted to the first-layer id
//! range equals the first-layer vector. Cues come last so that growing the
//! cue lexicon never moves an existing id.

mod cues;
mod pos;
mod tokenize;
mod verb;
mod vocab;

use serde::{Deserialize, Serialize};

pub use cues::CueLexicon;
pub use pos::{LexiconTagger, PosTag, PosTagger, TAG_INVENTORY, UNK, VERB};
pub use tokenize::{is_punctuation, is_word, tokenize, word_count, Token};
pub use verb::{first_verb_type, FirstVerbType, VerbLexicon};
pub use vocab::{Namespace, Vocabulary, NGRAM_SEP};

use crate::corpus::{normalize_text, Corpus, NormalizationOptions, SpeakerRole, Turn, Utterance};
use crate::error::{Error, Result};
use crate::sparse::FeatureVector;

const DEFAULT_CUES: &str = include_str!("../../data/cues.txt");
const DEFAULT_POS: &str = include_str!("../../data/pos_lexicon.tsv");
const DEFAULT_VERBS: &str = include_str!("../../data/verbs.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
}

/// Labels of the preceding utterance in dialogue order, as schema indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextState {
    pub prev_act: Option<usize>,
    pub prev_category: Option<usize>,
    pub prev_speaker: Option<SpeakerRole>,
}

impl ContextState {
    pub fn initial() -> Self {
        Self::default()
    }

    pub fn after(act: usize, category: usize, speaker: SpeakerRole) -> Self {
        Self {
            prev_act: Some(act),
            prev_category: Some(category),
            prev_speaker: Some(speaker),
        }
    }

    pub fn is_initial(&self) -> bool {
        self.prev_act.is_none() && self.prev_category.is_none() && self.prev_speaker.is_none()
    }
}

/// Surface analysis shared by both layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub tokens: Vec<Token>,
    pub tags: Vec<PosTag>,
    pub first_verb: FirstVerbType,
    pub cues: Vec<usize>,
    pub word_count: usize,
}

/// Normalization, tokenization, tagging and lexicon lookups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analyzer {
    pub normalization: NormalizationOptions,
    pub tagger: LexiconTagger,
    pub verbs: VerbLexicon,
    pub cues: CueLexicon,
    /// Highest POS n-gram order used as features.
    pub pos_order: usize,
}

impl Analyzer {
    /// Bundled starter lexicons with every normalization rule on.
    pub fn default_resources() -> Self {
        let norm = NormalizationOptions::all();
        Self {
            normalization: norm,
            tagger: LexiconTagger::from_text(DEFAULT_POS, &norm).expect("bundled POS lexicon"),
            verbs: VerbLexicon::from_text(DEFAULT_VERBS, &norm).expect("bundled verb lexicon"),
            cues: CueLexicon::from_text(DEFAULT_CUES, &norm),
            pos_order: 2,
        }
    }

    pub fn analyze(&self, text: &str) -> Analysis {
        self.analyze_with(text, &self.tagger)
    }

    /// Same as [`Analyzer::analyze`] with a caller-supplied tagger.
    pub fn analyze_with(&self, text: &str, tagger: &dyn PosTagger) -> Analysis {
        let normalized = normalize_text(text, &self.normalization);
        let tokens = tokenize(&normalized);
        let tags = tagger.tag(&tokens);
        let first_verb = first_verb_type(&tokens, &tags, &self.verbs);
        let cues = self.cues.matches(&tokens);
        let word_count = tokens.iter().filter(|t| is_word(t)).count();
        Analysis {
            tokens,
            tags,
            first_verb,
            cues,
            word_count,
        }
    }
}

/// Start offsets of each feature block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub vocab: usize,
    pub length: usize,
    pub first_verb: usize,
    pub part_of_turn: usize,
    pub speaker: usize,
    pub prev_speaker: usize,
    pub prev_act: usize,
    pub category: usize,
    pub prev_category: usize,
    pub cues: usize,
    pub dim: usize,
}

impl FeatureLayout {
    pub fn new(vocab: usize, acts: usize, categories: usize, cues: usize) -> Self {
        let length = vocab;
        let first_verb = length + 1;
        let part_of_turn = first_verb + 4;
        let speaker = part_of_turn + 1;
        let prev_speaker = speaker + 2;
        let prev_act = prev_speaker + 2;
        let category = prev_act + acts;
        let prev_category = category + categories;
        let cues_start = prev_category + categories;
        Self {
            vocab,
            length,
            first_verb,
            part_of_turn,
            speaker,
            prev_speaker,
            prev_act,
            category,
            prev_category,
            cues: cues_start,
            dim: cues_start + cues,
        }
    }

    /// Whether a first-layer vector may use this id.
    pub fn is_l1(&self, id: usize) -> bool {
        id < self.category || (id >= self.cues && id < self.dim)
    }
}

/// Frozen vocabulary plus analyzer: turns utterances into feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub analyzer: Analyzer,
    pub vocab: Vocabulary,
    pub layout: FeatureLayout,
}

impl FeatureExtractor {
    pub fn new(analyzer: Analyzer, vocab: Vocabulary, acts: usize, categories: usize) -> Result<Self> {
        if !vocab.is_frozen() {
            return Err(Error::InvalidInput("vocabulary must be frozen".into()));
        }
        let layout = FeatureLayout::new(vocab.len(), acts, categories, analyzer.cues.len());
        Ok(Self {
            analyzer,
            vocab,
            layout,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn extract(
        &self,
        utt: &Utterance,
        turn: &Turn,
        ctx: &ContextState,
        layer: Layer,
        predicted_category: Option<usize>,
    ) -> Result<FeatureVector> {
        let analysis = self.analyzer.analyze(&utt.text);
        self.from_analysis(&analysis, utt.speaker, turn.utterances.len(), ctx, layer, predicted_category)
    }

    pub fn from_analysis(
        &self,
        analysis: &Analysis,
        speaker: SpeakerRole,
        turn_len: usize,
        ctx: &ContextState,
        layer: Layer,
        predicted_category: Option<usize>,
    ) -> Result<FeatureVector> {
        let l = &self.layout;
        let mut pairs: Vec<(u32, f64)> = Vec::with_capacity(analysis.tokens.len() * 3 + 12);
        let mut ngrams: Vec<u32> = vocab::ngram_keys(analysis, self.analyzer.pos_order)
            .into_iter()
            .filter_map(|(ns, key)| self.vocab.get(ns, &key))
            .collect();
        ngrams.sort_unstable();
        ngrams.dedup();
        pairs.extend(ngrams.into_iter().map(|id| (id, 1.0)));

        let id = |i: usize| i as u32;
        pairs.push((id(l.length), analysis.word_count as f64));
        pairs.push((id(l.first_verb + analysis.first_verb.index()), 1.0));
        if turn_len > 1 {
            pairs.push((id(l.part_of_turn), 1.0));
        }
        pairs.push((id(l.speaker + speaker.index()), 1.0));
        if let Some(s) = ctx.prev_speaker {
            pairs.push((id(l.prev_speaker + s.index()), 1.0));
        }
        if let Some(a) = ctx.prev_act {
            self.check(a, l.category - l.prev_act, "act")?;
            pairs.push((id(l.prev_act + a), 1.0));
        }
        if layer == Layer::L2 {
            let Some(c) = predicted_category else {
                return Err(Error::InvalidInput(
                    "second-layer features need the predicted category".into(),
                ));
            };
            let n_cat = l.prev_category - l.category;
            self.check(c, n_cat, "category")?;
            pairs.push((id(l.category + c), 1.0));
            if let Some(p) = ctx.prev_category {
                self.check(p, n_cat, "category")?;
                pairs.push((id(l.prev_category + p), 1.0));
            }
        }
        pairs.extend(analysis.cues.iter().map(|&c| (id(l.cues + c), 1.0)));
        Ok(FeatureVector::from_pairs(l.dim, pairs))
    }

    fn check(&self, index: usize, bound: usize, what: &str) -> Result<()> {
        if index < bound {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{what} index {index} out of range {bound}")))
        }
    }
}

/// Builds the n-gram vocabulary over every utterance of `corpus`.
pub fn build_vocabulary(corpus: &Corpus, analyzer: &Analyzer, min_freq: usize) -> Result<Vocabulary> {
    let analyses: Vec<Analysis> = corpus
        .dialogues
        .iter()
        .flat_map(|d| d.utterances().map(|(_, u)| analyzer.analyze(&u.text)))
        .collect();
    vocab::vocabulary_from_analyses(&analyses, analyzer.pos_order, min_freq)
}

pub(crate) fn vocabulary_from_analyses<'a, I>(analyses: I, pos_order: usize, min_freq: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a Analysis>,
{
    vocab::vocabulary_from_analyses(analyses, pos_order, min_freq)
}
