//! The two-layer classifier: a category layer, an act layer that sees the
//! predicted category, and an act-transition prior applied while decoding
//! dialogues left to right.

mod transitions;

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use transitions::{estimate_transitions, transition_counts, TransitionMatrix};

use crate::corpus::{Corpus, Dialogue, TagSchema};
use crate::error::{Error, Result};
use crate::features::{self, Analysis, Analyzer, ContextState, FeatureExtractor, Layer};
use crate::multiclass::{train_multiclass, ClassDistribution, CouplingConfig, MulticlassConfig, MulticlassModel, Strategy};
use crate::sparse::FeatureVector;
use crate::svm::TrainConfig;

pub const FORMAT_VERSION: u32 = 1;

/// How each layer's multiclass decision is built from binary SVMs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
pub enum Structure {
    /// One-vs-one with pairwise coupling.
    Ovo,
    /// One-vs-all with normalized posteriors.
    Ova,
    /// Independent class-vs-rest binaries; layer 2 only considers the acts of
    /// the predicted category.
    Binary,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Binary, Structure::Ovo, Structure::Ova];

    pub fn strategy(self) -> Strategy {
        match self {
            Structure::Ovo => Strategy::Ovo,
            Structure::Ova | Structure::Binary => Strategy::Ova,
        }
    }

    pub fn report_name(self) -> &'static str {
        match self {
            Structure::Ovo => "HierOvO",
            Structure::Ova => "HierOvA",
            Structure::Binary => "HierBinary",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Ovo => "ovo",
            Structure::Ova => "ova",
            Structure::Binary => "binary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchyConfig {
    pub structure: Structure,
    pub svm: TrainConfig,
    pub coupling: CouplingConfig,
    /// Additive smoothing of the transition prior.
    pub alpha: f64,
    /// Minimum corpus frequency for an n-gram to enter the vocabulary.
    pub min_freq: usize,
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        Self {
            structure: Structure::Ovo,
            svm: TrainConfig::default(),
            coupling: CouplingConfig::default(),
            alpha: 1.0,
            min_freq: 1,
            parallel: false,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<()> {
        self.svm.validate()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.min_freq == 0 {
            return Err(Error::Config("min_freq must be at least 1".into()));
        }
        if !(self.coupling.tol > 0.0 && self.coupling.tol.is_finite()) || self.coupling.max_iter == 0 {
            return Err(Error::Config("coupling tol and max_iter must be positive".into()));
        }
        Ok(())
    }

    fn multiclass(&self) -> MulticlassConfig {
        MulticlassConfig {
            svm: self.svm,
            coupling: self.coupling,
            parallel: self.parallel,
        }
    }
}

/// A multiclass model over the classes seen in training, reporting
/// distributions over the full label set (unseen classes get zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerModel {
    /// Label indices covered by `model`, ascending.
    pub classes: Vec<usize>,
    pub num_labels: usize,
    pub model: MulticlassModel,
}

impl LayerModel {
    fn train(
        samples: &[FeatureVector],
        labels: &[usize],
        num_labels: usize,
        structure: Structure,
        config: &MulticlassConfig,
    ) -> Result<Self> {
        let mut present = vec![false; num_labels];
        for &y in labels {
            present[y] = true;
        }
        let classes: Vec<usize> = (0..num_labels).filter(|&c| present[c]).collect();
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }
        let mut local = vec![usize::MAX; num_labels];
        for (i, &c) in classes.iter().enumerate() {
            local[c] = i;
        }
        let local_labels: Vec<usize> = labels.iter().map(|&y| local[y]).collect();
        let model = train_multiclass(structure.strategy(), samples, &local_labels, classes.len(), config)?;
        Ok(Self {
            classes,
            num_labels,
            model,
        })
    }

    pub fn distribution(&self, x: &FeatureVector, coupling: &CouplingConfig) -> Result<ClassDistribution> {
        let local = self.model.predict_distribution(x, coupling)?;
        let mut probs = vec![0.0; self.num_labels];
        for (&c, &p) in self.classes.iter().zip(&local.probs) {
            probs[c] = p;
        }
        Ok(ClassDistribution { probs })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOptions {
    /// Skip the transition prior: acts are the layer-2 argmax.
    pub uniform_transitions: bool,
    /// Only allow acts of the predicted category.
    pub strict_hierarchy: bool,
    /// Feed gold rather than predicted labels forward as context.
    pub gold_context: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedUtterance {
    pub category: String,
    pub act: String,
    pub category_index: usize,
    pub act_index: usize,
    pub category_dist: ClassDistribution,
    /// Layer-2 output before the transition prior.
    pub act_posterior: ClassDistribution,
    pub act_dist: ClassDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    pub schema: TagSchema,
    pub extractor: FeatureExtractor,
    pub layer1: LayerModel,
    pub layer2: LayerModel,
    pub transitions: TransitionMatrix,
    pub config: HierarchyConfig,
    /// Training used gold previous labels as context.
    pub teacher_forcing: bool,
}

/// Feature vectors and labels for both layers, built with gold context.
pub struct TrainingSet {
    pub l1: Vec<FeatureVector>,
    pub l2: Vec<FeatureVector>,
    pub categories: Vec<usize>,
    pub acts: Vec<usize>,
}

fn gold_labels(corpus: &Corpus) -> Result<Vec<(usize, usize)>> {
    let schema = &corpus.schema;
    let mut out = Vec::with_capacity(corpus.num_utterances());
    for d in &corpus.dialogues {
        for (t, turn) in d.turns.iter().enumerate() {
            for (u, utt) in turn.utterances.iter().enumerate() {
                let unlabeled = || Error::Unlabeled {
                    dialogue: d.id.clone(),
                    turn: t,
                    utterance: u,
                };
                let act = utt.act.as_deref().and_then(|a| schema.act_index(a)).ok_or_else(unlabeled)?;
                let category = utt
                    .category
                    .as_deref()
                    .and_then(|c| schema.category_index(c))
                    .ok_or_else(unlabeled)?;
                out.push((category, act));
            }
        }
    }
    Ok(out)
}

/// Extracts teacher-forced features for every utterance of `corpus`.
pub fn training_set(
    corpus: &Corpus,
    extractor: &FeatureExtractor,
    analyses: &[Analysis],
) -> Result<TrainingSet> {
    let labels = gold_labels(corpus)?;
    let n = labels.len();
    let mut set = TrainingSet {
        l1: Vec::with_capacity(n),
        l2: Vec::with_capacity(n),
        categories: Vec::with_capacity(n),
        acts: Vec::with_capacity(n),
    };
    let mut i = 0;
    for d in &corpus.dialogues {
        let mut ctx = ContextState::initial();
        for turn in &d.turns {
            for utt in &turn.utterances {
                let (category, act) = labels[i];
                let a = &analyses[i];
                let len = turn.utterances.len();
                set.l1.push(extractor.from_analysis(a, utt.speaker, len, &ctx, Layer::L1, None)?);
                set.l2.push(extractor.from_analysis(a, utt.speaker, len, &ctx, Layer::L2, Some(category))?);
                set.categories.push(category);
                set.acts.push(act);
                ctx = ContextState::after(act, category, utt.speaker);
                i += 1;
            }
        }
    }
    Ok(set)
}

/// Trains both layers and the transition prior on a fully labeled corpus.
pub fn train_hierarchical(corpus: &Corpus, analyzer: &Analyzer, config: &HierarchyConfig) -> Result<HierarchicalModel> {
    config.validate()?;
    if corpus.num_utterances() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let schema = &corpus.schema;
    gold_labels(corpus)?;
    let analyses: Vec<Analysis> = corpus
        .dialogues
        .iter()
        .flat_map(|d| d.utterances().map(|(_, u)| analyzer.analyze(&u.text)))
        .collect();
    let vocab = features::vocabulary_from_analyses(&analyses, analyzer.pos_order, config.min_freq)?;
    let extractor = FeatureExtractor::new(analyzer.clone(), vocab, schema.num_acts(), schema.num_categories())?;
    let set = training_set(corpus, &extractor, &analyses)?;

    let mut seen = vec![false; schema.num_acts()];
    for &a in &set.acts {
        seen[a] = true;
    }
    let missing: Vec<&str> = schema
        .acts()
        .iter()
        .zip(&seen)
        .filter(|(_, &s)| !s)
        .map(|(a, _)| a.as_str())
        .collect();
    if !missing.is_empty() {
        log::info!("acts absent from training data cannot be predicted: {}", missing.join(", "));
    }

    let mc = config.multiclass();
    let layer1 = LayerModel::train(&set.l1, &set.categories, schema.num_categories(), config.structure, &mc)?;
    let layer2 = LayerModel::train(&set.l2, &set.acts, schema.num_acts(), config.structure, &mc)?;
    let transitions = estimate_transitions(corpus, schema, config.alpha)?;
    Ok(HierarchicalModel {
        schema: schema.clone(),
        extractor,
        layer1,
        layer2,
        transitions,
        config: *config,
        teacher_forcing: true,
    })
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    format_version: u32,
    schema_fingerprint: String,
    #[serde(flatten)]
    model: &'a HierarchicalModel,
}

#[derive(Deserialize)]
struct ModelFileIn {
    #[allow(dead_code)]
    format_version: u32,
    #[serde(flatten)]
    model: HierarchicalModel,
}

impl HierarchicalModel {
    pub fn schema_fingerprint(&self) -> String {
        self.schema.fingerprint()
    }

    /// Errors unless `schema` is the schema this model was trained with.
    pub fn check_schema(&self, schema: &TagSchema) -> Result<()> {
        let (model, data) = (self.schema.fingerprint(), schema.fingerprint());
        if model == data {
            Ok(())
        } else {
            Err(Error::SchemaMismatch { model, data })
        }
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let file = ModelFileOut {
            format_version: FORMAT_VERSION,
            schema_fingerprint: self.schema_fingerprint(),
            model: self,
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.save(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(input)?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::InvalidInput("model file has no format_version".into()))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::FormatVersion {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let file: ModelFileIn = serde_json::from_value(value)?;
        Ok(file.model)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }

    /// Layer-2 routing is forced for the binary structure.
    fn strict(&self, opts: &DecodeOptions) -> bool {
        opts.strict_hierarchy || self.config.structure == Structure::Binary
    }

    /// Classifies one analyzed utterance given its context.
    pub fn classify_analysis(
        &self,
        analysis: &Analysis,
        speaker: crate::corpus::SpeakerRole,
        turn_len: usize,
        ctx: &ContextState,
        opts: &DecodeOptions,
    ) -> Result<DecodedUtterance> {
        let coupling = &self.config.coupling;
        let x1 = self
            .extractor
            .from_analysis(analysis, speaker, turn_len, ctx, Layer::L1, None)?;
        let category_dist = self.layer1.distribution(&x1, coupling)?;
        let category = category_dist.argmax();

        let x2 = self
            .extractor
            .from_analysis(analysis, speaker, turn_len, ctx, Layer::L2, Some(category))?;
        let mut act_posterior = self.layer2.distribution(&x2, coupling)?;
        if self.strict(opts) {
            let allowed: Vec<usize> = self.schema.acts_in_category(category).collect();
            let mut masked = vec![0.0; act_posterior.len()];
            for &a in &allowed {
                masked[a] = act_posterior.probs[a];
            }
            if masked.iter().sum::<f64>() > 0.0 {
                act_posterior = ClassDistribution::normalized(masked);
            } else {
                for &a in &allowed {
                    masked[a] = 1.0;
                }
                act_posterior = ClassDistribution::normalized(masked);
            }
        }
        let act_dist = if opts.uniform_transitions {
            act_posterior.clone()
        } else {
            let column = self.transitions.column(ctx.prev_act);
            ClassDistribution::normalized(act_posterior.probs.iter().zip(column).map(|(p, t)| p * t).collect())
        };
        let act = act_dist.argmax();
        Ok(DecodedUtterance {
            category: self.schema.categories()[category].clone(),
            act: self.schema.acts()[act].clone(),
            category_index: category,
            act_index: act,
            category_dist,
            act_posterior,
            act_dist,
        })
    }

    pub fn classify_utterance(
        &self,
        utt: &crate::corpus::Utterance,
        turn: &crate::corpus::Turn,
        ctx: &ContextState,
        opts: &DecodeOptions,
    ) -> Result<DecodedUtterance> {
        let analysis = self.extractor.analyzer.analyze(&utt.text);
        self.classify_analysis(&analysis, utt.speaker, turn.utterances.len(), ctx, opts)
    }

    /// Greedy left-to-right decode; each utterance sees the previous
    /// utterance's predicted labels (or gold labels with `gold_context`).
    pub fn decode_dialogue(&self, dialogue: &Dialogue, opts: &DecodeOptions) -> Result<Vec<DecodedUtterance>> {
        if dialogue.num_utterances() == 0 {
            return Err(Error::EmptyDialogue(dialogue.id.clone()));
        }
        let mut out = Vec::with_capacity(dialogue.num_utterances());
        let mut ctx = ContextState::initial();
        for (t, turn) in dialogue.turns.iter().enumerate() {
            for (u, utt) in turn.utterances.iter().enumerate() {
                let decoded = self.classify_utterance(utt, turn, &ctx, opts)?;
                ctx = if opts.gold_context {
                    let gold = utt
                        .act
                        .as_deref()
                        .and_then(|a| self.schema.act_index(a))
                        .zip(utt.category.as_deref().and_then(|c| self.schema.category_index(c)));
                    let (act, category) = gold.ok_or_else(|| Error::Unlabeled {
                        dialogue: dialogue.id.clone(),
                        turn: t,
                        utterance: u,
                    })?;
                    ContextState::after(act, category, utt.speaker)
                } else {
                    ContextState::after(decoded.act_index, decoded.category_index, utt.speaker)
                };
                out.push(decoded);
            }
        }
        Ok(out)
    }

    /// Decodes dialogues independently, in parallel when enabled; output order
    /// follows input order.
    pub fn decode_all(
        &self,
        dialogues: &[Dialogue],
        opts: &DecodeOptions,
        parallel: bool,
    ) -> Result<Vec<Vec<DecodedUtterance>>> {
        #[cfg(feature = "parallel")]
        if parallel {
            use rayon::prelude::*;
            return dialogues.par_iter().map(|d| self.decode_dialogue(d, opts)).collect();
        }
        let _ = parallel;
        dialogues.iter().map(|d| self.decode_dialogue(d, opts)).collect()
    }
}

/// Copy of `dialogue` with predicted acts written into the label fields.
/// The category written is the one the act belongs to, so the result is a
/// valid corpus even when layer 1 disagreed with layer 2.
pub fn label_dialogue(dialogue: &Dialogue, decoded: &[DecodedUtterance], schema: &TagSchema) -> Dialogue {
    let mut out = dialogue.clone();
    for (utt, d) in out.utterances_mut().zip(decoded) {
        utt.category = Some(schema.categories()[schema.category_of(d.act_index)].clone());
        utt.act = Some(d.act.clone());
    }
    out
}
