use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{dataset_fingerprint, scores, ConfusionMatrix, EvalReport};
use crate::corpus::{split_folds, Corpus, Dialogue, TagSchema};
use crate::error::{Error, Result};
use crate::features::Analyzer;
use crate::hierarchy::{train_hierarchical, DecodeOptions, DecodedUtterance, HierarchicalModel, HierarchyConfig, Structure};

/// Category- and act-level scores of one decoding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub category: EvalReport,
    pub act: EvalReport,
    /// Share of utterances whose predicted act lies outside the predicted category.
    pub incoherence_rate: f64,
    pub incoherent: u64,
    pub count: u64,
}

struct Tally {
    category: ConfusionMatrix,
    act: ConfusionMatrix,
    incoherent: u64,
}

impl Tally {
    fn new(schema: &TagSchema) -> Self {
        Self {
            category: ConfusionMatrix::new(schema.categories().to_vec()),
            act: ConfusionMatrix::new(schema.acts().to_vec()),
            incoherent: 0,
        }
    }

    fn add(&mut self, schema: &TagSchema, dialogue: &Dialogue, decoded: &[DecodedUtterance]) -> Result<()> {
        let mut predictions = decoded.iter();
        for (t, turn) in dialogue.turns.iter().enumerate() {
            for (u, utt) in turn.utterances.iter().enumerate() {
                let unlabeled = || Error::Unlabeled {
                    dialogue: dialogue.id.clone(),
                    turn: t,
                    utterance: u,
                };
                let gold_cat = utt
                    .category
                    .as_deref()
                    .and_then(|c| schema.category_index(c))
                    .ok_or_else(unlabeled)?;
                let gold_act = utt.act.as_deref().and_then(|a| schema.act_index(a)).ok_or_else(unlabeled)?;
                let p = predictions
                    .next()
                    .ok_or_else(|| Error::InvalidInput(format!("missing predictions for dialogue {}", dialogue.id)))?;
                self.category.record(gold_cat, p.category_index)?;
                self.act.record(gold_act, p.act_index)?;
                if schema.category_of(p.act_index) != p.category_index {
                    self.incoherent += 1;
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> Evaluation {
        let count = self.act.total();
        Evaluation {
            category: scores(&self.category),
            act: scores(&self.act),
            incoherence_rate: if count > 0 { self.incoherent as f64 / count as f64 } else { 0.0 },
            incoherent: self.incoherent,
            count,
        }
    }
}

impl Evaluation {
    /// Pools several evaluations by summing their confusion matrices.
    pub fn pooled<'a, I: IntoIterator<Item = &'a Evaluation>>(schema: &TagSchema, parts: I) -> Result<Evaluation> {
        let mut tally = Tally::new(schema);
        for e in parts {
            tally.category.merge(&e.category.confusion)?;
            tally.act.merge(&e.act.confusion)?;
            tally.incoherent += e.incoherent;
        }
        Ok(tally.finish())
    }
}

/// Decodes a labeled corpus and scores the predictions.
pub fn evaluate_model(
    model: &HierarchicalModel,
    corpus: &Corpus,
    opts: &DecodeOptions,
    parallel: bool,
) -> Result<Evaluation> {
    model.check_schema(&corpus.schema)?;
    let decoded = model.decode_all(&corpus.dialogues, opts, parallel)?;
    let mut tally = Tally::new(&model.schema);
    for (d, pred) in corpus.dialogues.iter().zip(&decoded) {
        tally.add(&model.schema, d, pred)?;
    }
    Ok(tally.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_dialogues: usize,
    pub held_out: Vec<String>,
    /// Fingerprint of exactly the corpus the fold's model was trained on.
    pub train_fingerprint: String,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub structure: Structure,
    pub dataset_fingerprint: String,
    pub folds: Vec<FoldReport>,
    pub pooled: Evaluation,
}

fn run_fold(
    corpus: &Corpus,
    folds: &crate::corpus::FoldAssignment,
    fold: usize,
    analyzer: &Analyzer,
    config: &HierarchyConfig,
    opts: &DecodeOptions,
) -> Result<FoldReport> {
    let train = corpus.subset(|d| !folds.in_fold(&d.id, fold));
    let test = corpus.subset(|d| folds.in_fold(&d.id, fold));
    let model = train_hierarchical(&train, analyzer, config)?;
    Ok(FoldReport {
        fold,
        train_dialogues: train.dialogues.len(),
        held_out: test.dialogues.iter().map(|d| d.id.clone()).collect(),
        train_fingerprint: dataset_fingerprint(&train),
        evaluation: evaluate_model(&model, &test, opts, false)?,
    })
}

/// Dialogue-level k-fold cross-validation with predicted context at test time.
/// Folds run on the rayon pool when `config.parallel` is set; the report does
/// not depend on it.
pub fn cross_validate(
    corpus: &Corpus,
    analyzer: &Analyzer,
    config: &HierarchyConfig,
    opts: &DecodeOptions,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let folds = split_folds(corpus, k, seed)?;
    let inner = HierarchyConfig {
        parallel: false,
        ..*config
    };
    let job = |f: usize| {
        run_fold(corpus, &folds, f, analyzer, &inner, opts).map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let reports: Vec<FoldReport> = if config.parallel {
        use rayon::prelude::*;
        (0..k).into_par_iter().map(job).collect::<Result<_>>()?
    } else {
        (0..k).map(job).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<FoldReport> = (0..k).map(job).collect::<Result<_>>()?;

    let pooled = Evaluation::pooled(&corpus.schema, reports.iter().map(|r| &r.evaluation))?;
    Ok(CvReport {
        k,
        seed,
        structure: config.structure,
        dataset_fingerprint: dataset_fingerprint(corpus),
        folds: reports,
        pooled,
    })
}

/// Trains on all of `train` and scores all of `test`.
pub fn cross_domain(
    train: &Corpus,
    test: &Corpus,
    analyzer: &Analyzer,
    config: &HierarchyConfig,
    opts: &DecodeOptions,
) -> Result<Evaluation> {
    let (model_fp, data_fp) = (train.schema.fingerprint(), test.schema.fingerprint());
    if model_fp != data_fp {
        return Err(Error::SchemaMismatch {
            model: model_fp,
            data: data_fp,
        });
    }
    let train_ids: BTreeSet<&str> = train.dialogues.iter().map(|d| d.id.as_str()).collect();
    if let Some(shared) = test.dialogues.iter().find(|d| train_ids.contains(d.id.as_str())) {
        return Err(Error::InvalidInput(format!(
            "dialogue {} appears in both training and test corpora",
            shared.id
        )));
    }
    let model = train_hierarchical(train, analyzer, config)?;
    evaluate_model(&model, test, opts, config.parallel)
}

/// Act macro-F for every (train domain, test domain) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferTable {
    pub domains: Vec<String>,
    /// `macro_f[train][test]`; the diagonal holds in-domain CV scores when requested.
    pub macro_f: Vec<Vec<Option<f64>>>,
}

pub fn transfer_table(
    domains: &[(String, Corpus)],
    analyzer: &Analyzer,
    config: &HierarchyConfig,
    opts: &DecodeOptions,
    in_domain_cv: Option<(usize, u64)>,
) -> Result<TransferTable> {
    let n = domains.len();
    let mut macro_f = vec![vec![None; n]; n];
    for (i, (_, train)) in domains.iter().enumerate() {
        for (j, (_, test)) in domains.iter().enumerate() {
            macro_f[i][j] = if i == j {
                match in_domain_cv {
                    Some((k, seed)) => Some(cross_validate(train, analyzer, config, opts, k, seed)?.pooled.act.macro_f),
                    None => None,
                }
            } else {
                Some(cross_domain(train, test, analyzer, config, opts)?.act.macro_f)
            };
        }
    }
    Ok(TransferTable {
        domains: domains.iter().map(|(name, _)| name.clone()).collect(),
        macro_f,
    })
}
