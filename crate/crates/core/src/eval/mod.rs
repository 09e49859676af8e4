//! Scoring, cross-validation, cross-domain transfer and training-time
//! benchmarks.

mod bench;
mod cv;
mod render;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use bench::{benchmark_structures, TimingReport};
pub use cv::{
    cross_domain, cross_validate, evaluate_model, transfer_table, CvReport, Evaluation, FoldReport, TransferTable,
};
pub use render::{fmt4, render_cv, render_evaluation, render_report, render_timings, render_transfer};

use crate::corpus::{write_corpus, Corpus};
use crate::error::{Error, Result};

/// Gold × predicted label counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_indices(labels: Vec<String>, gold: &[usize], pred: &[usize]) -> Result<Self> {
        if gold.len() != pred.len() {
            return Err(Error::InvalidInput(format!(
                "{} gold labels but {} predictions",
                gold.len(),
                pred.len()
            )));
        }
        let mut cm = Self::new(labels);
        for (&g, &p) in gold.iter().zip(pred) {
            cm.record(g, p)?;
        }
        Ok(cm)
    }

    pub fn record(&mut self, gold: usize, pred: usize) -> Result<()> {
        let n = self.labels.len();
        if gold >= n || pred >= n {
            return Err(Error::InvalidInput(format!("label index outside 0..{n}")));
        }
        self.counts[gold][pred] += 1;
        Ok(())
    }

    /// Elementwise sum; both matrices must share the label list.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::InvalidInput("confusion matrices have different labels".into()));
        }
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, gold: &str, pred: &str) -> Option<u64> {
        let g = self.labels.iter().position(|l| l == gold)?;
        let p = self.labels.iter().position(|l| l == pred)?;
        Some(self.counts[g][p])
    }
}

/// Builds a confusion matrix from label strings.
pub fn confusion<S: AsRef<str>>(gold: &[S], pred: &[S], labels: &[String]) -> Result<ConfusionMatrix> {
    let index = |l: &str| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::InvalidInput(format!("unknown label {l}")))
    };
    let g = gold.iter().map(|l| index(l.as_ref())).collect::<Result<Vec<_>>>()?;
    let p = pred.iter().map(|l| index(l.as_ref())).collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(labels.to_vec(), &g, &p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassScores>,
    /// Mean F over classes with gold support.
    pub macro_f: f64,
    /// F weighted by gold support.
    pub weighted_f: f64,
    pub accuracy: f64,
    pub count: u64,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn scores(cm: &ConfusionMatrix) -> EvalReport {
    let n = cm.labels.len();
    let total = cm.total();
    let mut per_class = Vec::with_capacity(n);
    let (mut f_sum, mut f_weighted, mut supported, mut correct) = (0.0, 0.0, 0usize, 0u64);
    for i in 0..n {
        let tp = cm.counts[i][i];
        let support: u64 = cm.counts[i].iter().sum();
        let predicted: u64 = cm.counts.iter().map(|row| row[i]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if support > 0 {
            f_sum += f1;
            f_weighted += f1 * support as f64;
            supported += 1;
        }
        correct += tp;
        per_class.push(ClassScores {
            label: cm.labels[i].clone(),
            precision,
            recall,
            f1,
            support,
        });
    }
    EvalReport {
        per_class,
        macro_f: if supported > 0 { f_sum / supported as f64 } else { 0.0 },
        weighted_f: if total > 0 { f_weighted / total as f64 } else { 0.0 },
        accuracy: ratio(correct, total),
        count: total,
        confusion: cm.clone(),
    }
}

/// Short content hash of a corpus in its JSONL serialization.
pub fn dataset_fingerprint(corpus: &Corpus) -> String {
    let mut bytes = Vec::new();
    write_corpus(corpus, &mut bytes).expect("writing to memory");
    hex::encode(&Sha256::digest(&bytes)[..8])
}
