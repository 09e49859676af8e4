use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::dataset_fingerprint;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::Analyzer;
use crate::hierarchy::{train_hierarchical, HierarchyConfig, Structure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub structure: Structure,
    pub name: String,
    /// Median training time.
    pub train_seconds: f64,
    pub runs: Vec<f64>,
    /// Binary SVMs trained across both layers.
    pub binary_models: usize,
    pub dataset_fingerprint: String,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Times single-threaded training of every hierarchy structure on the same
/// data and seeds. Repetitions are interleaved across structures.
pub fn benchmark_structures(
    corpus: &Corpus,
    analyzer: &Analyzer,
    config: &HierarchyConfig,
    repetitions: usize,
) -> Result<Vec<TimingReport>> {
    if repetitions < 1 {
        return Err(Error::Config("benchmark needs at least one repetition".into()));
    }
    let fingerprint = dataset_fingerprint(corpus);
    let mut runs = vec![Vec::with_capacity(repetitions); Structure::ALL.len()];
    let mut models = vec![0; Structure::ALL.len()];
    for _ in 0..repetitions {
        for (s, structure) in Structure::ALL.iter().enumerate() {
            let cfg = HierarchyConfig {
                structure: *structure,
                parallel: false,
                ..*config
            };
            let start = Instant::now();
            let model = train_hierarchical(corpus, analyzer, &cfg)?;
            runs[s].push(start.elapsed().as_secs_f64());
            models[s] = model.layer1.model.num_binary_models() + model.layer2.model.num_binary_models();
        }
    }
    Ok(Structure::ALL
        .iter()
        .zip(runs)
        .zip(models)
        .map(|((structure, runs), binary_models)| TimingReport {
            structure: *structure,
            name: structure.report_name().to_string(),
            train_seconds: median(&runs),
            runs,
            binary_models,
            dataset_fingerprint: fingerprint.clone(),
        })
        .collect())
}
