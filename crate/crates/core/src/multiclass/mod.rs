//! Multi-class classification from binary SVMs: one-vs-one with pairwise
//! coupling, and one-vs-all.

mod coupling;

use serde::{Deserialize, Serialize};

pub use coupling::{coupling_divergence, pairwise_coupling, ClassDistribution, CouplingConfig, R_CLAMP};

use crate::error::{Error, Result};
use crate::sparse::FeatureVector;
use crate::svm::{train_smo, BinarySvmModel, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Ovo,
    Ova,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MulticlassConfig {
    pub svm: TrainConfig,
    pub coupling: CouplingConfig,
    /// Train the binary sub-problems on the rayon pool.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    /// The `+1` class.
    pub first: usize,
    /// The `−1` class.
    pub second: usize,
    /// Training samples belonging to either class.
    pub count: usize,
    pub model: BinarySvmModel,
}

/// One calibrated binary SVM per unordered class pair, in `(0,1), (0,2), …` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvoModel {
    pub num_classes: usize,
    pub pairs: Vec<PairModel>,
}

/// One calibrated class-vs-rest SVM per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvaModel {
    pub models: Vec<BinarySvmModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum MulticlassModel {
    Ovo(OvoModel),
    Ova(OvaModel),
}

fn check_inputs(samples: &[FeatureVector], labels: &[usize], k: usize) -> Result<()> {
    if samples.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if k < 2 {
        return Err(Error::SingleClass);
    }
    let mut seen = vec![false; k];
    for &y in labels {
        if y >= k {
            return Err(Error::InvalidInput(format!("label {y} outside 0..{k}")));
        }
        seen[y] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::MissingClass(missing));
    }
    Ok(())
}

fn train_calibrated(samples: &[FeatureVector], labels: &[i8], config: &TrainConfig) -> Result<BinarySvmModel> {
    let mut model = train_smo(samples, labels, config)?;
    model.calibrate(samples, labels)?;
    Ok(model)
}

#[cfg(feature = "parallel")]
fn run_jobs<T, F>(jobs: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        (0..jobs).into_par_iter().map(f).collect()
    } else {
        (0..jobs).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<T, F>(jobs: usize, _parallel: bool, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..jobs).map(f).collect()
}

/// Class pairs `(i, j)` with `i < j` in training order.
pub fn class_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect()
}

/// Trains `k(k−1)/2` pairwise SVMs, each on the samples of its two classes.
/// Every class in `0..k` must occur in `labels`.
pub fn train_one_vs_one(
    samples: &[FeatureVector],
    labels: &[usize],
    k: usize,
    config: &MulticlassConfig,
) -> Result<OvoModel> {
    check_inputs(samples, labels, k)?;
    let pairs = class_pairs(k);
    let trained = run_jobs(pairs.len(), config.parallel, |p| {
        let (first, second) = pairs[p];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (x, &y) in samples.iter().zip(labels) {
            if y == first || y == second {
                xs.push(x.clone());
                ys.push(if y == first { 1 } else { -1 });
            }
        }
        let svm = TrainConfig {
            seed: config.svm.seed.wrapping_add(p as u64),
            ..config.svm
        };
        Ok(PairModel {
            first,
            second,
            count: xs.len(),
            model: train_calibrated(&xs, &ys, &svm)?,
        })
    })?;
    Ok(OvoModel {
        num_classes: k,
        pairs: trained,
    })
}

/// Trains `k` class-vs-rest SVMs on all samples.
pub fn train_one_vs_all(
    samples: &[FeatureVector],
    labels: &[usize],
    k: usize,
    config: &MulticlassConfig,
) -> Result<OvaModel> {
    check_inputs(samples, labels, k)?;
    let models = run_jobs(k, config.parallel, |c| {
        let ys: Vec<i8> = labels.iter().map(|&y| if y == c { 1 } else { -1 }).collect();
        let svm = TrainConfig {
            seed: config.svm.seed.wrapping_add(c as u64),
            ..config.svm
        };
        train_calibrated(samples, &ys, &svm)
    })?;
    Ok(OvaModel { models })
}

pub fn train_multiclass(
    strategy: Strategy,
    samples: &[FeatureVector],
    labels: &[usize],
    k: usize,
    config: &MulticlassConfig,
) -> Result<MulticlassModel> {
    Ok(match strategy {
        Strategy::Ovo => MulticlassModel::Ovo(train_one_vs_one(samples, labels, k, config)?),
        Strategy::Ova => MulticlassModel::Ova(train_one_vs_all(samples, labels, k, config)?),
    })
}

impl OvoModel {
    /// Pairwise posteriors `r[i][j]` (both triangles filled).
    pub fn pairwise_probabilities(&self, x: &FeatureVector) -> Result<Vec<Vec<f64>>> {
        let k = self.num_classes;
        let mut r = vec![vec![0.0; k]; k];
        for pair in &self.pairs {
            let p = pair.model.posterior(x)?;
            r[pair.first][pair.second] = p;
            r[pair.second][pair.first] = 1.0 - p;
        }
        Ok(r)
    }

    pub fn pair_counts(&self, uniform: bool) -> Vec<Vec<f64>> {
        let k = self.num_classes;
        let mut n = vec![vec![1.0; k]; k];
        if !uniform {
            for pair in &self.pairs {
                n[pair.first][pair.second] = pair.count as f64;
                n[pair.second][pair.first] = pair.count as f64;
            }
        }
        n
    }

    pub fn predict_distribution(&self, x: &FeatureVector, coupling: &CouplingConfig) -> Result<ClassDistribution> {
        let r = self.pairwise_probabilities(x)?;
        let n = self.pair_counts(coupling.uniform_weights);
        pairwise_coupling(&r, &n, coupling.tol, coupling.max_iter)
    }
}

impl OvaModel {
    pub fn num_classes(&self) -> usize {
        self.models.len()
    }

    /// Per-class posteriors before normalization.
    pub fn posteriors(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.models.iter().map(|m| m.posterior(x)).collect()
    }

    pub fn predict_distribution(&self, x: &FeatureVector) -> Result<ClassDistribution> {
        Ok(ClassDistribution::normalized(self.posteriors(x)?))
    }
}

impl MulticlassModel {
    pub fn num_classes(&self) -> usize {
        match self {
            Self::Ovo(m) => m.num_classes,
            Self::Ova(m) => m.num_classes(),
        }
    }

    pub fn num_binary_models(&self) -> usize {
        match self {
            Self::Ovo(m) => m.pairs.len(),
            Self::Ova(m) => m.models.len(),
        }
    }

    pub fn predict_distribution(&self, x: &FeatureVector, coupling: &CouplingConfig) -> Result<ClassDistribution> {
        match self {
            Self::Ovo(m) => m.predict_distribution(x, coupling),
            Self::Ova(m) => m.predict_distribution(x),
        }
    }

    pub fn predict(&self, x: &FeatureVector, coupling: &CouplingConfig) -> Result<usize> {
        Ok(self.predict_distribution(x, coupling)?.argmax())
    }
}
