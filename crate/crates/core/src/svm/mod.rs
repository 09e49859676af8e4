//! Binary soft-margin linear SVMs: SMO training and Platt calibration.

mod platt;
mod smo;

use serde::{Deserialize, Serialize};

pub use platt::{fit_platt, Platt};
pub use smo::train_smo;

use crate::error::{Error, Result};
use crate::sparse::FeatureVector;

/// Posteriors are kept this far away from 0 and 1.
const PROB_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Box constraint.
    pub c: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Consecutive passes without an update before stopping.
    pub max_passes: usize,
    /// Hard cap on the number of passes.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 || self.max_iter == 0 {
            return Err(Error::Config("max_passes and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    #[serde(with = "sparse_weights")]
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Non-zero dual multipliers by training-sample index. Not persisted.
    #[serde(skip)]
    pub alphas: Vec<(usize, f64)>,
    pub platt: Option<Platt>,
}

impl BinarySvmModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w·x + b`; ids beyond the model dimension contribute nothing.
    pub fn decision_value(&self, x: &FeatureVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    /// Fits the sigmoid on this model's decision values over `samples`.
    pub fn calibrate(&mut self, samples: &[FeatureVector], labels: &[i8]) -> Result<()> {
        let values: Vec<f64> = samples.iter().map(|x| self.decision_value(x)).collect();
        self.platt = Some(fit_platt(&values, labels)?);
        Ok(())
    }

    pub fn is_calibrated(&self) -> bool {
        self.platt.is_some()
    }

    /// Calibrated P(y = +1 | x), strictly inside (0, 1).
    pub fn posterior(&self, x: &FeatureVector) -> Result<f64> {
        let platt = self.platt.ok_or(Error::Uncalibrated)?;
        Ok(platt
            .probability(self.decision_value(x))
            .clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
    }

    /// Dual objective `Σα − ½‖w‖²` (linear kernel).
    pub fn dual_objective(&self) -> f64 {
        let sum: f64 = self.alphas.iter().map(|&(_, a)| a).sum();
        let norm: f64 = self.weights.iter().map(|w| w * w).sum();
        sum - 0.5 * norm
    }
}

/// Weight vectors are mostly zero, so they are stored as `(id, value)` pairs.
mod sparse_weights {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Sparse {
        dim: usize,
        entries: Vec<(usize, f64)>,
    }

    pub fn serialize<S: Serializer>(w: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let entries = w.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
        Sparse { dim: w.len(), entries }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let sparse = Sparse::deserialize(d)?;
        let mut w = vec![0.0; sparse.dim];
        for (i, v) in sparse.entries {
            *w.get_mut(i)
                .ok_or_else(|| D::Error::custom(format!("weight id {i} outside dimension {}", sparse.dim)))? = v;
        }
        Ok(w)
    }
}

/// One broken optimality condition.
#[derive(Debug, Clone, PartialEq)]
pub struct KktViolation {
    pub index: usize,
    pub alpha: f64,
    pub margin: f64,
}

/// Checks the KKT conditions of a trained model against its training data.
pub fn kkt_violations(
    model: &BinarySvmModel,
    samples: &[FeatureVector],
    labels: &[i8],
    c: f64,
    tol: f64,
) -> Vec<KktViolation> {
    let mut alpha = vec![0.0; samples.len()];
    for &(i, a) in &model.alphas {
        alpha[i] = a;
    }
    samples
        .iter()
        .zip(labels)
        .zip(&alpha)
        .enumerate()
        .filter_map(|(index, ((x, &y), &a))| {
            let margin = y as f64 * model.decision_value(x);
            let ok = if a <= 0.0 {
                margin >= 1.0 - tol
            } else if a >= c {
                margin <= 1.0 + tol
            } else {
                (margin - 1.0).abs() <= tol
            };
            (!ok).then_some(KktViolation {
                index,
                alpha: a,
                margin,
            })
        })
        .collect()
}
