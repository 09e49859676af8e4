use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BinarySvmModel, TrainConfig};
use crate::error::{Error, Result};
use crate::sparse::FeatureVector;

/// Relative threshold below which a pair update counts as no progress.
const MIN_PROGRESS: f64 = 1e-12;

struct Solver<'a> {
    x: &'a [FeatureVector],
    y: Vec<f64>,
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    w: Vec<f64>,
    b: f64,
    sq_norm: Vec<f64>,
}

impl Solver<'_> {
    fn output(&self, i: usize) -> f64 {
        self.x[i].dot_dense(&self.w) + self.b
    }

    fn error(&self, i: usize) -> f64 {
        self.output(i) - self.y[i]
    }

    fn violates_kkt(&self, i: usize, e: f64) -> bool {
        let r = self.y[i] * e;
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > 0.0)
    }

    /// Jointly optimizes alpha[i] and alpha[j]; false when no progress is possible.
    fn take_step(&mut self, i: usize, j: usize, e1: f64) -> bool {
        if i == j {
            return false;
        }
        let (a1, a2) = (self.alpha[i], self.alpha[j]);
        let (y1, y2) = (self.y[i], self.y[j]);
        let e2 = self.error(j);
        let s = y1 * y2;
        let c = self.c;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (c + a2 - a1).min(c))
        } else {
            ((a1 + a2 - c).max(0.0), (a1 + a2).min(c))
        };
        if hi - lo <= MIN_PROGRESS * c {
            return false;
        }
        let k11 = self.sq_norm[i];
        let k22 = self.sq_norm[j];
        let k12 = self.x[i].dot(&self.x[j]);
        let eta = k11 + k22 - 2.0 * k12;

        let mut a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // flat or degenerate direction: pick the better end of the segment
            let f1 = y1 * (e1 - self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 - self.b) - s * a1 * k12 - a2 * k22;
            let end_value = |a2e: f64| {
                let a1e = a1 + s * (a2 - a2e);
                a1e * f1 + a2e * f2 + 0.5 * a1e * a1e * k11 + 0.5 * a2e * a2e * k22 + s * a2e * a1e * k12
            };
            let (lo_obj, hi_obj) = (end_value(lo), end_value(hi));
            if lo_obj < hi_obj - 1e-12 {
                lo
            } else if lo_obj > hi_obj + 1e-12 {
                hi
            } else {
                a2
            }
        };
        if a2_new < MIN_PROGRESS * c {
            a2_new = 0.0;
        } else if a2_new > c * (1.0 - MIN_PROGRESS) {
            a2_new = c;
        }
        if (a2_new - a2).abs() < MIN_PROGRESS * (a2_new + a2 + MIN_PROGRESS) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < MIN_PROGRESS * c {
            a1_new = 0.0;
        } else if a1_new > c * (1.0 - MIN_PROGRESS) {
            a1_new = c;
        }
        let (d1, d2) = (a1_new - a1, a2_new - a2);

        let b1 = self.b - e1 - y1 * d1 * k11 - y2 * d2 * k12;
        let b2 = self.b - e2 - y1 * d1 * k12 - y2 * d2 * k22;
        self.b = if a1_new > 0.0 && a1_new < c {
            b1
        } else if a2_new > 0.0 && a2_new < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        self.x[i].add_to(&mut self.w, y1 * d1);
        self.x[j].add_to(&mut self.w, y2 * d2);
        self.alpha[i] = a1_new;
        self.alpha[j] = a2_new;
        true
    }

    /// Tries a random partner first, then every other index from a random offset.
    fn examine(&mut self, i: usize, rng: &mut ChaCha8Rng) -> bool {
        let e1 = self.error(i);
        if !self.violates_kkt(i, e1) {
            return false;
        }
        let n = self.x.len();
        let j = rng.gen_range(0..n - 1);
        let j = if j >= i { j + 1 } else { j };
        if self.take_step(i, j, e1) {
            return true;
        }
        let start = rng.gen_range(0..n);
        (0..n)
            .map(|k| (start + k) % n)
            .any(|j| j != i && self.take_step(i, j, e1))
    }

    /// Bias from the free support vectors, or the midpoint of the feasible
    /// interval when every multiplier sits at a bound.
    fn final_bias(&self) -> f64 {
        let c = self.c;
        let (mut sum, mut free) = (0.0, 0usize);
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.x.len() {
            let wx = self.x[i].dot_dense(&self.w);
            let (a, y) = (self.alpha[i], self.y[i]);
            if a > 0.0 && a < c {
                sum += y - wx;
                free += 1;
            } else {
                // y·(wx + b) ≥ 1 at a = 0, ≤ 1 at a = C
                let bound = y - wx;
                let at_zero = a <= 0.0;
                if (y > 0.0) == at_zero {
                    lower = lower.max(bound);
                } else {
                    upper = upper.min(bound);
                }
            }
        }
        if free > 0 {
            sum / free as f64
        } else if lower.is_finite() && upper.is_finite() {
            0.5 * (lower + upper)
        } else if lower.is_finite() {
            lower
        } else {
            upper
        }
    }
}

/// Trains a soft-margin linear SVM with sequential minimal optimization.
///
/// Each pass visits every sample; a KKT violator is paired with a random
/// partner (falling back to a scan of all partners). Training stops after
/// `max_passes` consecutive passes without a successful update, or after
/// `max_iter` passes in total.
pub fn train_smo(samples: &[FeatureVector], labels: &[i8], config: &TrainConfig) -> Result<BinarySvmModel> {
    config.validate()?;
    if samples.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::InvalidInput("labels must be -1 or +1".into()));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(Error::SingleClass);
    }
    let dim = samples[0].dim();
    if let Some(bad) = samples.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }

    let n = samples.len();
    let mut solver = Solver {
        x: samples,
        y: labels.iter().map(|&y| y as f64).collect(),
        c: config.c,
        tol: config.tol,
        alpha: vec![0.0; n],
        w: vec![0.0; dim],
        b: 0.0,
        sq_norm: samples.iter().map(FeatureVector::squared_norm).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut quiet_passes = 0;
    let mut total_passes = 0;
    while quiet_passes < config.max_passes && total_passes < config.max_iter {
        let mut changed = 0;
        for i in 0..n {
            if solver.examine(i, &mut rng) {
                changed += 1;
            }
        }
        total_passes += 1;
        if changed == 0 {
            quiet_passes += 1;
        } else {
            quiet_passes = 0;
        }
    }
    if total_passes >= config.max_iter {
        log::debug!("SMO stopped at the pass limit ({total_passes} passes)");
    }

    // rebuild the weights from the multipliers so they match exactly
    let mut w = vec![0.0; dim];
    let mut alphas = Vec::new();
    for (i, &a) in solver.alpha.iter().enumerate() {
        if a > 0.0 {
            samples[i].add_to(&mut w, a * solver.y[i]);
            alphas.push((i, a));
        }
    }
    solver.w = w;
    let bias = solver.final_bias();
    Ok(BinarySvmModel {
        weights: solver.w,
        bias,
        alphas,
        platt: None,
    })
}
