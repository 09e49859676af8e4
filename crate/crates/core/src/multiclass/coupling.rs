use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise probabilities are clamped into `[R_CLAMP, 1 − R_CLAMP]`.
pub const R_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Ignore pairwise training-set sizes and weight every pair equally.
    pub uniform_weights: bool,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            uniform_weights: false,
        }
    }
}

/// Probability vector over k classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// Scales non-negative weights to sum to one; all-zero input becomes uniform.
    pub fn normalized(weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total.is_finite() {
            Self {
                probs: weights.into_iter().map(|w| w / total).collect(),
            }
        } else {
            Self::uniform(weights.len())
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Weighted KL divergence between observed `r` and `μ_ij = p_i / (p_i + p_j)`.
pub fn coupling_divergence(p: &[f64], r: &[Vec<f64>], n: &[Vec<f64>]) -> f64 {
    let k = p.len();
    let term = |a: f64, b: f64| if a > 0.0 { a * (a / b).ln() } else { 0.0 };
    let mut total = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let rij = r[i][j].clamp(R_CLAMP, 1.0 - R_CLAMP);
            let mu = p[i] / (p[i] + p[j]);
            total += n[i][j] * (term(rij, mu) + term(1.0 - rij, 1.0 - mu));
        }
    }
    total
}

/// Recovers one class distribution from pairwise probabilities.
///
/// `r[i][j]` (read for `i < j`) estimates P(class i | class i or j) and
/// `n[i][j]` weights that pair. Coordinates are rescaled cyclically by
/// `Σ_j n_ij r_ij / Σ_j n_ij μ_ij` and renormalized until no coordinate moves
/// more than `tol` over a sweep.
pub fn pairwise_coupling(
    r: &[Vec<f64>],
    n: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<ClassDistribution> {
    let k = r.len();
    if k == 0 {
        return Err(Error::InvalidInput("coupling needs at least one class".into()));
    }
    if n.len() != k || r.iter().chain(n).any(|row| row.len() != k) {
        return Err(Error::InvalidInput("r and n must both be k×k".into()));
    }
    let mut rr = vec![vec![0.5; k]; k];
    let mut nn = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let value = r[i][j];
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { i, j, value });
            }
            let weight = n[i][j];
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::InvalidWeight { i, j, value: weight });
            }
            let v = value.clamp(R_CLAMP, 1.0 - R_CLAMP);
            rr[i][j] = v;
            rr[j][i] = 1.0 - v;
            nn[i][j] = weight;
            nn[j][i] = weight;
        }
    }
    if k == 1 {
        return Ok(ClassDistribution { probs: vec![1.0] });
    }
    if k == 2 {
        return Ok(ClassDistribution {
            probs: vec![rr[0][1], rr[1][0]],
        });
    }

    let numer: Vec<f64> = (0..k)
        .map(|i| (0..k).filter(|&j| j != i).map(|j| nn[i][j] * rr[i][j]).sum())
        .collect();
    let mut p = vec![1.0 / k as f64; k];
    #[cfg(debug_assertions)]
    let mut last = coupling_divergence(&p, &rr, &nn);
    for _ in 0..max_iter {
        let before = p.clone();
        for i in 0..k {
            let denom: f64 = (0..k)
                .filter(|&j| j != i)
                .map(|j| nn[i][j] * p[i] / (p[i] + p[j]))
                .sum();
            p[i] *= numer[i] / denom;
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
        }
        #[cfg(debug_assertions)]
        {
            let now = coupling_divergence(&p, &rr, &nn);
            debug_assert!(
                now <= last + 1e-10 * last.abs().max(1.0),
                "coupling objective increased: {last} -> {now}"
            );
            last = now;
        }
        let moved = p
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if moved < tol {
            break;
        }
    }
    Ok(ClassDistribution { probs: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consistent(p: &[f64]) -> Vec<Vec<f64>> {
        let k = p.len();
        let mut r = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    r[i][j] = p[i] / (p[i] + p[j]);
                }
            }
        }
        r
    }

    fn ones(k: usize) -> Vec<Vec<f64>> {
        vec![vec![1.0; k]; k]
    }

    #[test]
    fn two_classes_are_exact() {
        let r = vec![vec![0.0, 0.7], vec![0.3, 0.0]];
        let d = pairwise_coupling(&r, &ones(2), 1e-8, 1000).unwrap();
        assert_eq!(d.probs, vec![0.7, 1.0 - 0.7]);
    }

    #[test]
    fn consistent_input_is_a_fixed_point() {
        for p in [vec![0.5, 0.3, 0.2], vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.25]] {
            let d = pairwise_coupling(&consistent(&p), &ones(p.len()), 1e-10, 1000).unwrap();
            for (a, b) in d.probs.iter().zip(&p) {
                assert!((a - b).abs() < 1e-6, "{:?} vs {p:?}", d.probs);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut r = consistent(&[0.5, 0.3, 0.2]);
        r[0][2] = 1.5;
        assert!(matches!(
            pairwise_coupling(&r, &ones(3), 1e-8, 100),
            Err(Error::InvalidProbability { i: 0, j: 2, .. })
        ));
        let mut n = ones(3);
        n[1][2] = 0.0;
        assert!(matches!(
            pairwise_coupling(&consistent(&[0.5, 0.3, 0.2]), &n, 1e-8, 100),
            Err(Error::InvalidWeight { .. })
        ));
    }

    #[test]
    fn degenerate_values_stay_on_the_simplex() {
        let mut r = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in (i + 1)..4 {
                r[i][j] = if (i + j) % 2 == 0 { 1.0 } else { 0.0 };
            }
        }
        let d = pairwise_coupling(&r, &ones(4), 1e-8, 1000).unwrap();
        let total: f64 = d.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(d.probs.iter().all(|&p| p >= 0.0 && p.is_finite()));
    }

    #[test]
    fn argmax_ties_go_low() {
        let d = ClassDistribution {
            probs: vec![0.2, 0.4, 0.4],
        };
        assert_eq!(d.argmax(), 1);
    }
}
