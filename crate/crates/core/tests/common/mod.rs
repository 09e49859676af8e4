//! Reference solvers used only by tests. They share no code with the crate's
//! solvers.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A tiny dense binary problem.
#[derive(Debug, Clone)]
pub struct TinyProblem {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub c: f64,
}

impl TinyProblem {
    /// ≤12 samples, ≤4 dims, both classes present, C from {0.1, 1, 10}.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=12);
        let d = rng.gen_range(1..=4);
        let c = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
        let shift: f64 = rng.gen_range(0.0..2.0);
        let mut y: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let x = y
            .iter()
            .map(|&yi| {
                (0..d)
                    .map(|_| rng.gen_range(-1.0..1.0) + yi * shift * 0.5)
                    .collect()
            })
            .collect();
        Self { x, y, c }
    }

    fn q(&self) -> Vec<Vec<f64>> {
        let n = self.y.len();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let k: f64 = self.x[i].iter().zip(&self.x[j]).map(|(a, b)| a * b).sum();
                q[i][j] = self.y[i] * self.y[j] * k;
            }
        }
        q
    }

    pub fn dual_objective(&self, alpha: &[f64]) -> f64 {
        let q = self.q();
        let lin: f64 = alpha.iter().sum();
        let mut quad = 0.0;
        for i in 0..alpha.len() {
            for j in 0..alpha.len() {
                quad += alpha[i] * alpha[j] * q[i][j];
            }
        }
        lin - 0.5 * quad
    }

    /// Euclidean projection onto {0 ≤ a ≤ C, yᵀa = 0} by bisection on the
    /// multiplier of the equality constraint.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let c = self.c;
        let at = |lam: f64| -> Vec<f64> {
            v.iter()
                .zip(&self.y)
                .map(|(&vi, &yi)| (vi - lam * yi).clamp(0.0, c))
                .collect()
        };
        let g = |lam: f64| -> f64 { at(lam).iter().zip(&self.y).map(|(a, y)| a * y).sum() };
        let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Accelerated projected gradient ascent on the dual.
    pub fn solve_dual(&self) -> Vec<f64> {
        let q = self.q();
        let n = self.y.len();
        let lipschitz = q
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(1e-12, f64::max);
        let step = 1.0 / lipschitz;
        let mut alpha = vec![0.0; n];
        let mut z = alpha.clone();
        let mut t = 1.0f64;
        for _ in 0..60_000 {
            let grad: Vec<f64> = (0..n)
                .map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())
                .collect();
            let cand: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let next = self.project(&cand);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            z = next
                .iter()
                .zip(&alpha)
                .map(|(a, p)| a + momentum * (a - p))
                .collect();
            // restart momentum whenever the objective drops
            if self.dual_objective(&next) < self.dual_objective(&alpha) {
                z = next.clone();
                t = 1.0;
            } else {
                t = t_next;
            }
            alpha = next;
        }
        alpha
    }
}

/// Weighted KL objective of pairwise coupling for a candidate p.
pub fn coupling_objective(p: &[f64], r: &[Vec<f64>], n: &[Vec<f64>]) -> f64 {
    let k = p.len();
    let mut total = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let mu = p[i] / (p[i] + p[j]);
            let rij = r[i][j];
            let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
            total += n[i][j] * (term(rij, mu) + term(1.0 - rij, 1.0 - mu));
        }
    }
    total
}

/// Exhaustive search of the 3-class simplex on a grid of the given step.
pub fn coupling_grid_oracle(r: &[Vec<f64>], n: &[Vec<f64>], step: f64) -> Vec<f64> {
    let m = (1.0 / step).round() as usize;
    let mut best = (f64::INFINITY, vec![1.0 / 3.0; 3]);
    for a in 1..m {
        for b in 1..(m - a) {
            let c = m - a - b;
            if c == 0 {
                continue;
            }
            let p = [a as f64 / m as f64, b as f64 / m as f64, c as f64 / m as f64];
            let obj = coupling_objective(&p, r, n);
            if obj < best.0 {
                best = (obj, p.to_vec());
            }
        }
    }
    best.1
}
