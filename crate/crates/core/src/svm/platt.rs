use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

/// Sigmoid `p(f) = 1 / (1 + exp(a·f + b))` mapping decision values to P(y = +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    pub fn probability(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        // both branches are the same sigmoid, arranged so exp never overflows
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

/// Negative log-likelihood against the smoothed targets.
fn objective(values: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    values
        .iter()
        .zip(targets)
        .map(|(&f, &t)| {
            let z = f * a + b;
            if z >= 0.0 {
                t * z + (-z).exp().ln_1p()
            } else {
                (t - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

/// Fits the sigmoid by regularized maximum likelihood using Newton's method
/// with backtracking line search.
pub fn fit_platt(values: &[f64], labels: &[i8]) -> Result<Platt> {
    if values.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} decision values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&y| y > 0).count() as f64;
    let negatives = labels.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return Err(Error::SingleClass);
    }
    let hi = (positives + 1.0) / (positives + 2.0);
    let lo = 1.0 / (negatives + 2.0);
    let targets: Vec<f64> = labels.iter().map(|&y| if y > 0 { hi } else { lo }).collect();

    let mut a = 0.0;
    let mut b = ((negatives + 1.0) / (positives + 1.0)).ln();
    let mut fval = objective(values, &targets, a, b);

    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21) = (HESSIAN_RIDGE, HESSIAN_RIDGE, 0.0);
        let (mut g1, mut g2) = (0.0, 0.0);
        for (&f, &t) in values.iter().zip(&targets) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = t - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.hypot(g2) < GRAD_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0;
        let mut accepted = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(values, &targets, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(Platt { a, b })
}
