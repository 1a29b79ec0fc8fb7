//! Loss and accuracy kernels.

use crate::error::{Error, Result};

/// Clamp applied to probabilities on every log-loss path.
pub const PROB_EPS: f64 = 1e-12;

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Negative log-likelihood of a Bernoulli outcome `error` under error
/// probability `p`.
pub fn bernoulli_nll(error: bool, p: f64) -> f64 {
    let p = clamp_prob(p);
    if error {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

/// Expected NLL of a Bernoulli(`p`) outcome under prediction `q`.
pub fn bernoulli_cross_entropy(p: f64, q: f64) -> f64 {
    let q = clamp_prob(q);
    let mut ce = 0.0;
    if p > 0.0 {
        ce -= p * q.ln();
    }
    if p < 1.0 {
        ce -= (1.0 - p) * (1.0 - q).ln();
    }
    ce
}

/// KL(Bernoulli(p) || Bernoulli(q)) in nats, with `q` clamped.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let q = clamp_prob(q);
    let mut kl = 0.0;
    if p > 0.0 {
        kl += p * (p / q).ln();
    }
    if p < 1.0 {
        kl += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    kl.max(0.0)
}

pub fn rmse(predictions: &[f64], references: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("rmse of empty lists".into()));
    }
    if predictions.len() != references.len() {
        return Err(Error::Dimension {
            expected: predictions.len(),
            got: references.len(),
        });
    }
    let sq: f64 = predictions
        .iter()
        .zip(references)
        .map(|(p, r)| (p - r) * (p - r))
        .sum();
    Ok((sq / predictions.len() as f64).sqrt())
}
