//! Softmax and the class-weighted cross-entropy used against class imbalance.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities below this are clamped inside the logarithm.
pub const LOG_CLAMP: f64 = 1e-12;

pub fn softmax(logits: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut e = logits.mapv(|v| (v - max).exp());
    let total = e.sum();
    e /= total;
    e
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub weights: Vec<f64>,
    /// Indices of classes with no samples.
    pub empty_classes: Vec<usize>,
}

/// `w_j = 1 - n_j / N`, renormalized to sum to one (a no-op for two classes).
pub fn class_weights(counts: &[usize]) -> Result<ClassWeights> {
    if counts.len() < 2 {
        return Err(Error::contract("class weights need at least two classes"));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::contract("class counts sum to zero"));
    }
    let raw: Vec<f64> = counts.iter().map(|&n| 1.0 - n as f64 / total as f64).collect();
    let sum: f64 = raw.iter().sum();
    Ok(ClassWeights {
        weights: raw.iter().map(|w| w / sum).collect(),
        empty_classes: counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(i, _)| i)
            .collect(),
    })
}

/// `-sum_j w_j T_j ln(max(p_j, 1e-12))`.
pub fn weighted_cross_entropy(probs: &[f64], target: &[f64], weights: &[f64]) -> f64 {
    probs
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((&p, &t), &w)| if t == 0.0 { 0.0 } else { -w * t * p.max(LOG_CLAMP).ln() })
        .sum()
}

/// Gradient of [`weighted_cross_entropy`] with respect to the probabilities.
pub fn weighted_cross_entropy_grad_probs(probs: &[f64], target: &[f64], weights: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .zip(target)
        .zip(weights)
        .map(
            |((&p, &t), &w)| {
                if t == 0.0 || p < LOG_CLAMP {
                    0.0
                } else {
                    -w * t / p
                }
            },
        )
        .collect()
}

/// Gradient of the loss composed with softmax, with respect to the logits.
pub fn weighted_cross_entropy_grad_logits(probs: &[f64], target: &[f64], weights: &[f64]) -> Vec<f64> {
    let scale: f64 = target.iter().zip(weights).map(|(t, w)| t * w).sum();
    probs
        .iter()
        .zip(target)
        .zip(weights)
        .map(|((&p, &t), &w)| scale * p - w * t)
        .collect()
}
