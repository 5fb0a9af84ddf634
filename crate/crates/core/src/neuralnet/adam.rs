//! Adam with bias-corrected moments.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamMoments {
    pub fn zeros(n: usize) -> Self {
        AdamMoments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One update of `params` in place; `step` is 1-based.
pub fn adam_step(params: &mut [f64], grads: &[f64], moments: &mut AdamMoments, step: u64, hyper: &AdamConfig) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), moments.m.len());
    assert!(step >= 1, "adam steps are 1-based");
    let c1 = 1.0 - hyper.beta1.powf(step as f64);
    let c2 = 1.0 - hyper.beta2.powf(step as f64);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(moments.m.iter_mut())
        .zip(moments.v.iter_mut())
    {
        *m = hyper.beta1 * *m + (1.0 - hyper.beta1) * g;
        *v = hyper.beta2 * *v + (1.0 - hyper.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= hyper.lr * m_hat / (v_hat.sqrt() + hyper.eps);
    }
}

/// Adam state for a fixed list of parameter tensors.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    moments: Vec<AdamMoments>,
    step: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, sizes: &[usize]) -> Self {
        Adam {
            config,
            moments: sizes.iter().map(|&n| AdamMoments::zeros(n)).collect(),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: &[Vec<f64>]) {
        assert_eq!(params.len(), self.moments.len());
        assert_eq!(grads.len(), self.moments.len());
        self.step += 1;
        for ((p, g), m) in params.into_iter().zip(grads).zip(self.moments.iter_mut()) {
            adam_step(p, g, m, self.step, &self.config);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_against_the_sign() {
        let cfg = AdamConfig::with_lr(0.01);
        let mut p = vec![1.0, 1.0, 1.0];
        let mut m = AdamMoments::zeros(3);
        adam_step(&mut p, &[3.0, -0.2, 1e-3], &mut m, 1, &cfg);
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] - 1.01).abs() < 1e-9);
        assert!((p[2] - 0.99).abs() < 1e-7);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.5, -2.0];
        let mut m = AdamMoments::zeros(2);
        adam_step(&mut p, &[0.0, 0.0], &mut m, 1, &AdamConfig::default());
        assert_eq!(p, vec![0.5, -2.0]);
    }

    #[test]
    fn minimizes_a_parabola() {
        let cfg = AdamConfig::with_lr(0.1);
        let mut x = [1.0];
        let mut m = AdamMoments::zeros(1);
        for step in 1..=100 {
            let g = [2.0 * x[0]];
            adam_step(&mut x, &g, &mut m, step, &cfg);
        }
        assert!(x[0].abs() < 0.1, "x = {}", x[0]);
    }
}
