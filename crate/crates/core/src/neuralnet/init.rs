//! He (Kaiming) normal initialization.

use ndarray::{ArrayD, IxDyn};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// `n` zero-mean normal draws with variance `2 / fan_in`.
pub fn he_normal<R: Rng + ?Sized>(n: usize, fan_in: usize, rng: &mut R) -> Vec<f64> {
    assert!(fan_in >= 1, "fan_in must be positive");
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("finite std");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// A tensor of the given shape filled by [`he_normal`].
pub fn he_initialize<R: Rng + ?Sized>(shape: &[usize], fan_in: usize, rng: &mut R) -> ArrayD<f64> {
    let n = shape.iter().product();
    ArrayD::from_shape_vec(IxDyn(shape), he_normal(n, fan_in, rng)).expect("shape matches length")
}
