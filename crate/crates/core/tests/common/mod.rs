#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_EPS: f64 = 1e-5;
pub const FD_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller, kept local so the oracle does not share code with the crate.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn normals<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Symmetric relative error with an absolute floor on the scale.
pub fn rel_err(numeric: f64, analytic: f64) -> f64 {
    (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(FD_FLOOR)
}

/// Central differences of `f` with respect to every entry of `x`.
pub fn central_differences(x: &mut [f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + FD_EPS;
            let plus = f(x);
            x[i] = orig - FD_EPS;
            let minus = f(x);
            x[i] = orig;
            (plus - minus) / (2.0 * FD_EPS)
        })
        .collect()
}

/// Worst relative error between two gradient vectors.
pub fn worst(numeric: &[f64], analytic: &[f64]) -> f64 {
    assert_eq!(numeric.len(), analytic.len());
    numeric
        .iter()
        .zip(analytic)
        .map(|(&n, &a)| rel_err(n, a))
        .fold(0.0, f64::max)
}

/// Mid-ranks of `values` doubled so they are integers.
pub fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    values
        .iter()
        .map(|v| {
            let less = values.iter().filter(|w| *w < v).count() as u64;
            let equal = values.iter().filter(|w| *w == v).count() as u64;
            2 * less + equal + 1
        })
        .collect()
}

/// Two-sided rank-sum p-value by enumerating every subset of the pooled
/// sample that could have been the first group.
pub fn enumerated_rank_sum_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let n = pooled.len();
    let k = a.len();
    let expected = k as u64 * (n as u64 + 1);
    let observed: u64 = ranks[..k].iter().sum();
    let dev = observed.abs_diff(expected);
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        total += 1;
        if s.abs_diff(expected) >= dev {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Per-row mid-ranks (1 = smallest) averaged over rows.
pub fn hand_mean_ranks(cells: &[Vec<f64>]) -> Vec<f64> {
    let m = cells[0].len();
    let mut sums = vec![0.0; m];
    for row in cells {
        for (s, r) in sums.iter_mut().zip(doubled_midranks(row)) {
            *s += r as f64 / 2.0;
        }
    }
    sums.iter().map(|s| s / cells.len() as f64).collect()
}

/// Squared magnitude of a digital Butterworth low-pass designed through the
/// bilinear transform with its edge prewarped.
pub fn butterworth_power(f: f64, edge: f64, fs: f64, order: usize) -> f64 {
    let ratio = (std::f64::consts::PI * f / fs).tan() / (std::f64::consts::PI * edge / fs).tan();
    1.0 / (1.0 + ratio.powi(2 * order as i32))
}

/// Amplitude of the `freq` component of `y` by least squares on sin/cos.
pub fn fitted_amplitude(y: &[f64], freq: f64, fs: f64) -> f64 {
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let w = 2.0 * std::f64::consts::PI * freq * i as f64 / fs;
        let (s, c) = w.sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += v * s;
        yc += v * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    a.hypot(b)
}
