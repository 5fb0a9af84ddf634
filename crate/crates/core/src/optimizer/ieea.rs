//! Gaussian-perturbed exploration/exploitation step with a tanh-decaying gate.

use rand::Rng;
use rand_distr::StandardNormal;

use super::population::{clamp_into, HawkPopulation};
use super::{Bounds, Evaluator, Problem};
use crate::error::{Error, Result};

/// Gate between the exploration and exploitation branches:
/// `tanh(-t / T) + 1`, decreasing from 1 at `t = 0` to about 0.2384 at `t = T`.
pub fn adaptive_threshold(t: usize, max_iterations: usize) -> Result<f64> {
    if max_iterations == 0 {
        return Err(Error::contract("maximum iteration count must be at least 1"));
    }
    if t > max_iterations {
        return Err(Error::contract(format!(
            "iteration {t} exceeds maximum {max_iterations}"
        )));
    }
    Ok((-(t as f64) / max_iterations as f64).tanh() + 1.0)
}

/// `dim` independent standard-normal draws. `dim == 0` yields an empty vector.
pub fn gaussian_perturbation_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Candidate position for one hawk given its draws.
///
/// `rand` is both the branch gate and the step multiplier; `rg_outer` and
/// `rg_inner` are the two Gaussian vectors, one per occurrence.
pub fn ieea_candidate(
    position: &[f64],
    rabbit: &[f64],
    rand: f64,
    threshold: f64,
    rg_outer: &[f64],
    rg_inner: &[f64],
) -> Vec<f64> {
    let explore = rand < threshold;
    position
        .iter()
        .zip(rabbit)
        .zip(rg_outer.iter().zip(rg_inner))
        .map(|((&x, &r), (&g1, &g2))| {
            if explore {
                x + rand * g1 * (r - g2 * x)
            } else {
                r + rand * g1 * (g2 * r - x)
            }
        })
        .collect()
}

/// Applies the perturbation step to every hawk with greedy acceptance.
pub(crate) fn ieea_update<P: Problem + ?Sized, R: Rng + ?Sized>(
    population: &mut HawkPopulation,
    bounds: Bounds<'_>,
    t: usize,
    max_iterations: usize,
    rng: &mut R,
    eval: &mut Evaluator<'_, P>,
) -> Result<()> {
    let threshold = adaptive_threshold(t, max_iterations)?;
    let dim = population.dim();
    let rabbit = population.rabbit_position.clone();
    for i in 0..population.len() {
        let rand: f64 = rng.random();
        let g1 = gaussian_perturbation_vector(dim, rng);
        let g2 = gaussian_perturbation_vector(dim, rng);
        let mut candidate = ieea_candidate(&population.positions[i], &rabbit, rand, threshold, &g1, &g2);
        clamp_into(&mut candidate, bounds);
        let f = eval.eval(&candidate)?;
        population.offer(i, candidate, f);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn threshold_endpoints() {
        assert_eq!(adaptive_threshold(0, 500).unwrap(), 1.0);
        // 40-digit values of tanh(-1) + 1 and tanh(-0.5) + 1.
        let end = adaptive_threshold(500, 500).unwrap();
        assert!((end - 0.238_405_844_044_235_1).abs() < 1e-15);
        let mid = adaptive_threshold(250, 500).unwrap();
        assert!((mid - 0.537_882_842_739_990_2).abs() < 1e-15);
    }

    #[test]
    fn threshold_rejects_zero_horizon() {
        assert!(adaptive_threshold(0, 0).is_err());
        assert!(adaptive_threshold(6, 5).is_err());
    }

    #[test]
    fn gaussian_vector_is_seeded() {
        let a = gaussian_perturbation_vector(16, &mut rng::stream(3));
        let b = gaussian_perturbation_vector(16, &mut rng::stream(3));
        assert_eq!(a, b);
        assert!(gaussian_perturbation_vector(0, &mut rng::stream(3)).is_empty());
    }

    #[test]
    fn gaussian_vector_moments() {
        let v = gaussian_perturbation_vector(1_000_000, &mut rng::stream(11));
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn zero_gaussian_collapses_each_branch() {
        let x = [3.0, -2.0];
        let rabbit = [0.5, 0.25];
        let zero = [0.0, 0.0];
        assert_eq!(ieea_candidate(&x, &rabbit, 0.2, 0.9, &zero, &zero), x.to_vec());
        assert_eq!(ieea_candidate(&x, &rabbit, 0.95, 0.9, &zero, &zero), rabbit.to_vec());
    }

    #[test]
    fn scripted_first_branch() {
        let ones = [1.0, 1.0];
        let c = ieea_candidate(&[1.0, 1.0], &[0.0, 0.0], 0.5, 1.0, &ones, &ones);
        assert_eq!(c, vec![0.5, 0.5]);
    }

    #[test]
    fn scripted_second_branch() {
        // r + rand * g1 * (g2 * r - x) = 2 + 0.5 * 2 * (1 * 2 - 1) = 3
        let c = ieea_candidate(&[1.0], &[2.0], 0.5, 0.3, &[2.0], &[1.0]);
        assert_eq!(c, vec![3.0]);
    }
}
