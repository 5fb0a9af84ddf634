//! Classical Harris hawks phases: exploration, soft/hard besiege and the
//! two rapid-dive variants driven by escaping energy `E` and escape chance `r`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use super::population::{clamp_into, HawkPopulation};
use super::{Bounds, Evaluator, Problem};
use crate::error::Result;

/// Lévy exponent used by the rapid dives.
pub const LEVY_BETA: f64 = 1.5;
const LEVY_SCALE: f64 = 0.01;

/// Per-hawk random state for one phase update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhoPhaseState {
    pub initial_energy: f64,
    pub escaping_energy: f64,
    pub escape_chance: f64,
    pub perch_choice: f64,
    pub jump_strength: f64,
}

impl HhoPhaseState {
    pub fn draw<R: Rng + ?Sized>(t: usize, max_iterations: usize, rng: &mut R) -> Self {
        let initial_energy = 2.0 * rng.random::<f64>() - 1.0;
        let escaping_energy = escaping_energy(initial_energy, t, max_iterations);
        HhoPhaseState {
            initial_energy,
            escaping_energy,
            escape_chance: rng.random(),
            perch_choice: rng.random(),
            jump_strength: 2.0 * (1.0 - rng.random::<f64>()),
        }
    }
}

/// `E = 2 E0 (1 - t/T)`.
pub fn escaping_energy(initial_energy: f64, t: usize, max_iterations: usize) -> f64 {
    2.0 * initial_energy * (1.0 - t as f64 / max_iterations as f64)
}

/// Mantegna's sigma for Lévy-stable steps with exponent `beta`.
pub fn mantegna_sigma(beta: f64) -> f64 {
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

/// Heavy-tailed step vector, `0.01 * u / |v|^(1/beta)` with `u ~ N(0, sigma^2)`
/// and `v ~ N(0, 1)`.
pub fn levy_flight_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let sigma = mantegna_sigma(LEVY_BETA);
    (0..dim)
        .map(|_| {
            let u: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let v: f64 = rng.sample(StandardNormal);
            LEVY_SCALE * u / v.abs().powf(1.0 / LEVY_BETA)
        })
        .collect()
}

/// Perch on a random member: `X_rand - r1 |X_rand - 2 r2 X|`.
pub fn perch_on_random_hawk(x: &[f64], random_hawk: &[f64], r1: f64, r2: f64) -> Vec<f64> {
    random_hawk
        .iter()
        .zip(x)
        .map(|(&xr, &xi)| xr - r1 * (xr - 2.0 * r2 * xi).abs())
        .collect()
}

/// Perch relative to the family: `(X_rabbit - X_mean) - r3 (lb + r4 (ub - lb))`.
pub fn perch_on_family(rabbit: &[f64], mean: &[f64], bounds: Bounds<'_>, r3: f64, r4: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(mean)
        .zip(bounds.lower.iter().zip(bounds.upper))
        .map(|((&r, &m), (&lo, &hi))| (r - m) - r3 * (lo + r4 * (hi - lo)))
        .collect()
}

/// Soft besiege: `(X_rabbit - X) - E |J X_rabbit - X|`.
pub fn soft_besiege(x: &[f64], rabbit: &[f64], energy: f64, jump: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(x)
        .map(|(&r, &xi)| (r - xi) - energy * (jump * r - xi).abs())
        .collect()
}

/// Hard besiege: `X_rabbit - E |X_rabbit - X|`.
pub fn hard_besiege(x: &[f64], rabbit: &[f64], energy: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(x)
        .map(|(&r, &xi)| r - energy * (r - xi).abs())
        .collect()
}

/// Dive target `X_rabbit - E |J X_rabbit - reference|`, where the reference
/// is the hawk itself (soft) or the population mean (hard).
pub fn dive_target(rabbit: &[f64], reference: &[f64], energy: f64, jump: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(reference)
        .map(|(&r, &p)| r - energy * (jump * r - p).abs())
        .collect()
}

/// One classical HHO position update for every hawk.
///
/// Exploration and besiege moves replace the hawk unconditionally (their
/// fitness is evaluated by the caller); rapid dives evaluate their two
/// candidates here and move only on improvement.
pub(crate) fn hho_phase_update<P: Problem + ?Sized, R: Rng + ?Sized>(
    population: &mut HawkPopulation,
    bounds: Bounds<'_>,
    t: usize,
    max_iterations: usize,
    rng: &mut R,
    eval: &mut Evaluator<'_, P>,
) -> Result<Vec<bool>> {
    let n = population.len();
    let dim = population.dim();
    let rabbit = population.rabbit_position.clone();
    let mean = population.mean_position();
    // Hawks whose fitness is already current after the update.
    let mut evaluated = vec![false; n];

    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        let s = HhoPhaseState::draw(t, max_iterations, rng);
        let e = s.escaping_energy;
        let x = &population.positions[i];

        let mut next = if e.abs() >= 1.0 {
            if s.perch_choice < 0.5 {
                let k = rng.random_range(0..n);
                let (r1, r2) = (rng.random(), rng.random());
                perch_on_random_hawk(x, &population.positions[k], r1, r2)
            } else {
                let (r3, r4) = (rng.random(), rng.random());
                perch_on_family(&rabbit, &mean, bounds, r3, r4)
            }
        } else if s.escape_chance >= 0.5 {
            if e.abs() < 0.5 {
                hard_besiege(x, &rabbit, e)
            } else {
                soft_besiege(x, &rabbit, e, s.jump_strength)
            }
        } else {
            let reference: &[f64] = if e.abs() >= 0.5 { x } else { &mean };
            let mut y = dive_target(&rabbit, reference, e, s.jump_strength);
            clamp_into(&mut y, bounds);
            let fy = eval.eval(&y)?;
            if fy < population.fitness[i] {
                population.positions[i] = y;
                population.fitness[i] = fy;
            } else {
                let levy = levy_flight_vector(dim, rng);
                let mut z: Vec<f64> = y
                    .iter()
                    .zip(&levy)
                    .map(|(&yi, &l)| yi + rng.random::<f64>() * l)
                    .collect();
                clamp_into(&mut z, bounds);
                let fz = eval.eval(&z)?;
                if fz < population.fitness[i] {
                    population.positions[i] = z;
                    population.fitness[i] = fz;
                }
            }
            evaluated[i] = true;
            continue;
        };
        clamp_into(&mut next, bounds);
        population.positions[i] = next;
    }
    Ok(evaluated)
}
