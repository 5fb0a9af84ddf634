//! Comparator algorithms: uniform random search and a grey-wolf style pack.

use rand::Rng;

use super::population::{clamp_into, HawkPopulation};
use super::{Bounds, Evaluator, Problem};
use crate::error::Result;

/// Replaces every member with a fresh uniform sample.
pub(crate) fn random_search_step<P: Problem + ?Sized, R: Rng + ?Sized>(
    population: &mut HawkPopulation,
    bounds: Bounds<'_>,
    rng: &mut R,
    eval: &mut Evaluator<'_, P>,
) -> Result<()> {
    for i in 0..population.len() {
        let x = bounds.sample(rng);
        population.fitness[i] = eval.eval(&x)?;
        population.positions[i] = x;
    }
    Ok(())
}

/// Leaders of the pack, best first.
#[derive(Debug, Clone)]
pub(crate) struct Leaders {
    ranked: Vec<(Vec<f64>, f64)>,
}

impl Leaders {
    pub(crate) fn new() -> Self {
        Leaders {
            ranked: Vec::with_capacity(3),
        }
    }

    /// Keeps the three best distinct fitness values seen so far.
    pub(crate) fn observe(&mut self, population: &HawkPopulation) {
        for (x, &f) in population.positions.iter().zip(&population.fitness) {
            if self.ranked.iter().any(|(_, g)| *g == f) {
                continue;
            }
            let slot = self
                .ranked
                .iter()
                .position(|(_, g)| f < *g)
                .unwrap_or(self.ranked.len());
            if slot < 3 {
                self.ranked.insert(slot, (x.clone(), f));
                self.ranked.truncate(3);
            }
        }
    }

    fn get(&self, k: usize) -> &[f64] {
        let k = k.min(self.ranked.len() - 1);
        &self.ranked[k].0
    }
}

/// One grey-wolf position update toward alpha, beta and delta.
pub(crate) fn gwo_step<P: Problem + ?Sized, R: Rng + ?Sized>(
    population: &mut HawkPopulation,
    leaders: &Leaders,
    bounds: Bounds<'_>,
    t: usize,
    max_iterations: usize,
    rng: &mut R,
    eval: &mut Evaluator<'_, P>,
) -> Result<()> {
    let a = 2.0 - 2.0 * t as f64 / max_iterations as f64;
    let dim = population.dim();
    for i in 0..population.len() {
        let mut next = vec![0.0; dim];
        for (j, slot) in next.iter_mut().enumerate() {
            let xj = population.positions[i][j];
            let mut acc = 0.0;
            for k in 0..3 {
                let leader = leaders.get(k)[j];
                let coef_a = 2.0 * a * rng.random::<f64>() - a;
                let coef_c = 2.0 * rng.random::<f64>();
                acc += leader - coef_a * (coef_c * leader - xj).abs();
            }
            *slot = acc / 3.0;
        }
        clamp_into(&mut next, bounds);
        population.fitness[i] = eval.eval(&next)?;
        population.positions[i] = next;
    }
    Ok(())
}
