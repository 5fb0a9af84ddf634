use rand::Rng;

use super::{Bounds, Evaluator, Problem};
use crate::error::Result;

/// Hawk positions, their fitness values, and the best-so-far ("rabbit").
#[derive(Debug, Clone, PartialEq)]
pub struct HawkPopulation {
    pub positions: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    pub rabbit_position: Vec<f64>,
    pub rabbit_fitness: f64,
    pub iteration: usize,
}

impl HawkPopulation {
    /// Uniformly random hawks inside `bounds`, evaluated once.
    pub(crate) fn random<P: Problem + ?Sized, R: Rng + ?Sized>(
        size: usize,
        bounds: Bounds<'_>,
        rng: &mut R,
        eval: &mut Evaluator<'_, P>,
    ) -> Result<Self> {
        let positions: Vec<Vec<f64>> = (0..size).map(|_| bounds.sample(rng)).collect();
        let fitness = positions.iter().map(|x| eval.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_evaluated(positions, fitness))
    }

    /// Builds a population from already evaluated positions.
    pub fn from_evaluated(positions: Vec<Vec<f64>>, fitness: Vec<f64>) -> Self {
        assert_eq!(positions.len(), fitness.len());
        assert!(!positions.is_empty());
        let mut pop = HawkPopulation {
            rabbit_position: positions[0].clone(),
            rabbit_fitness: f64::INFINITY,
            positions,
            fitness,
            iteration: 0,
        };
        pop.update_rabbit();
        pop
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rabbit_position.len()
    }

    /// Promotes the best current hawk to rabbit if it strictly improves.
    pub fn update_rabbit(&mut self) {
        if let Some((i, &f)) = self.fitness.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
            if f < self.rabbit_fitness {
                self.rabbit_fitness = f;
                self.rabbit_position.clone_from(&self.positions[i]);
            }
        }
    }

    /// Takes `other`'s rabbit if it is strictly better.
    pub fn adopt_rabbit(&mut self, other: &HawkPopulation) {
        if other.rabbit_fitness < self.rabbit_fitness {
            self.rabbit_fitness = other.rabbit_fitness;
            self.rabbit_position.clone_from(&other.rabbit_position);
        }
    }

    /// Greedy acceptance: hawk `i` moves to `candidate` only if it is better.
    pub(crate) fn offer(&mut self, i: usize, candidate: Vec<f64>, fitness: f64) -> bool {
        if fitness < self.fitness[i] {
            self.positions[i] = candidate;
            self.fitness[i] = fitness;
            true
        } else {
            false
        }
    }

    /// Component-wise mean of all hawks.
    pub fn mean_position(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim()];
        for x in &self.positions {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    pub fn within(&self, bounds: Bounds<'_>) -> bool {
        self.positions.iter().all(|x| bounds.contains(x))
    }
}

pub(crate) fn clamp_into(x: &mut [f64], bounds: Bounds<'_>) {
    for ((v, &lo), &hi) in x.iter_mut().zip(bounds.lower).zip(bounds.upper) {
        *v = v.clamp(lo, hi);
    }
}
