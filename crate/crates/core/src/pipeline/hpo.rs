//! Hyperparameter search over (log10 ILR, LRDF, DP) driven by the optimizer.

use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};

use super::train::{stratified_holdout, train_model, LabeledSegment};
use crate::error::{Error, Result};
use crate::neuralnet::network::{NetworkSpec, TrainingHyperparameters};
use crate::optimizer::{run_observed, Algorithm, FnProblem, OptimizerConfig};
use crate::rng;

/// Fitness given to a configuration whose training diverged.
pub const DIVERGED_PENALTY: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpoSpace {
    pub log10_ilr: (f64, f64),
    pub lrdf: (f64, f64),
    pub dp: (f64, f64),
}

impl Default for HpoSpace {
    fn default() -> Self {
        HpoSpace {
            log10_ilr: (-5.0, -1.0),
            lrdf: (0.1, 1.0),
            dp: (0.0, 0.8),
        }
    }
}

impl HpoSpace {
    pub fn lower(&self) -> Vec<f64> {
        vec![self.log10_ilr.0, self.lrdf.0, self.dp.0]
    }

    pub fn upper(&self) -> Vec<f64> {
        vec![self.log10_ilr.1, self.lrdf.1, self.dp.1]
    }

    /// Hyperparameters for a search vector, other fields from `base`.
    pub fn decode(&self, v: &[f64], base: &TrainingHyperparameters) -> TrainingHyperparameters {
        let clamp = |x: f64, (lo, hi): (f64, f64)| x.clamp(lo, hi);
        TrainingHyperparameters {
            ilr: 10f64.powf(clamp(v[0], self.log10_ilr)),
            lrdf: clamp(v[1], self.lrdf),
            dp: clamp(v[2], self.dp),
            ..*base
        }
    }

    pub fn midpoint(&self, base: &TrainingHyperparameters) -> TrainingHyperparameters {
        let mid: Vec<f64> = self
            .lower()
            .iter()
            .zip(self.upper())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        self.decode(&mid, base)
    }

    pub fn contains(&self, h: &TrainingHyperparameters) -> bool {
        let l = h.ilr.log10();
        // Round-trip through powf/log10 can be off by an ulp at the edges.
        l >= self.log10_ilr.0 - 1e-12
            && l <= self.log10_ilr.1 + 1e-12
            && (self.lrdf.0..=self.lrdf.1).contains(&h.lrdf)
            && (self.dp.0..=self.dp.1).contains(&h.dp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpoConfig {
    pub population: usize,
    pub iterations: usize,
    pub repeats: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub space: HpoSpace,
    /// Schedule, batch and iteration budget shared by every trial.
    pub base: TrainingHyperparameters,
}

impl Default for HpoConfig {
    fn default() -> Self {
        HpoConfig {
            population: 6,
            iterations: 5,
            repeats: 3,
            algorithm: Algorithm::HhoPlus,
            seed: 0,
            space: HpoSpace::default(),
            base: TrainingHyperparameters::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpoTraceRow {
    /// 0 is the initial population.
    pub iteration: usize,
    /// Order of the evaluation within its iteration.
    pub hawk: usize,
    pub ilr: f64,
    pub lrdf: f64,
    pub dp: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoResult {
    pub best: TrainingHyperparameters,
    pub best_fitness: f64,
    /// Best fitness after each iteration.
    pub best_trace: Vec<f64>,
    pub trace: Vec<HpoTraceRow>,
}

impl HpoResult {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,hawk,ilr,lrdf,dp,fitness\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{},{:e},{},{},{:e}\n",
                r.iteration, r.hawk, r.ilr, r.lrdf, r.dp, r.fitness
            ));
        }
        out
    }
}

/// Search split: a stratified subset of at most `subset` segments, divided
/// into training and validation parts. Returns `(train, validation)`.
pub fn hpo_split(
    data: &[LabeledSegment],
    subset: usize,
    validation_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let all: Vec<usize> = (0..data.len()).collect();
    let pool = if subset < data.len() {
        stratified_holdout(
            data,
            &all,
            subset as f64 / data.len() as f64,
            rng::derive_seed(seed, &[7]),
        )
        .1
    } else {
        all
    };
    stratified_holdout(data, &pool, validation_fraction, rng::derive_seed(seed, &[8]))
}

/// Mean validation weighted cross-entropy over `repeats` trainings. Repeat
/// `r` seeds its network from `(seed, r)`, so the value is a deterministic
/// function of the hyperparameters.
pub fn hpo_fitness(
    spec: &NetworkSpec,
    data: &[LabeledSegment],
    train: &[usize],
    validation: &[usize],
    hyper: &TrainingHyperparameters,
    repeats: usize,
    seed: u64,
) -> Result<f64> {
    if repeats == 0 || validation.is_empty() {
        return Err(Error::contract(
            "fitness needs at least one repeat and a validation set",
        ));
    }
    let mut total = 0.0;
    for r in 0..repeats {
        let model = train_model(
            spec,
            data,
            train,
            validation,
            hyper,
            rng::derive_seed(seed, &[r as u64]),
        )?;
        total += model.validation_loss;
    }
    let mean = total / repeats as f64;
    if mean.is_finite() {
        Ok(mean)
    } else {
        Err(Error::NonFinite("validation loss".into()))
    }
}

pub fn hpo_search(
    spec: &NetworkSpec,
    data: &[LabeledSegment],
    train: &[usize],
    validation: &[usize],
    config: &HpoConfig,
) -> Result<HpoResult> {
    config.base.validate()?;
    let iteration = Cell::new(0usize);
    let hawk = Cell::new(0usize);
    let trace = RefCell::new(Vec::new());
    let hard_error: RefCell<Option<Error>> = RefCell::new(None);
    let fitness_seed = rng::derive_seed(config.seed, &[1]);

    let objective = |v: &[f64]| -> f64 {
        let h = config.space.decode(v, &config.base);
        let f = match hpo_fitness(spec, data, train, validation, &h, config.repeats, fitness_seed) {
            Ok(f) => f,
            Err(Error::NonFinite(_)) => DIVERGED_PENALTY,
            Err(e) => {
                hard_error.borrow_mut().get_or_insert(e);
                DIVERGED_PENALTY
            }
        };
        trace.borrow_mut().push(HpoTraceRow {
            iteration: iteration.get(),
            hawk: hawk.get(),
            ilr: h.ilr,
            lrdf: h.lrdf,
            dp: h.dp,
            fitness: f,
        });
        hawk.set(hawk.get() + 1);
        f
    };
    let mut problem = FnProblem::new(config.space.lower(), config.space.upper(), objective)?;
    let opt = OptimizerConfig::new(
        config.algorithm,
        config.population,
        config.iterations,
        rng::derive_seed(config.seed, &[0]),
    );
    let record = run_observed(&mut problem, &opt, |pop| {
        iteration.set(pop.iteration);
        hawk.set(0);
    })?;
    if let Some(e) = hard_error.into_inner() {
        return Err(e);
    }
    if record.final_fitness >= DIVERGED_PENALTY {
        return Err(Error::NonFinite("every hyperparameter trial diverged".into()));
    }
    Ok(HpoResult {
        best: config.space.decode(&record.final_position, &config.base),
        best_fitness: record.final_fitness,
        best_trace: record.best_trace,
        trace: trace.into_inner(),
    })
}
