//! Population-based optimizers: classical HHO, HHO+ (HHO followed by the
//! Gaussian perturbation step and a quasi-oppositional pass each iteration),
//! plus random search and a grey-wolf comparator.
//!
//! Every run is single-threaded and fully determined by its configuration,
//! seed included. The best-so-far fitness never increases.

pub mod baselines;
pub mod hho;
pub mod ieea;
pub mod population;
pub mod qobl;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchfns::{FunctionId, ObjectiveFunction};
use crate::error::{Error, Result};
use crate::fsio;
use crate::rng::{self, Stream};

pub use hho::{levy_flight_vector, HhoPhaseState};
pub use ieea::{adaptive_threshold, gaussian_perturbation_vector, ieea_candidate};
pub use population::HawkPopulation;
pub use qobl::{opposite, quasi_opposite, quasi_opposite_with};

/// Box constraints borrowed from a problem.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl Bounds<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(self.upper)
            .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }
}

/// A bounded minimization problem.
pub trait Problem {
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn fitness(&mut self, x: &[f64]) -> f64;

    fn dim(&self) -> usize {
        self.lower().len()
    }
}

/// A benchmark function paired with the noise stream it may consume.
pub struct BenchmarkProblem<'a> {
    function: &'a ObjectiveFunction,
    noise: Stream,
}

impl<'a> BenchmarkProblem<'a> {
    pub fn new(function: &'a ObjectiveFunction, noise_seed: u64) -> Self {
        BenchmarkProblem {
            function,
            noise: rng::stream(noise_seed),
        }
    }
}

impl Problem for BenchmarkProblem<'_> {
    fn lower(&self) -> &[f64] {
        &self.function.lower
    }

    fn upper(&self) -> &[f64] {
        &self.function.upper
    }

    fn fitness(&mut self, x: &[f64]) -> f64 {
        match self.function.evaluate(x, &mut self.noise) {
            Ok(e) => e.value,
            Err(_) => f64::NAN,
        }
    }
}

/// A closure-backed problem.
pub struct FnProblem<F> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnProblem<F> {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, f: F) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty()
            || lower
                .iter()
                .zip(&upper)
                .any(|(a, b)| a.partial_cmp(b) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::contract("bounds must be non-empty with lower < upper"));
        }
        Ok(FnProblem { lower, upper, f })
    }
}

impl<F: FnMut(&[f64]) -> f64> Problem for FnProblem<F> {
    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn fitness(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Counts evaluations and rejects non-finite fitness.
pub(crate) struct Evaluator<'p, P: ?Sized> {
    problem: &'p mut P,
    evaluations: u64,
}

impl<'p, P: Problem + ?Sized> Evaluator<'p, P> {
    fn new(problem: &'p mut P) -> Self {
        Evaluator {
            problem,
            evaluations: 0,
        }
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let value = self.problem.fitness(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteFitness {
                value,
                position: x.to_vec(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hho,
    HhoPlus,
    RandomSearch,
    GwoBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::HhoPlus,
        Algorithm::Hho,
        Algorithm::GwoBaseline,
        Algorithm::RandomSearch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Hho => "hho",
            Algorithm::HhoPlus => "hho_plus",
            Algorithm::RandomSearch => "random_search",
            Algorithm::GwoBaseline => "gwo_baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('+', "_plus").replace('-', "_");
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == key)
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    #[default]
    Clamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub boundary_policy: BoundaryPolicy,
    pub algorithm: Algorithm,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            population_size: 30,
            max_iterations: 500,
            seed: 0,
            boundary_policy: BoundaryPolicy::Clamp,
            algorithm: Algorithm::HhoPlus,
        }
    }
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, population_size: usize, max_iterations: usize, seed: u64) -> Self {
        OptimizerConfig {
            population_size,
            max_iterations,
            seed,
            boundary_policy: BoundaryPolicy::Clamp,
            algorithm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::contract("population_size must be at least 2"));
        }
        if self.max_iterations < 1 {
            return Err(Error::contract("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub best_trace: Vec<f64>,
    pub final_position: Vec<f64>,
    pub final_fitness: f64,
    pub evaluations: u64,
    pub seed: u64,
    pub wall_time: f64,
}

impl RunRecord {
    /// Equality on everything except wall time.
    pub fn same_result(&self, other: &RunRecord) -> bool {
        self.algorithm == other.algorithm
            && self.best_trace == other.best_trace
            && self.final_position == other.final_position
            && self.final_fitness == other.final_fitness
            && self.evaluations == other.evaluations
            && self.seed == other.seed
    }

    /// One row per iteration: `iter,best_fitness`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,best_fitness\n");
        for (i, f) in self.best_trace.iter().enumerate() {
            out.push_str(&format!("{},{:e}\n", i + 1, f));
        }
        out
    }

    pub fn summary(&self, function: &str, dim: usize) -> RunSummary {
        RunSummary {
            algorithm: self.algorithm,
            function: function.to_string(),
            dim,
            seed: self.seed,
            final_fitness: self.final_fitness,
            evaluations: self.evaluations,
            wall_time: self.wall_time,
        }
    }
}

/// JSON summary written next to each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub function: String,
    pub dim: usize,
    pub seed: u64,
    pub final_fitness: f64,
    pub evaluations: u64,
    pub wall_time: f64,
}

/// Deterministic file stem for one run of a batch.
pub fn run_file_stem(algorithm: Algorithm, function: &str, dim: usize, seed: u64) -> String {
    format!("{algorithm}__{function}__d{dim}__s{seed}")
}

/// Writes `<stem>.csv` (trace) and `<stem>.json` (summary) under `dir`.
pub fn write_run(dir: &Path, record: &RunRecord, function: &str, dim: usize) -> Result<PathBuf> {
    let stem = run_file_stem(record.algorithm, function, dim, record.seed);
    let csv = dir.join(format!("{stem}.csv"));
    fsio::write_atomic(&csv, record.trace_csv().as_bytes())?;
    let summary = serde_json::to_string_pretty(&record.summary(function, dim))?;
    fsio::write_atomic(&dir.join(format!("{stem}.json")), summary.as_bytes())?;
    Ok(csv)
}

/// Runs `config.algorithm` on `problem`.
pub fn run<P: Problem + ?Sized>(problem: &mut P, config: &OptimizerConfig) -> Result<RunRecord> {
    run_observed(problem, config, |_| {})
}

/// Runs a benchmark function; the noise stream is derived from the seed.
pub fn run_benchmark(function: &ObjectiveFunction, config: &OptimizerConfig) -> Result<RunRecord> {
    let mut problem = BenchmarkProblem::new(function, rng::derive_seed(config.seed, &[1]));
    run(&mut problem, config)
}

/// Like [`run`], calling `observe` with the population after every iteration.
pub fn run_observed<P, F>(problem: &mut P, config: &OptimizerConfig, mut observe: F) -> Result<RunRecord>
where
    P: Problem + ?Sized,
    F: FnMut(&HawkPopulation),
{
    config.validate()?;
    let start = Instant::now();
    let lower = problem.lower().to_vec();
    let upper = problem.upper().to_vec();
    let bounds = Bounds {
        lower: &lower,
        upper: &upper,
    };
    let max_t = config.max_iterations;
    let mut rng = rng::stream(config.seed);
    let mut eval = Evaluator::new(problem);
    let mut pop = HawkPopulation::random(config.population_size, bounds, &mut rng, &mut eval)?;
    let mut leaders = baselines::Leaders::new();
    let mut trace = Vec::with_capacity(max_t);

    for t in 0..max_t {
        match config.algorithm {
            Algorithm::Hho | Algorithm::HhoPlus => {
                let done = hho::hho_phase_update(&mut pop, bounds, t, max_t, &mut rng, &mut eval)?;
                for (i, already) in done.into_iter().enumerate() {
                    if !already {
                        pop.fitness[i] = eval.eval(&pop.positions[i])?;
                    }
                }
                pop.update_rabbit();
                if config.algorithm == Algorithm::HhoPlus {
                    // IEEA then QOBL refine a trial copy of the swarm; the
                    // trial's best can only promote the rabbit. Hawks keep
                    // their HHO trajectory.
                    let mut trial = pop.clone();
                    ieea::ieea_update(&mut trial, bounds, t, max_t, &mut rng, &mut eval)?;
                    qobl::qobl_pass(&mut trial, bounds, &mut rng, &mut eval)?;
                    trial.update_rabbit();
                    pop.adopt_rabbit(&trial);
                }
            }
            Algorithm::RandomSearch => {
                baselines::random_search_step(&mut pop, bounds, &mut rng, &mut eval)?;
                pop.update_rabbit();
            }
            Algorithm::GwoBaseline => {
                leaders.observe(&pop);
                baselines::gwo_step(&mut pop, &leaders, bounds, t, max_t, &mut rng, &mut eval)?;
                pop.update_rabbit();
            }
        }
        pop.iteration = t + 1;
        trace.push(pop.rabbit_fitness);
        observe(&pop);
    }

    Ok(RunRecord {
        algorithm: config.algorithm,
        best_trace: trace,
        final_fitness: pop.rabbit_fitness,
        final_position: pop.rabbit_position,
        evaluations: eval.evaluations,
        seed: config.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Result of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub dim: usize,
    pub record: RunRecord,
}

/// One run per dimension, all with `config.seed`.
pub fn scalability_sweep(function: FunctionId, dims: &[usize], config: &OptimizerConfig) -> Result<Vec<SweepPoint>> {
    if dims.is_empty() {
        return Err(Error::contract("dimension list must be non-empty"));
    }
    dims.iter()
        .map(|&dim| {
            let f = ObjectiveFunction::new(function, dim)?;
            Ok(SweepPoint {
                dim,
                record: run_benchmark(&f, config)?,
            })
        })
        .collect()
}
