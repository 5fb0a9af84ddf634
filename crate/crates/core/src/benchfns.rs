//! Classical unimodal and multimodal benchmark objectives.
//!
//! All functions are dimension-parameterized minimization problems with box
//! bounds. Evaluation outside the box is allowed and reported through
//! [`Evaluation::out_of_bounds`], since optimizers may probe before clamping.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Location of the one-dimensional minimum of `-x sin(sqrt|x|)` on [-500, 500].
pub const SCHWEFEL_226_ARGMIN: f64 = 420.968_746_359_982_03;
/// Value of `-x sin(sqrt|x|)` at [`SCHWEFEL_226_ARGMIN`].
pub const SCHWEFEL_226_MIN: f64 = -418.982_887_272_433_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Unimodal,
    Multimodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionId {
    Sphere,
    Schwefel222,
    Schwefel12,
    Schwefel221,
    Rosenbrock,
    Step,
    QuarticNoise,
    Schwefel226,
    Rastrigin,
    Ackley,
    Griewank,
    Penalized1,
    Penalized2,
    Alpine,
    SumDifferentPowers,
    Zakharov,
}

impl FunctionId {
    pub const ALL: [FunctionId; 16] = [
        FunctionId::Sphere,
        FunctionId::Schwefel222,
        FunctionId::Schwefel12,
        FunctionId::Schwefel221,
        FunctionId::Rosenbrock,
        FunctionId::Step,
        FunctionId::QuarticNoise,
        FunctionId::Schwefel226,
        FunctionId::Rastrigin,
        FunctionId::Ackley,
        FunctionId::Griewank,
        FunctionId::Penalized1,
        FunctionId::Penalized2,
        FunctionId::Alpine,
        FunctionId::SumDifferentPowers,
        FunctionId::Zakharov,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionId::Sphere => "sphere",
            FunctionId::Schwefel222 => "schwefel_2_22",
            FunctionId::Schwefel12 => "schwefel_1_2",
            FunctionId::Schwefel221 => "schwefel_2_21",
            FunctionId::Rosenbrock => "rosenbrock",
            FunctionId::Step => "step",
            FunctionId::QuarticNoise => "quartic_noise",
            FunctionId::Schwefel226 => "schwefel_2_26",
            FunctionId::Rastrigin => "rastrigin",
            FunctionId::Ackley => "ackley",
            FunctionId::Griewank => "griewank",
            FunctionId::Penalized1 => "penalized_1",
            FunctionId::Penalized2 => "penalized_2",
            FunctionId::Alpine => "alpine",
            FunctionId::SumDifferentPowers => "sum_different_powers",
            FunctionId::Zakharov => "zakharov",
        }
    }

    pub fn modality(self) -> Modality {
        use FunctionId::*;
        match self {
            Sphere | Schwefel222 | Schwefel12 | Schwefel221 | Rosenbrock | Step | QuarticNoise | SumDifferentPowers
            | Zakharov => Modality::Unimodal,
            Schwefel226 | Rastrigin | Ackley | Griewank | Penalized1 | Penalized2 | Alpine => Modality::Multimodal,
        }
    }

    /// Per-dimension search interval.
    pub fn interval(self) -> (f64, f64) {
        use FunctionId::*;
        match self {
            Sphere | Schwefel12 | Schwefel221 | Step => (-100.0, 100.0),
            Schwefel222 | Alpine => (-10.0, 10.0),
            Rosenbrock => (-30.0, 30.0),
            QuarticNoise => (-1.28, 1.28),
            Schwefel226 => (-500.0, 500.0),
            Rastrigin => (-5.12, 5.12),
            Ackley => (-32.0, 32.0),
            Griewank => (-600.0, 600.0),
            Penalized1 | Penalized2 => (-50.0, 50.0),
            SumDifferentPowers => (-1.0, 1.0),
            Zakharov => (-5.0, 10.0),
        }
    }

    /// Coordinate of the global minimizer, repeated in every dimension.
    /// `None` for the noisy quartic, whose minimum value is not attained
    /// deterministically.
    fn argmin_coordinate(self) -> Option<f64> {
        use FunctionId::*;
        match self {
            QuarticNoise => None,
            Rosenbrock | Penalized2 => Some(1.0),
            Penalized1 => Some(-1.0),
            Schwefel226 => Some(SCHWEFEL_226_ARGMIN),
            _ => Some(0.0),
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FunctionId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == key)
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

/// Result of a single objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub out_of_bounds: bool,
}

/// A bounded benchmark objective of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveFunction {
    pub id: FunctionId,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub known_optimum: Option<f64>,
    pub modality: Modality,
}

impl ObjectiveFunction {
    pub fn new(id: FunctionId, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("objective dimension must be positive"));
        }
        let (lo, hi) = id.interval();
        let known_optimum = match id {
            FunctionId::QuarticNoise => None,
            FunctionId::Schwefel226 => Some(SCHWEFEL_226_MIN * dim as f64),
            _ => Some(0.0),
        };
        Ok(ObjectiveFunction {
            id,
            dim,
            lower: vec![lo; dim],
            upper: vec![hi; dim],
            known_optimum,
            modality: id.modality(),
        })
    }

    /// Minimizer location for functions with a known optimum.
    pub fn optimum_location(&self) -> Option<Vec<f64>> {
        self.id.argmin_coordinate().map(|c| vec![c; self.dim])
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// Evaluates the objective at `x`. The RNG is only consumed by the
    /// noisy quartic.
    pub fn evaluate<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Evaluation> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let value = match self.id {
            FunctionId::QuarticNoise => quartic(x) + rng.random::<f64>(),
            id => evaluate_noiseless(id, x),
        };
        Ok(Evaluation {
            value,
            out_of_bounds: !self.in_bounds(x),
        })
    }
}

/// The deterministic part of every function (the quartic without noise).
pub fn evaluate_noiseless(id: FunctionId, x: &[f64]) -> f64 {
    match id {
        FunctionId::Sphere => x.iter().map(|v| v * v).sum(),
        FunctionId::Schwefel222 => {
            let sum: f64 = x.iter().map(|v| v.abs()).sum();
            // The product overflows at high dimension; saturate to stay finite.
            let prod: f64 = x.iter().map(|v| v.abs()).product();
            sum + prod.min(f64::MAX / 2.0)
        }
        FunctionId::Schwefel12 => {
            let mut running = 0.0;
            let mut total = 0.0;
            for v in x {
                running += v;
                total += running * running;
            }
            total
        }
        FunctionId::Schwefel221 => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        FunctionId::Rosenbrock => x
            .windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
            .sum(),
        FunctionId::Step => x.iter().map(|v| (v + 0.5).floor().powi(2)).sum(),
        FunctionId::QuarticNoise => quartic(x),
        FunctionId::Schwefel226 => x.iter().map(|&v| -v * v.abs().sqrt().sin()).sum(),
        FunctionId::Rastrigin => x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum(),
        FunctionId::Ackley => {
            let n = x.len() as f64;
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let cs: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
            -20.0 * (-0.2 * (sq / n).sqrt()).exp() - (cs / n).exp() + 20.0 + E
        }
        FunctionId::Griewank => {
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let prod: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                .product();
            sq / 4000.0 - prod + 1.0
        }
        FunctionId::Penalized1 => penalized1(x),
        FunctionId::Penalized2 => penalized2(x),
        FunctionId::Alpine => x.iter().map(|v| (v * v.sin() + 0.1 * v).abs()).sum(),
        FunctionId::SumDifferentPowers => x.iter().enumerate().map(|(i, v)| v.abs().powi(i as i32 + 2)).sum(),
        FunctionId::Zakharov => {
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let lin: f64 = x.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * v).sum();
            sq + lin.powi(2) + lin.powi(4)
        }
    }
}

fn quartic(x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v.powi(4)).sum()
}

fn boundary_penalty(v: f64, a: f64, k: f64, m: i32) -> f64 {
    if v > a {
        k * (v - a).powi(m)
    } else if v < -a {
        k * (-v - a).powi(m)
    } else {
        0.0
    }
}

fn penalized1(x: &[f64]) -> f64 {
    let n = x.len();
    let y: Vec<f64> = x.iter().map(|v| 1.0 + (v + 1.0) / 4.0).collect();
    let mut body = 10.0 * (PI * y[0]).sin().powi(2);
    for i in 0..n - 1 {
        body += (y[i] - 1.0).powi(2) * (1.0 + 10.0 * (PI * y[i + 1]).sin().powi(2));
    }
    body += (y[n - 1] - 1.0).powi(2);
    let penalty: f64 = x.iter().map(|&v| boundary_penalty(v, 10.0, 100.0, 4)).sum();
    PI / n as f64 * body + penalty
}

fn penalized2(x: &[f64]) -> f64 {
    let n = x.len();
    let mut body = (3.0 * PI * x[0]).sin().powi(2);
    for i in 0..n - 1 {
        body += (x[i] - 1.0).powi(2) * (1.0 + (3.0 * PI * x[i + 1]).sin().powi(2));
    }
    body += (x[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * x[n - 1]).sin().powi(2));
    let penalty: f64 = x.iter().map(|&v| boundary_penalty(v, 5.0, 100.0, 4)).sum();
    0.1 * body + penalty
}

/// The full benchmark catalog at dimension `dim`.
pub fn suite_catalog(dim: usize) -> Result<Vec<ObjectiveFunction>> {
    FunctionId::ALL
        .iter()
        .map(|&id| ObjectiveFunction::new(id, dim))
        .collect()
}

/// JSON export of the catalog.
pub fn catalog_json(dim: usize) -> Result<String> {
    Ok(serde_json::to_string_pretty(&suite_catalog(dim)?)?)
}
