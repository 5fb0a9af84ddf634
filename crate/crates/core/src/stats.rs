//! Nonparametric comparison of optimizer results: Wilcoxon rank-sum tests
//! between two algorithms and Friedman mean ranks across a function suite.
//!
//! Smaller values are better everywhere (minimization).

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::optimizer::RunRecord;

/// Largest smaller-sample size for which p-values are enumerated exactly.
pub const EXACT_MAX_MIN_SIZE: usize = 8;
pub const CONTINUITY_CORRECTION: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Final fitness values of one algorithm, one per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        check_sample(&values)?;
        Ok(SampleSet {
            label: label.into(),
            values,
        })
    }
}

fn check_sample(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::contract("sample must be non-empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("sample values must be finite"));
    }
    Ok(())
}

/// Average ranks (1-based), ties receiving the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumTest {
    /// Rank sum of the first sample in the pooled ranking.
    pub statistic: f64,
    /// Expected rank sum of the first sample under the null.
    pub expected: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Outcome of a rank-sum comparison. `Degenerate` is returned when every
/// pooled value is identical, where no test is defined (reported as NaN).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankSumOutcome {
    Degenerate,
    Test(RankSumTest),
}

impl RankSumOutcome {
    /// The p-value, NaN for the degenerate case.
    pub fn p_value(&self) -> f64 {
        match self {
            RankSumOutcome::Degenerate => f64::NAN,
            RankSumOutcome::Test(t) => t.p_value,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, RankSumOutcome::Degenerate)
    }
}

struct Pooled {
    /// Ranks doubled so mid-ranks become integers.
    doubled: Vec<u64>,
    n_a: usize,
    tie_sizes: Vec<usize>,
}

fn pool(a: &[f64], b: &[f64]) -> Pooled {
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&values);
    let doubled = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    Pooled {
        doubled,
        n_a: a.len(),
        tie_sizes,
    }
}

/// Two-sided rank-sum test. Exact permutation p-value (conditional on the
/// tie pattern) when the smaller sample has at most
/// [`EXACT_MAX_MIN_SIZE`] members, otherwise the tie-corrected normal
/// approximation with continuity correction.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumOutcome> {
    check_sample(a)?;
    check_sample(b)?;
    if a.iter().chain(b).all(|&v| v == a[0]) {
        return Ok(RankSumOutcome::Degenerate);
    }
    let test = if a.len().min(b.len()) <= EXACT_MAX_MIN_SIZE {
        rank_sum_exact(a, b)?
    } else {
        rank_sum_normal(a, b)?
    };
    Ok(RankSumOutcome::Test(test))
}

fn rank_sum_parts(pooled: &Pooled) -> (u64, u64) {
    let n = pooled.doubled.len() as u64;
    let observed: u64 = pooled.doubled[..pooled.n_a].iter().sum();
    // Doubled null mean: 2 * n_a (n + 1) / 2.
    let expected = pooled.n_a as u64 * (n + 1);
    (observed, expected)
}

/// Exact two-sided p-value by counting every assignment of pooled ranks to
/// the first sample.
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> Result<RankSumTest> {
    check_sample(a)?;
    check_sample(b)?;
    let pooled = pool(a, b);
    let (observed, expected) = rank_sum_parts(&pooled);
    let k = pooled.n_a;
    let max_sum: u64 = pooled.doubled.iter().sum();
    let width = max_sum as usize + 1;
    // counts[j][s]: subsets of size j with doubled rank sum s.
    let mut counts = vec![vec![0u128; width]; k + 1];
    counts[0][0] = 1;
    for (seen, &r) in pooled.doubled.iter().enumerate() {
        let r = r as usize;
        for j in (1..=k.min(seen + 1)).rev() {
            let (lower, upper) = counts.split_at_mut(j);
            let prev = &lower[j - 1];
            let cur = &mut upper[0];
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let dev = observed.abs_diff(expected);
    let mut extreme = 0u128;
    let mut total = 0u128;
    for (s, &c) in counts[k].iter().enumerate() {
        total += c;
        if (s as u64).abs_diff(expected) >= dev {
            extreme += c;
        }
    }
    Ok(RankSumTest {
        statistic: observed as f64 / 2.0,
        expected: expected as f64 / 2.0,
        p_value: (extreme as f64 / total as f64).min(1.0),
        method: PValueMethod::Exact,
    })
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> Result<RankSumTest> {
    check_sample(a)?;
    check_sample(b)?;
    let pooled = pool(a, b);
    let (observed, expected) = rank_sum_parts(&pooled);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let tie_term: f64 = pooled
        .tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let dev = observed.abs_diff(expected) as f64 / 2.0;
    let p_value = if variance <= 0.0 || dev <= CONTINUITY_CORRECTION {
        1.0
    } else {
        let z = (dev - CONTINUITY_CORRECTION) / variance.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    };
    Ok(RankSumTest {
        statistic: observed as f64 / 2.0,
        expected: expected as f64 / 2.0,
        p_value,
        method: PValueMethod::NormalApproximation,
    })
}

/// Mean final fitness per (function, algorithm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub functions: Vec<String>,
    pub algorithms: Vec<String>,
    /// `cells[f][a]`: mean final fitness of algorithm `a` on function `f`.
    pub cells: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanRanking {
    pub algorithms: Vec<String>,
    /// `ranks[f][a]`, 1 = best.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    /// Algorithm indices from best to worst mean rank.
    pub ordering: Vec<usize>,
}

pub fn friedman_mean_rank(table: &RankTable) -> Result<FriedmanRanking> {
    let n_alg = table.algorithms.len();
    if n_alg < 2 || table.functions.len() < 2 {
        return Err(Error::contract("need at least 2 algorithms and 2 functions"));
    }
    if table.cells.len() != table.functions.len() || table.cells.iter().any(|row| row.len() != n_alg) {
        return Err(Error::contract("rank table shape does not match its labels"));
    }
    if table.cells.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::contract("rank table cells must be finite"));
    }
    let ranks: Vec<Vec<f64>> = table.cells.iter().map(|row| average_ranks(row)).collect();
    let mut mean_ranks = vec![0.0; n_alg];
    for row in &ranks {
        for (m, r) in mean_ranks.iter_mut().zip(row) {
            *m += r;
        }
    }
    let n_fn = ranks.len() as f64;
    mean_ranks.iter_mut().for_each(|m| *m /= n_fn);
    let mut ordering: Vec<usize> = (0..n_alg).collect();
    ordering.sort_by(|&i, &j| mean_ranks[i].total_cmp(&mean_ranks[j]));
    Ok(FriedmanRanking {
        algorithms: table.algorithms.clone(),
        ranks,
        mean_ranks,
        ordering,
    })
}

/// Mean and sample standard deviation of final fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `n - 1` denominator; 0 when `n == 1`.
    pub std: f64,
    pub single_run: bool,
}

pub fn summarize_values(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::contract("summary needs at least one value"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(Summary {
        n,
        mean,
        std,
        single_run: n == 1,
    })
}

pub fn summarize(runs: &[RunRecord]) -> Result<Summary> {
    let v: Vec<f64> = runs.iter().map(|r| r.final_fitness).collect();
    summarize_values(&v)
}

/// Outcome of the reference algorithm against an opponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WinnerFlag {
    #[serde(rename = "+")]
    Winner,
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = "-")]
    Loser,
}

impl fmt::Display for WinnerFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WinnerFlag::Winner => "+",
            WinnerFlag::Equal => "=",
            WinnerFlag::Loser => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub outcome: RankSumOutcome,
    pub flag: WinnerFlag,
}

/// Compares `reference` against `opponent` at significance `alpha`.
pub fn compare(reference: &[f64], opponent: &[f64], alpha: f64) -> Result<Comparison> {
    let outcome = wilcoxon_rank_sum(reference, opponent)?;
    let flag = match outcome {
        RankSumOutcome::Test(t) if t.p_value < alpha => {
            if t.statistic < t.expected {
                WinnerFlag::Winner
            } else {
                WinnerFlag::Loser
            }
        }
        _ => WinnerFlag::Equal,
    };
    Ok(Comparison { outcome, flag })
}

/// One line of a comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub function: String,
    pub reference: String,
    pub opponent: String,
    pub comparison: Comparison,
}

/// CSV with header `function,reference,opponent,p_value,flag`; degenerate
/// comparisons print `NaN`.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("function,reference,opponent,p_value,flag\n");
    for r in rows {
        let p = match r.comparison.outcome {
            RankSumOutcome::Degenerate => "NaN".to_string(),
            RankSumOutcome::Test(t) => format!("{:e}", t.p_value),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.function, r.reference, r.opponent, p, r.comparison.flag
        ));
    }
    out
}

/// `algorithm,mean_rank,order` rows, best first.
pub fn friedman_csv(ranking: &FriedmanRanking) -> String {
    let mut out = String::from("algorithm,mean_rank,order\n");
    for (pos, &i) in ranking.ordering.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            ranking.algorithms[i],
            ranking.mean_ranks[i],
            pos + 1
        ));
    }
    out
}
