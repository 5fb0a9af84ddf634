use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::parallel::parallel_map;
use super::plot::convergence_svg;
use super::{parse_seed_list, split_list, write_manifest, BenchArgs, CompareArgs, GenDataArgs, HpoArgs, TrainArgs};
use crate::benchfns::{FunctionId, ObjectiveFunction};
use crate::error::{Error, Result};
use crate::fsio;
use crate::neuralnet::{HeadKind, NetworkSpec, TrainingHyperparameters};
use crate::optimizer::{run_benchmark, write_run, Algorithm, OptimizerConfig, RunRecord, RunSummary};
use crate::pipeline::folds::{stratified_group_kfold, stratified_kfold, FoldAssignment};
use crate::pipeline::hpo::{hpo_search, hpo_split, HpoConfig, HpoSpace};
use crate::pipeline::segment::Label;
use crate::pipeline::synth::{
    generate_synthetic, label_recovery_rate, load_dataset, reference_abnormal_fraction, save_dataset, SyntheticConfig,
};
use crate::pipeline::train::{
    labels_of, prepare_segments, subjects_of, train_and_evaluate, CvReport, LabeledSegment, PreprocessConfig,
};
use crate::stats::{
    compare as compare_samples, comparison_csv, friedman_csv, friedman_mean_rank, summarize_values, ComparisonRow,
    RankTable, WinnerFlag,
};

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| Error::Usage("an output directory is required (--out)".into()))
}

fn require_dir(p: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let p = p.clone().ok_or_else(|| Error::Usage(format!("--{what} is required")))?;
    if !p.is_dir() {
        return Err(Error::Usage(format!("{} is not a directory", p.display())));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub functions: Vec<String>,
    pub dims: Vec<usize>,
    pub algorithms: Vec<String>,
    pub seeds: Vec<u64>,
    pub pop: usize,
    pub iters: usize,
    pub plots: bool,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            functions: vec!["all".into()],
            dims: vec![30],
            algorithms: vec!["all".into()],
            seeds: (0..30).collect(),
            pop: 30,
            iters: 500,
            plots: true,
            jobs: 1,
            out: None,
        }
    }
}

impl BenchConfig {
    pub(super) fn from_args(a: &BenchArgs) -> Self {
        BenchConfig {
            functions: split_list(&a.functions),
            dims: split_list(&a.dims).iter().map(|d| d.parse().unwrap_or(0)).collect(),
            algorithms: split_list(&a.algorithms),
            seeds: parse_seed_list(&a.seeds).unwrap_or_default(),
            pop: a.pop,
            iters: a.iters,
            plots: !a.no_plots,
            jobs: a.common.jobs,
            out: a.common.out.clone(),
        }
    }

    pub fn function_ids(&self) -> Result<Vec<FunctionId>> {
        if self.functions.iter().any(|f| f == "all") {
            return Ok(FunctionId::ALL.to_vec());
        }
        self.functions.iter().map(|f| f.parse()).collect()
    }

    pub fn algorithm_ids(&self) -> Result<Vec<Algorithm>> {
        if self.algorithms.iter().any(|a| a == "all") {
            return Ok(Algorithm::ALL.to_vec());
        }
        self.algorithms.iter().map(|a| a.parse()).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Usage("dims must be positive integers".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Usage("at least one seed is required".into()));
        }
        OptimizerConfig::new(Algorithm::Hho, self.pop, self.iters, 0)
            .validate()
            .map_err(|e| Error::Usage(e.to_string()))
    }
}

/// Output of one bench grid.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub runs: Vec<(FunctionId, usize, RunRecord)>,
}

pub fn bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    let out = require_out(&cfg.out)?;
    cfg.validate()?;
    let functions = cfg.function_ids()?;
    let algorithms = cfg.algorithm_ids()?;
    let mut items = Vec::new();
    for &f in &functions {
        for &d in &cfg.dims {
            for &a in &algorithms {
                for &s in &cfg.seeds {
                    items.push((f, d, a, s));
                }
            }
        }
    }
    let results = parallel_map(&items, cfg.jobs, |&(f, d, a, s)| -> Result<RunRecord> {
        let obj = ObjectiveFunction::new(f, d)?;
        run_benchmark(&obj, &OptimizerConfig::new(a, cfg.pop, cfg.iters, s))
    });
    let runs_dir = out.join("runs");
    let mut runs = Vec::with_capacity(items.len());
    for (&(f, d, _, _), r) in items.iter().zip(results) {
        let record = r?;
        write_run(&runs_dir, &record, f.as_str(), d)?;
        runs.push((f, d, record));
    }

    let mut summary = String::from("algorithm,function,dim,runs,mean,std,median,best,worst\n");
    for &f in &functions {
        for &d in &cfg.dims {
            let mut series = Vec::new();
            for &a in &algorithms {
                let group: Vec<&RunRecord> = runs
                    .iter()
                    .filter(|(rf, rd, r)| *rf == f && *rd == d && r.algorithm == a)
                    .map(|(_, _, r)| r)
                    .collect();
                let mut finals: Vec<f64> = group.iter().map(|r| r.final_fitness).collect();
                let s = summarize_values(&finals)?;
                finals.sort_by(f64::total_cmp);
                let n = finals.len();
                let median = if n % 2 == 1 {
                    finals[n / 2]
                } else {
                    0.5 * (finals[n / 2 - 1] + finals[n / 2])
                };
                summary.push_str(&format!(
                    "{a},{f},{d},{n},{:e},{:e},{:e},{:e},{:e}\n",
                    s.mean,
                    s.std,
                    median,
                    finals[0],
                    finals[n - 1]
                ));
                let iters = group[0].best_trace.len();
                let mean_trace: Vec<f64> = (0..iters)
                    .map(|i| group.iter().map(|r| r.best_trace[i]).sum::<f64>() / n as f64)
                    .collect();
                series.push((a.to_string(), mean_trace));
            }
            if cfg.plots {
                let title = format!("{f}, dim {d}, mean best-so-far over {} seeds", cfg.seeds.len());
                // Shifted so functions with negative optima still plot on a log axis.
                let floor = series
                    .iter()
                    .flat_map(|(_, v)| v.iter().copied())
                    .fold(f64::INFINITY, f64::min);
                let series: Vec<(String, Vec<f64>)> = if floor < 0.0 {
                    series
                        .into_iter()
                        .map(|(n, v)| (n, v.into_iter().map(|y| y - floor).collect()))
                        .collect()
                } else {
                    series
                };
                fsio::write_atomic(
                    &out.join("plots").join(format!("{f}__d{d}.svg")),
                    convergence_svg(&title, &series).as_bytes(),
                )?;
            }
        }
    }
    fsio::write_atomic(&out.join("summary.csv"), summary.as_bytes())?;
    write_manifest(out, "bench", cfg)?;
    println!("bench: {} runs written to {}", runs.len(), out.display());
    Ok(BenchOutcome { runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub runs: Vec<PathBuf>,
    pub reference: Option<String>,
    pub alpha: f64,
    pub out: Option<PathBuf>,
}

impl CompareConfig {
    pub(super) fn from_args(a: &CompareArgs) -> Self {
        CompareConfig {
            runs: a.runs.clone(),
            reference: a.reference.clone(),
            alpha: a.alpha,
            out: a.common.out.clone(),
        }
    }
}

/// Loads every run summary under `dir` (or `dir/runs`).
pub fn load_run_summaries(dir: &Path) -> Result<Vec<RunSummary>> {
    let runs = dir.join("runs");
    let dir = if runs.is_dir() { runs } else { dir.to_path_buf() };
    if !dir.is_dir() {
        return Err(Error::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n.to_string_lossy().contains("__d"))
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(serde_json::from_str(&fsio::read_to_string(p)?)?))
        .collect()
}

/// Rows of a comparison report.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub rows: Vec<ComparisonRow>,
    pub table: RankTable,
}

fn function_order(name: &str) -> usize {
    name.parse::<FunctionId>()
        .ok()
        .and_then(|f| FunctionId::ALL.iter().position(|&g| g == f))
        .unwrap_or(usize::MAX)
}

/// Per-algorithm `(seed, final fitness)` pairs for one function and dimension.
type FinalsByAlgorithm = BTreeMap<Algorithm, Vec<(u64, f64)>>;

pub fn compare(cfg: &CompareConfig) -> Result<CompareOutcome> {
    let out = require_out(&cfg.out)?;
    if cfg.runs.is_empty() {
        return Err(Error::Usage("compare needs at least one run directory".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Usage("alpha must lie in (0, 1)".into()));
    }
    // (function, dim) -> algorithm -> (seed, final fitness)
    let mut groups: BTreeMap<(usize, String, usize), FinalsByAlgorithm> = BTreeMap::new();
    for dir in &cfg.runs {
        for s in load_run_summaries(dir)? {
            groups
                .entry((function_order(&s.function), s.function.clone(), s.dim))
                .or_default()
                .entry(s.algorithm)
                .or_default()
                .push((s.seed, s.final_fitness));
        }
    }
    let algorithms: Vec<Algorithm> = {
        let mut set: Vec<Algorithm> = groups.values().flat_map(|m| m.keys().copied()).collect();
        set.sort_by_key(|a| Algorithm::ALL.iter().position(|b| b == a));
        set.dedup();
        set
    };
    if algorithms.len() < 2 {
        return Err(Error::Usage(
            "compare needs results from at least two algorithms".into(),
        ));
    }
    for ((_, f, d), m) in &groups {
        if m.len() != algorithms.len() {
            return Err(Error::Usage(format!(
                "mismatched function sets: {f} (dim {d}) lacks results for some algorithms"
            )));
        }
    }
    let reference: Algorithm = match &cfg.reference {
        Some(r) => r.parse()?,
        None if algorithms.contains(&Algorithm::HhoPlus) => Algorithm::HhoPlus,
        None => algorithms[0],
    };
    if !algorithms.contains(&reference) {
        return Err(Error::Usage(format!("reference {reference} has no results")));
    }
    let mut ordered = vec![reference];
    ordered.extend(algorithms.iter().copied().filter(|&a| a != reference));
    let dims: std::collections::BTreeSet<usize> = groups.keys().map(|k| k.2).collect();
    let label = |f: &str, d: usize| {
        if dims.len() == 1 {
            f.to_string()
        } else {
            format!("{f}_d{d}")
        }
    };

    let mut rows = Vec::new();
    let mut table = RankTable {
        functions: Vec::new(),
        algorithms: ordered.iter().map(|a| a.to_string()).collect(),
        cells: Vec::new(),
    };
    let mut report = String::new();
    report.push_str("| function |");
    for a in &ordered {
        report.push_str(&format!(" {a} mean (std) |"));
    }
    for a in &ordered[1..] {
        report.push_str(&format!(" vs {a} |"));
    }
    report.push('\n');
    report.push_str(&"|---".repeat(1 + ordered.len() + ordered.len() - 1));
    report.push_str("|\n");
    let mut tally: BTreeMap<Algorithm, [usize; 3]> = BTreeMap::new();
    for ((_, f, d), m) in &groups {
        let name = label(f, *d);
        let values = |a: &Algorithm| -> Vec<f64> {
            let mut v = m[a].clone();
            v.sort_by_key(|(s, _)| *s);
            v.into_iter().map(|(_, x)| x).collect()
        };
        let mut means = Vec::new();
        report.push_str(&format!("| {name} |"));
        for a in &ordered {
            let s = summarize_values(&values(a))?;
            means.push(s.mean);
            report.push_str(&format!(" {:.4e} ({:.2e}) |", s.mean, s.std));
        }
        for &opp in &ordered[1..] {
            let c = compare_samples(&values(&reference), &values(&opp), cfg.alpha)?;
            let t = tally.entry(opp).or_default();
            match c.flag {
                WinnerFlag::Winner => t[0] += 1,
                WinnerFlag::Equal => t[1] += 1,
                WinnerFlag::Loser => t[2] += 1,
            }
            report.push_str(&format!(" {} (p={:.3e}) |", c.flag, c.outcome.p_value()));
            rows.push(ComparisonRow {
                function: name.clone(),
                reference: reference.to_string(),
                opponent: opp.to_string(),
                comparison: c,
            });
        }
        report.push('\n');
        table.functions.push(name);
        table.cells.push(means);
    }
    report.push('\n');
    for (opp, [w, t, l]) in &tally {
        report.push_str(&format!("{reference} vs {opp}: +{w} / ={t} / -{l}\n"));
    }
    fsio::write_atomic(&out.join("comparison.csv"), comparison_csv(&rows).as_bytes())?;
    match friedman_mean_rank(&table) {
        Ok(ranking) => {
            report.push_str("\nFriedman mean rank (lower is better):\n");
            for (pos, &i) in ranking.ordering.iter().enumerate() {
                report.push_str(&format!(
                    "{}. {} {:.4}\n",
                    pos + 1,
                    ranking.algorithms[i],
                    ranking.mean_ranks[i]
                ));
            }
            fsio::write_atomic(&out.join("friedman.csv"), friedman_csv(&ranking).as_bytes())?;
        }
        Err(_) => report.push_str("\nFriedman ranking needs at least two functions.\n"),
    }
    fsio::write_atomic(&out.join("report.md"), report.as_bytes())?;
    write_manifest(out, "compare", cfg)?;
    print!("{report}");
    Ok(CompareOutcome { rows, table })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDataConfig {
    pub subjects: usize,
    pub segments: usize,
    pub abnormal_fraction: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl GenDataConfig {
    pub(super) fn from_args(a: &GenDataArgs) -> Self {
        GenDataConfig {
            subjects: a.subjects,
            segments: a.segments,
            abnormal_fraction: a.abnormal_fraction.unwrap_or_else(reference_abnormal_fraction),
            seed: a.seed,
            out: a.common.out.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct DatasetSummary {
    segments: usize,
    intended_abnormal: usize,
    intended_normal: usize,
    label_recovery_rate: f64,
}

pub fn gen_data(cfg: &GenDataConfig) -> Result<()> {
    let out = require_out(&cfg.out)?;
    let synth = SyntheticConfig {
        n_subjects: cfg.subjects,
        segments_per_subject: cfg.segments,
        abnormal_fraction: cfg.abnormal_fraction,
        seed: cfg.seed,
        ..Default::default()
    };
    let data = generate_synthetic(&synth).map_err(|e| match e {
        Error::Contract(m) => Error::Usage(m),
        other => other,
    })?;
    save_dataset(&data, out)?;
    let flat = data.intended_flat();
    let abnormal = flat.iter().filter(|&&l| l == Label::Abnormal).count();
    let summary = DatasetSummary {
        segments: flat.len(),
        intended_abnormal: abnormal,
        intended_normal: flat.len() - abnormal,
        label_recovery_rate: label_recovery_rate(&data)?,
    };
    fsio::write_atomic(
        &out.join("dataset_summary.json"),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    write_manifest(out, "gen-data", cfg)?;
    println!(
        "gen-data: {} segments ({} abnormal), label recovery {:.4}, written to {}",
        summary.segments,
        abnormal,
        summary.label_recovery_rate,
        out.display()
    );
    Ok(())
}

fn load_segments(dir: &Path) -> Result<Vec<LabeledSegment>> {
    let data = load_dataset(dir)?;
    let segs = prepare_segments(&data.records, &PreprocessConfig::default())?;
    if segs.is_empty() {
        eprintln!("warning: recordings are shorter than one segment; no data to use");
        return Err(Error::Usage(format!("{} holds no complete segments", dir.display())));
    }
    Ok(segs)
}

fn load_spec(network: &Option<PathBuf>, head: &str) -> Result<NetworkSpec> {
    let kind: HeadKind = head.parse()?;
    let spec = match network {
        Some(p) => {
            serde_json::from_str::<NetworkSpec>(&fsio::read_to_string(p).map_err(|e| Error::Usage(e.to_string()))?)
                .map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?
                .with_head(kind)
        }
        None => NetworkSpec::desk_default(kind),
    };
    spec.shapes().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(spec)
}

fn make_folds(segs: &[LabeledSegment], k: usize, seed: u64, subject_integrity: bool) -> Result<FoldAssignment> {
    let labels = labels_of(segs);
    let folds = if subject_integrity {
        stratified_group_kfold(&labels, &subjects_of(segs), k, seed)
    } else {
        stratified_kfold(&labels, k, seed)
    };
    folds.map_err(|e| match e {
        Error::Contract(m) => Error::Usage(m),
        other => other,
    })
}

fn write_cv(out: &Path, report: &CvReport, folds: &FoldAssignment) -> Result<()> {
    fsio::write_atomic(&out.join("folds.csv"), report.folds_csv().as_bytes())?;
    fsio::write_atomic(&out.join("summary.csv"), report.summary_csv().as_bytes())?;
    #[derive(Serialize)]
    struct Report<'a> {
        report: &'a CvReport,
        fold_class_counts: &'a [[usize; 2]],
    }
    fsio::write_atomic(
        &out.join("report.json"),
        serde_json::to_string_pretty(&Report {
            report,
            fold_class_counts: &folds.class_counts,
        })?
        .as_bytes(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub data: Option<PathBuf>,
    pub head: String,
    pub network: Option<PathBuf>,
    pub hyper: TrainingHyperparameters,
    pub folds: usize,
    pub seed: u64,
    pub subject_integrity: bool,
    pub out: Option<PathBuf>,
}

impl TrainConfig {
    pub(super) fn from_args(a: &TrainArgs) -> Self {
        let from_file = a.hyper.as_ref().and_then(|p| {
            fsio::read_to_string(p)
                .ok()
                .and_then(|t| serde_json::from_str::<TrainingHyperparameters>(&t).ok())
        });
        TrainConfig {
            data: a.data.clone(),
            head: a.head.clone(),
            network: a.network.clone(),
            hyper: from_file.unwrap_or(TrainingHyperparameters {
                ilr: a.ilr,
                lrdf: a.lrdf,
                dp: a.dp,
                drop_period: a.drop_period,
                batch_size: a.batch,
                max_training_iterations: a.iters,
            }),
            folds: a.folds,
            seed: a.seed,
            subject_integrity: a.subject_integrity,
            out: a.common.out.clone(),
        }
    }
}

pub fn train(cfg: &TrainConfig) -> Result<CvReport> {
    let out = require_out(&cfg.out)?;
    let data = require_dir(&cfg.data, "data")?;
    cfg.hyper.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let spec = load_spec(&cfg.network, &cfg.head)?;
    let segs = load_segments(&data)?;
    let folds = make_folds(&segs, cfg.folds, cfg.seed, cfg.subject_integrity)?;
    let report = train_and_evaluate(&spec, &segs, &folds, &cfg.hyper, cfg.seed)?;
    write_cv(out, &report, &folds)?;
    write_manifest(out, "train", cfg)?;
    print!("{}", report.summary_csv());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpoCommandConfig {
    pub data: Option<PathBuf>,
    pub head: String,
    pub network: Option<PathBuf>,
    pub algorithm: String,
    pub pop: usize,
    pub iters: usize,
    pub repeats: usize,
    pub seed: u64,
    pub subset: usize,
    pub validation_fraction: f64,
    pub base: TrainingHyperparameters,
    pub space: HpoSpace,
    pub evaluate: bool,
    pub folds: usize,
    pub cv_iters: usize,
    pub out: Option<PathBuf>,
}

impl HpoCommandConfig {
    pub(super) fn from_args(a: &HpoArgs) -> Self {
        HpoCommandConfig {
            data: a.data.clone(),
            head: a.head.clone(),
            network: None,
            algorithm: a.algorithm.clone(),
            pop: a.pop,
            iters: a.iters,
            repeats: a.repeats,
            seed: a.seed,
            subset: a.subset,
            validation_fraction: a.validation_fraction,
            base: TrainingHyperparameters {
                drop_period: a.drop_period,
                batch_size: Some(a.batch),
                max_training_iterations: a.train_iters,
                ..Default::default()
            },
            space: HpoSpace::default(),
            evaluate: a.evaluate,
            folds: a.folds,
            cv_iters: a.cv_iters,
            out: a.common.out.clone(),
        }
    }
}

/// Hyperparameters found by a short-budget search, rescaled to a longer
/// training run: the number of learning-rate drops is kept.
pub fn scale_schedule(best: &TrainingHyperparameters, iterations: usize) -> TrainingHyperparameters {
    let factor = iterations as f64 / best.max_training_iterations as f64;
    TrainingHyperparameters {
        max_training_iterations: iterations,
        drop_period: ((best.drop_period as f64 * factor).round() as usize).max(1),
        batch_size: None,
        ..*best
    }
}

pub fn hpo(cfg: &HpoCommandConfig) -> Result<crate::pipeline::HpoResult> {
    let out = require_out(&cfg.out)?;
    let data = require_dir(&cfg.data, "data")?;
    let algorithm: Algorithm = cfg.algorithm.parse()?;
    if cfg.pop == 0 || cfg.iters == 0 || cfg.repeats == 0 {
        return Err(Error::Usage("pop, iters and repeats must be positive".into()));
    }
    if !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) {
        return Err(Error::Usage("validation fraction must lie in (0, 1)".into()));
    }
    cfg.base.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let spec = load_spec(&cfg.network, &cfg.head)?;
    let segs = load_segments(&data)?;
    let (train_idx, val_idx) = hpo_split(&segs, cfg.subset, cfg.validation_fraction, cfg.seed);
    let search = HpoConfig {
        population: cfg.pop,
        iterations: cfg.iters,
        repeats: cfg.repeats,
        algorithm,
        seed: cfg.seed,
        space: cfg.space,
        base: cfg.base,
    };
    let result = hpo_search(&spec, &segs, &train_idx, &val_idx, &search)?;
    fsio::write_atomic(&out.join("hpo_trace.csv"), result.trace_csv().as_bytes())?;
    let mut conv = String::from("iter,best_fitness\n");
    for (i, f) in result.best_trace.iter().enumerate() {
        conv.push_str(&format!("{},{f:e}\n", i + 1));
    }
    fsio::write_atomic(&out.join("convergence.csv"), conv.as_bytes())?;
    fsio::write_atomic(
        &out.join("best.json"),
        serde_json::to_string_pretty(&result.best)?.as_bytes(),
    )?;
    fsio::write_atomic(
        &out.join("result.json"),
        serde_json::to_string_pretty(&result)?.as_bytes(),
    )?;
    println!(
        "hpo: best ilr={:e} lrdf={} dp={} validation loss {:e}",
        result.best.ilr, result.best.lrdf, result.best.dp, result.best_fitness
    );
    if cfg.evaluate {
        let full = scale_schedule(&result.best, cfg.cv_iters);
        let folds = make_folds(&segs, cfg.folds, cfg.seed, false)?;
        let report = train_and_evaluate(&spec, &segs, &folds, &full, cfg.seed)?;
        fsio::write_atomic(
            &out.join("best_full.json"),
            serde_json::to_string_pretty(&full)?.as_bytes(),
        )?;
        write_cv(out, &report, &folds)?;
        print!("{}", report.summary_csv());
    }
    write_manifest(out, "hpo", cfg)?;
    Ok(result)
}
