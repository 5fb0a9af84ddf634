//! Command-line front end: `bench`, `compare`, `gen-data`, `train`, `hpo`.
//!
//! Every command writes its artifacts under `--out` together with a
//! `manifest.json` holding the full resolved configuration. Passing that
//! manifest back through `--config` replays the command.

mod commands;
pub mod parallel;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fsio;

pub use commands::{
    bench, compare, gen_data, hpo, load_run_summaries, scale_schedule, train, BenchConfig, BenchOutcome, CompareConfig,
    CompareOutcome, GenDataConfig, HpoCommandConfig, TrainConfig,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(
    name = "hhofenn",
    version,
    about = "HHO+ benchmarks and CNN-FENN pulsatile signal classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an (algorithm x function x dim x seed) optimizer grid.
    Bench(BenchArgs),
    /// Wilcoxon and Friedman comparison of bench results.
    Compare(CompareArgs),
    /// Generate a synthetic flow/PAWP dataset.
    GenData(GenDataArgs),
    /// k-fold training and evaluation of the CNN classifier.
    Train(TrainArgs),
    /// Hyperparameter search over ILR, LRDF and DP.
    Hpo(HpoArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory. Takes precedence over `out` in a config file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file whose keys override the flags (a manifest also works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated function ids, or `all`.
    #[arg(long, default_value = "all")]
    pub functions: String,
    /// Comma-separated dimensions.
    #[arg(long, default_value = "30")]
    pub dims: String,
    /// Comma-separated algorithm ids, or `all`.
    #[arg(long, default_value = "all")]
    pub algorithms: String,
    /// Seeds as a list with ranges, e.g. `0-29` or `1,2,5-7`.
    #[arg(long, default_value = "0-29")]
    pub seeds: String,
    #[arg(long, default_value_t = 30)]
    pub pop: usize,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Skip the SVG convergence plots.
    #[arg(long)]
    pub no_plots: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Bench output directories (or their `runs/` subdirectories).
    pub runs: Vec<PathBuf>,
    /// Reference algorithm; defaults to hho_plus when present.
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long, default_value_t = crate::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 30)]
    pub subjects: usize,
    #[arg(long, default_value_t = 60)]
    pub segments: usize,
    /// Defaults to 459 / 1797.
    #[arg(long)]
    pub abnormal_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory written by `gen-data`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Head architecture: mlp, enn or fenn.
    #[arg(long, default_value = "fenn")]
    pub head: String,
    /// JSON network spec replacing the default topology.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// JSON training hyperparameters (e.g. `best.json` from `hpo`).
    #[arg(long)]
    pub hyper: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub ilr: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lrdf: f64,
    #[arg(long, default_value_t = 0.2)]
    pub dp: f64,
    #[arg(long, default_value_t = 100)]
    pub drop_period: usize,
    /// Mini-batch size; defaults to a tenth of the training set.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Keep every subject inside a single fold.
    #[arg(long)]
    pub subject_integrity: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HpoArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "fenn")]
    pub head: String,
    #[arg(long, default_value = "hho_plus")]
    pub algorithm: String,
    #[arg(long, default_value_t = 6)]
    pub pop: usize,
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    /// Trainings averaged per fitness evaluation.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Segments drawn (stratified) for the search.
    #[arg(long, default_value_t = 400)]
    pub subset: usize,
    #[arg(long, default_value_t = 0.25)]
    pub validation_fraction: f64,
    /// Training iterations per fitness evaluation.
    #[arg(long, default_value_t = 40)]
    pub train_iters: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 20)]
    pub drop_period: usize,
    /// Retrain with the best values under k-fold evaluation.
    #[arg(long)]
    pub evaluate: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Training iterations for the final k-fold evaluation.
    #[arg(long, default_value_t = 400)]
    pub cv_iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest<C> {
    tool: String,
    version: String,
    command: String,
    config: C,
}

/// Overlays the keys of a JSON config file (or of a manifest's `config`)
/// onto `base`. Unknown keys are rejected.
pub fn merge_config<C: Serialize + DeserializeOwned>(base: C, command: &str, path: Option<&Path>) -> Result<C> {
    let Some(path) = path else {
        return Ok(base);
    };
    let text = fsio::read_to_string(path).map_err(|e| Error::Usage(e.to_string()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    let overlay = match (value.get("command"), value.get("config")) {
        (Some(cmd), Some(cfg)) => {
            if cmd.as_str() != Some(command) {
                return Err(Error::Usage(format!(
                    "{} is a manifest for '{}', not '{command}'",
                    path.display(),
                    cmd.as_str().unwrap_or("?")
                )));
            }
            cfg.clone()
        }
        _ => value,
    };
    let Value::Object(overlay) = overlay else {
        return Err(Error::Usage(format!("{} must hold a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(base)?;
    let target = merged.as_object_mut().expect("configs serialize to objects");
    for (k, v) in overlay {
        if !target.contains_key(&k) {
            return Err(Error::Usage(format!("unknown config key '{k}' for {command}")));
        }
        target.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

pub(crate) fn write_manifest<C: Serialize>(out: &Path, command: &str, config: &C) -> Result<()> {
    let manifest = Manifest {
        tool: "hhofenn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config,
    };
    fsio::write_atomic(
        &out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )
}

fn resolve<C: Serialize + DeserializeOwned>(
    base: C,
    command: &str,
    common: &Common,
    set_out: impl FnOnce(&mut C, PathBuf),
) -> Result<C> {
    let mut cfg = merge_config(base, command, common.config.as_deref())?;
    if let Some(out) = &common.out {
        set_out(&mut cfg, out.clone());
    }
    Ok(cfg)
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(a) => {
            let cfg = resolve(BenchConfig::from_args(&a), "bench", &a.common, |c, o| c.out = Some(o))?;
            commands::bench(&cfg).map(|_| ())
        }
        Command::Compare(a) => {
            let cfg = resolve(CompareConfig::from_args(&a), "compare", &a.common, |c, o| {
                c.out = Some(o)
            })?;
            commands::compare(&cfg).map(|_| ())
        }
        Command::GenData(a) => {
            let cfg = resolve(GenDataConfig::from_args(&a), "gen-data", &a.common, |c, o| {
                c.out = Some(o)
            })?;
            commands::gen_data(&cfg)
        }
        Command::Train(a) => {
            let cfg = resolve(TrainConfig::from_args(&a), "train", &a.common, |c, o| c.out = Some(o))?;
            commands::train(&cfg).map(|_| ())
        }
        Command::Hpo(a) => {
            let cfg = resolve(HpoCommandConfig::from_args(&a), "hpo", &a.common, |c, o| {
                c.out = Some(o)
            })?;
            commands::hpo(&cfg).map(|_| ())
        }
    }
}

/// Exit code for an error: 2 for usage problems, 1 otherwise.
pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::UnknownId(_) => 2,
        _ => 1,
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// `1,3,5-7` into `[1, 3, 5, 6, 7]`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Usage(format!("bad seed list entry '{part}'"));
        if let Some((a, b)) = part.split_once('-') {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("empty seed list".into()));
    }
    Ok(out)
}

pub(crate) fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seed_list("0-3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seed_list("5, 1,2-3").unwrap(), vec![5, 1, 2, 3]);
        assert!(parse_seed_list("3-1").is_err());
        assert!(parse_seed_list("x").is_err());
        assert!(parse_seed_list("").is_err());
    }

    #[test]
    fn config_overlay_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"pop": 7}"#).unwrap();
        let base = BenchConfig::default();
        let merged = merge_config(base.clone(), "bench", Some(&path)).unwrap();
        assert_eq!(merged.pop, 7);
        assert_eq!(merged.iters, base.iters);
        std::fs::write(&path, r#"{"popsize": 7}"#).unwrap();
        assert!(matches!(
            merge_config(base.clone(), "bench", Some(&path)),
            Err(Error::Usage(_))
        ));
        std::fs::write(&path, r#"{"command": "train", "config": {}}"#).unwrap();
        assert!(matches!(merge_config(base, "bench", Some(&path)), Err(Error::Usage(_))));
    }
}
