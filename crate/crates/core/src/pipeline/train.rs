//! Preprocessing into labeled segments, training, and k-fold evaluation.

use ndarray::{Array2, Array3, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::filter::{butterworth_lowpass_design, DEFAULT_EDGE_HZ, DEFAULT_ORDER};
use super::folds::FoldAssignment;
use super::metrics::{confusion_metrics, format_metric, ConfusionMatrix, Metrics};
use super::segment::{label_segment, segment, Label, DEFAULT_HIGH_MMHG, DEFAULT_LOW_MMHG, SEGMENT_LEN};
use super::synth::SignalRecord;
use crate::error::{Error, Result};
use crate::neuralnet::adam::{Adam, AdamConfig};
use crate::neuralnet::loss::class_weights;
use crate::neuralnet::network::{Network, NetworkSpec, TrainingHyperparameters};
use crate::rng;
use crate::stats::summarize_values;

pub const VALIDATION_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub edge_hz: f64,
    pub order: usize,
    pub segment_len: usize,
    pub low_mmhg: f64,
    pub high_mmhg: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            edge_hz: DEFAULT_EDGE_HZ,
            order: DEFAULT_ORDER,
            segment_len: SEGMENT_LEN,
            low_mmhg: DEFAULT_LOW_MMHG,
            high_mmhg: DEFAULT_HIGH_MMHG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub flow_segment: Vec<f64>,
    pub label: Label,
    pub mean_pawp: f64,
    pub subject_id: u32,
    /// The label came from the whole-segment mean.
    pub fallback: bool,
}

/// Filter, segment and label every record.
pub fn prepare_segments(records: &[SignalRecord], config: &PreprocessConfig) -> Result<Vec<LabeledSegment>> {
    let mut out = Vec::new();
    for rec in records {
        rec.validate()?;
        let filt = butterworth_lowpass_design(config.order, config.edge_hz, rec.fs)?;
        let flow = filt.filtfilt(&rec.flow)?;
        let pawp = filt.filtfilt(&rec.pawp)?;
        for (f, p) in segment(&flow, config.segment_len)
            .into_iter()
            .zip(segment(&pawp, config.segment_len))
        {
            let l = label_segment(&p, rec.fs, config.low_mmhg, config.high_mmhg);
            out.push(LabeledSegment {
                flow_segment: f,
                label: l.label,
                mean_pawp: l.mean_pawp,
                subject_id: rec.subject_id,
                fallback: l.fallback,
            });
        }
    }
    Ok(out)
}

pub fn labels_of(data: &[LabeledSegment]) -> Vec<Label> {
    data.iter().map(|s| s.label).collect()
}

pub fn subjects_of(data: &[LabeledSegment]) -> Vec<u32> {
    data.iter().map(|s| s.subject_id).collect()
}

/// Global scalar standardization fitted on training segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn fit(data: &[LabeledSegment], indices: &[usize]) -> Self {
        let n: usize = indices.iter().map(|&i| data[i].flow_segment.len()).sum();
        let mean = indices.iter().flat_map(|&i| data[i].flow_segment.iter()).sum::<f64>() / n as f64;
        let var = indices
            .iter()
            .flat_map(|&i| data[i].flow_segment.iter())
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / n as f64;
        Standardizer {
            mean,
            std: if var > 0.0 { var.sqrt() } else { 1.0 },
        }
    }

    /// `(n, 1, len)` batch of the given segments.
    pub fn batch(&self, data: &[LabeledSegment], indices: &[usize]) -> Array3<f64> {
        let len = data
            .get(indices.first().copied().unwrap_or(0))
            .map_or(0, |s| s.flow_segment.len());
        Array3::from_shape_fn((indices.len(), 1, len), |(b, _, t)| {
            (data[indices[b]].flow_segment[t] - self.mean) / self.std
        })
    }
}

/// Stratified hold-out: about `fraction` of each class (at least one sample
/// of any class with two or more).
pub fn stratified_holdout(
    data: &[LabeledSegment],
    indices: &[usize],
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut held = Vec::new();
    for (j, class) in [Label::Abnormal, Label::Normal].into_iter().enumerate() {
        let mut members: Vec<usize> = indices.iter().copied().filter(|&i| data[i].label == class).collect();
        members.shuffle(&mut rng::child_stream(seed, &[j as u64]));
        let mut take = (fraction * members.len() as f64).round() as usize;
        if take == 0 && members.len() >= 2 && fraction > 0.0 {
            take = 1;
        }
        held.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    held.sort_unstable();
    (train, held)
}

/// A trained network with the input scaling it expects.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network,
    pub standardizer: Standardizer,
    pub class_weights: Vec<f64>,
    /// Mini-batch loss at every iteration.
    pub loss_trace: Vec<f64>,
    /// Weighted cross-entropy on the validation indices (NaN if none).
    pub validation_loss: f64,
}

impl TrainedModel {
    pub fn predict(&self, data: &[LabeledSegment], indices: &[usize]) -> Result<Vec<Label>> {
        let mut out = Vec::with_capacity(indices.len());
        for chunk in indices.chunks(256) {
            let probs = self.network.predict(&self.standardizer.batch(data, chunk))?;
            out.extend(probs.outer_iter().map(|row| {
                let best = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map_or(0, |(i, _)| i);
                Label::from_index(best)
            }));
        }
        Ok(out)
    }

    pub fn loss_on(&self, data: &[LabeledSegment], indices: &[usize]) -> Result<f64> {
        if indices.is_empty() {
            return Ok(f64::NAN);
        }
        let mut total = 0.0;
        for chunk in indices.chunks(256) {
            let targets: Vec<usize> = chunk.iter().map(|&i| data[i].label.index()).collect();
            let l = self
                .network
                .evaluate_loss(&self.standardizer.batch(data, chunk), &targets, &self.class_weights)?;
            total += l * chunk.len() as f64;
        }
        Ok(total / indices.len() as f64)
    }
}

/// Mini-batch Adam on `train`, then the loss on `validation`.
///
/// Batches are drawn by walking a fresh shuffle of the training set each
/// epoch. Class weights come from the training counts.
pub fn train_model(
    spec: &NetworkSpec,
    data: &[LabeledSegment],
    train: &[usize],
    validation: &[usize],
    hyper: &TrainingHyperparameters,
    seed: u64,
) -> Result<TrainedModel> {
    hyper.validate()?;
    if train.len() < 2 {
        return Err(Error::contract("need at least two training segments"));
    }
    let mut counts = [0usize; 2];
    for &i in train {
        counts[data[i].label.index()] += 1;
    }
    let weights = class_weights(&counts)?.weights;
    let standardizer = Standardizer::fit(data, train);
    let spec = spec.clone().with_dropout(hyper.dp);
    let mut network = Network::new(spec, &mut rng::child_stream(seed, &[0]))?;
    let batch_size = hyper.batch_size.unwrap_or(train.len() / 10).clamp(2, train.len());
    let mut adam = Adam::new(AdamConfig::with_lr(hyper.ilr), &network.param_sizes());
    let mut order_rng = rng::child_stream(seed, &[1]);
    let mut dropout_rng = rng::child_stream(seed, &[2]);
    let mut order: Vec<usize> = train.to_vec();
    order.shuffle(&mut order_rng);
    let mut cursor = 0usize;
    let mut loss_trace = Vec::with_capacity(hyper.max_training_iterations);

    for iter in 0..hyper.max_training_iterations {
        if cursor + batch_size > order.len() {
            order.shuffle(&mut order_rng);
            cursor = 0;
        }
        let batch_idx = &order[cursor..cursor + batch_size];
        cursor += batch_size;
        let x = standardizer.batch(data, batch_idx);
        let targets: Vec<usize> = batch_idx.iter().map(|&i| data[i].label.index()).collect();
        let (loss, grads) = network.loss_and_gradients(&x, &targets, &weights, &mut dropout_rng)?;
        if !loss.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("training loss diverged at iteration {iter}")));
        }
        loss_trace.push(loss);
        adam.config.lr = hyper.learning_rate(iter);
        adam.step(network.params_mut(), &grads);
    }

    let mut model = TrainedModel {
        network,
        standardizer,
        class_weights: weights,
        loss_trace,
        validation_loss: f64::NAN,
    };
    model.validation_loss = model.loss_on(data, validation)?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FoldOutcome {
    Ok {
        confusion: ConfusionMatrix,
        metrics: Metrics,
        validation_loss: f64,
        final_training_loss: f64,
    },
    Failed {
        diagnostic: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub outcome: FoldOutcome,
}

impl FoldResult {
    pub fn metrics(&self) -> Option<&Metrics> {
        match &self.outcome {
            FoldOutcome::Ok { metrics, .. } => Some(metrics),
            FoldOutcome::Failed { .. } => None,
        }
    }
}

/// Mean and sample standard deviation over folds where the metric exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub accuracy: MetricSummary,
    pub sensitivity: MetricSummary,
    pub specificity: MetricSummary,
}

fn summarize_metric(folds: &[FoldResult], pick: impl Fn(&Metrics) -> Option<f64>) -> MetricSummary {
    let values: Vec<f64> = folds.iter().filter_map(|f| f.metrics().and_then(&pick)).collect();
    match summarize_values(&values) {
        Ok(s) => MetricSummary {
            mean: Some(s.mean),
            std: (!s.single_run).then_some(s.std),
            folds: values.len(),
        },
        Err(_) => MetricSummary {
            mean: None,
            std: None,
            folds: 0,
        },
    }
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        CvReport {
            accuracy: summarize_metric(&folds, |m| m.accuracy),
            sensitivity: summarize_metric(&folds, |m| m.sensitivity),
            specificity: summarize_metric(&folds, |m| m.specificity),
            folds,
        }
    }

    /// `fold,accuracy,sensitivity,specificity`, one row per fold.
    pub fn folds_csv(&self) -> String {
        let mut out = String::from("fold,accuracy,sensitivity,specificity\n");
        for f in &self.folds {
            match f.metrics() {
                Some(m) => out.push_str(&format!(
                    "{},{},{},{}\n",
                    f.fold,
                    format_metric(m.accuracy),
                    format_metric(m.sensitivity),
                    format_metric(m.specificity)
                )),
                None => out.push_str(&format!("{},failed,failed,failed\n", f.fold)),
            }
        }
        out
    }

    /// `metric,mean,std` summary rows.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,mean,std\n");
        for (name, s) in [
            ("accuracy", &self.accuracy),
            ("sensitivity", &self.sensitivity),
            ("specificity", &self.specificity),
        ] {
            out.push_str(&format!("{name},{},{}\n", format_metric(s.mean), format_metric(s.std)));
        }
        out
    }
}

/// k-fold evaluation: train on the other folds minus a 10% stratified
/// validation carve-out, test on the held-out fold.
pub fn train_and_evaluate(
    spec: &NetworkSpec,
    data: &[LabeledSegment],
    folds: &FoldAssignment,
    hyper: &TrainingHyperparameters,
    seed: u64,
) -> Result<CvReport> {
    spec.shapes()?;
    hyper.validate()?;
    if !folds.is_partition_of(data.len()) {
        return Err(Error::contract("fold assignment does not partition the data"));
    }
    let labels = labels_of(data);
    let mut results = Vec::with_capacity(folds.k());
    for (f, test) in folds.folds.iter().enumerate() {
        let pool = if folds.k() == 1 {
            test.clone()
        } else {
            folds.training_indices(f)
        };
        let (train, validation) =
            stratified_holdout(data, &pool, VALIDATION_FRACTION, rng::derive_seed(seed, &[f as u64, 0]));
        let outcome = match train_model(
            spec,
            data,
            &train,
            &validation,
            hyper,
            rng::derive_seed(seed, &[f as u64, 1]),
        ) {
            Ok(model) => {
                let predicted = model.predict(data, test)?;
                let actual: Vec<Label> = test.iter().map(|&i| labels[i]).collect();
                let confusion = ConfusionMatrix::from_predictions(&predicted, &actual)?;
                FoldOutcome::Ok {
                    metrics: confusion_metrics(&confusion),
                    confusion,
                    validation_loss: model.validation_loss,
                    final_training_loss: model.loss_trace.last().copied().unwrap_or(f64::NAN),
                }
            }
            Err(e @ (Error::NonFinite(_) | Error::NonFiniteFitness { .. })) => FoldOutcome::Failed {
                diagnostic: e.to_string(),
            },
            Err(e) => return Err(e),
        };
        results.push(FoldResult {
            fold: f,
            train_size: train.len(),
            test_size: test.len(),
            outcome,
        });
    }
    Ok(CvReport::from_folds(results))
}

/// Rows of a `(n, len)` matrix of standardized segments; used by tests and
/// tools that inspect network inputs.
pub fn standardized_matrix(data: &[LabeledSegment], indices: &[usize], s: &Standardizer) -> Array2<f64> {
    s.batch(data, indices).index_axis_move(Axis(1), 0)
}
