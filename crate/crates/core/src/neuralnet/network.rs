//! A 1-D CNN feature extractor followed by an Elman-family head.
//!
//! The head reads the final feature map one time index at a time, with the
//! channels of that index as the input vector.

use std::path::Path;

use ndarray::{Array1, Array2, Array3, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fenn::{fenn_backward, fenn_sequence_forward, FennParameters, FennTrace, HeadKind};
use super::init::he_normal;
use super::layers::{
    batchnorm1d_backward, batchnorm1d_forward, conv1d_backward, conv1d_forward, dropout_mask, leaky_relu_backward,
    leaky_relu_forward, maxpool1d_backward, maxpool1d_forward, window_output_len, BatchNormCache, Mode, RunningStats,
    DEFAULT_BN_EPS, DEFAULT_LEAKY_SLOPE,
};
use super::loss::{weighted_cross_entropy, weighted_cross_entropy_grad_probs};
use crate::error::{Error, Result};
use crate::fsio;

pub const FORMAT_NAME: &str = "hhofenn-network";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        channels: usize,
        kernel: usize,
        stride: usize,
    },
    Batchnorm,
    LeakyRelu {
        slope: f64,
    },
    Maxpool {
        width: usize,
        stride: usize,
    },
    Dropout {
        p: f64,
    },
    Head {
        kind: HeadKind,
        hidden: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_channels: usize,
    pub input_length: usize,
    pub classes: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Three conv/batchnorm/leaky-ReLU/max-pool blocks, dropout, then the head.
    pub fn desk_default(kind: HeadKind) -> Self {
        let mut layers = Vec::new();
        for (channels, stride) in [(8, 2), (16, 1), (16, 1)] {
            layers.push(LayerSpec::Conv1d {
                channels,
                kernel: 5,
                stride,
            });
            layers.push(LayerSpec::Batchnorm);
            layers.push(LayerSpec::LeakyRelu {
                slope: DEFAULT_LEAKY_SLOPE,
            });
            layers.push(LayerSpec::Maxpool { width: 2, stride: 2 });
        }
        layers.push(LayerSpec::Dropout { p: 0.0 });
        layers.push(LayerSpec::Head {
            kind,
            hidden: super::fenn::DEFAULT_HIDDEN,
        });
        NetworkSpec {
            input_channels: 1,
            input_length: 300,
            classes: super::fenn::DEFAULT_CLASSES,
            layers,
        }
    }

    pub fn head_kind(&self) -> Option<HeadKind> {
        match self.layers.last() {
            Some(LayerSpec::Head { kind, .. }) => Some(*kind),
            _ => None,
        }
    }

    pub fn with_head(mut self, kind: HeadKind) -> Self {
        if let Some(LayerSpec::Head { kind: k, .. }) = self.layers.last_mut() {
            *k = kind;
        }
        self
    }

    /// Sets every dropout layer's probability.
    pub fn with_dropout(mut self, p: f64) -> Self {
        for layer in &mut self.layers {
            if let LayerSpec::Dropout { p: q } = layer {
                *q = p;
            }
        }
        self
    }

    /// Checks the layer chain and returns the `(channels, length)` entering
    /// each layer.
    pub fn shapes(&self) -> Result<Vec<(usize, usize)>> {
        if self.input_channels == 0 || self.input_length == 0 || self.classes < 2 {
            return Err(Error::contract(
                "network needs input channels, length and at least two classes",
            ));
        }
        let heads = self
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::Head { .. }))
            .count();
        if heads != 1 || self.head_kind().is_none() {
            return Err(Error::contract("network needs exactly one head, placed last"));
        }
        let mut shape = (self.input_channels, self.input_length);
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            out.push(shape);
            shape = match *layer {
                LayerSpec::Conv1d {
                    channels,
                    kernel,
                    stride,
                } => {
                    if channels == 0 {
                        return Err(Error::contract("conv1d needs at least one channel"));
                    }
                    (channels, window_output_len(shape.1, kernel, stride)?)
                }
                LayerSpec::Maxpool { width, stride } => (shape.0, window_output_len(shape.1, width, stride)?),
                LayerSpec::Dropout { p } => {
                    if !(0.0..1.0).contains(&p) {
                        return Err(Error::contract(format!("dropout probability {p} outside [0, 1)")));
                    }
                    shape
                }
                LayerSpec::LeakyRelu { slope } => {
                    if !slope.is_finite() {
                        return Err(Error::contract("leaky-ReLU slope must be finite"));
                    }
                    shape
                }
                LayerSpec::Head { hidden, .. } => {
                    if hidden == 0 {
                        return Err(Error::contract("head needs at least one hidden unit"));
                    }
                    shape
                }
                LayerSpec::Batchnorm => shape,
            };
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingHyperparameters {
    /// Initial learning rate.
    pub ilr: f64,
    /// Learning-rate drop factor, applied every `drop_period` iterations.
    pub lrdf: f64,
    /// Dropout probability.
    pub dp: f64,
    pub drop_period: usize,
    /// `None` means one tenth of the training set.
    pub batch_size: Option<usize>,
    pub max_training_iterations: usize,
}

impl Default for TrainingHyperparameters {
    fn default() -> Self {
        TrainingHyperparameters {
            ilr: 1e-2,
            lrdf: 0.5,
            dp: 0.2,
            drop_period: 100,
            batch_size: None,
            max_training_iterations: 400,
        }
    }
}

impl TrainingHyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.ilr > 0.0 && self.ilr.is_finite()) {
            return Err(Error::contract("initial learning rate must be positive"));
        }
        if !(self.lrdf > 0.0 && self.lrdf <= 1.0) {
            return Err(Error::contract("learning-rate drop factor must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.dp) {
            return Err(Error::contract("dropout probability must lie in [0, 1)"));
        }
        if self.drop_period == 0 || self.max_training_iterations == 0 {
            return Err(Error::contract("drop period and iteration count must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::contract("batch size must be positive"));
        }
        Ok(())
    }

    /// Learning rate in effect at 0-based iteration `iter`.
    pub fn learning_rate(&self, iter: usize) -> f64 {
        self.ilr * self.lrdf.powi((iter / self.drop_period) as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Layer {
    Conv {
        kernels: Array3<f64>,
        bias: Array1<f64>,
        stride: usize,
    },
    BatchNorm {
        gamma: Array1<f64>,
        beta: Array1<f64>,
        running: RunningStats,
    },
    LeakyRelu {
        slope: f64,
    },
    MaxPool {
        width: usize,
        stride: usize,
    },
    Dropout {
        p: f64,
    },
}

enum Cache {
    Conv {
        input: Array3<f64>,
    },
    BatchNorm(BatchNormCache),
    LeakyRelu {
        input: Array3<f64>,
    },
    MaxPool {
        input_dim: (usize, usize, usize),
        argmax: Vec<usize>,
    },
    Dropout {
        mask: Option<Array3<f64>>,
    },
    Identity,
}

/// Everything a forward pass keeps for the backward pass.
pub struct ForwardPass {
    caches: Vec<Cache>,
    traces: Vec<FennTrace>,
    /// Class distributions, one row per sample.
    pub probs: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Layer>,
    head: FennParameters,
}

fn features_as_sequence(features: &Array3<f64>, b: usize) -> Array2<f64> {
    features.index_axis(Axis(0), b).t().to_owned()
}

impl Network {
    /// He-initialized weights; batchnorm scales start at one, biases at zero.
    pub fn new<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R) -> Result<Self> {
        let shapes = spec.shapes()?;
        let mut layers = Vec::new();
        let mut head = None;
        for (layer, &(c_in, len)) in spec.layers.iter().zip(&shapes) {
            match *layer {
                LayerSpec::Conv1d {
                    channels,
                    kernel,
                    stride,
                } => {
                    let values = he_normal(channels * c_in * kernel, c_in * kernel, rng);
                    layers.push(Layer::Conv {
                        kernels: Array3::from_shape_vec((channels, c_in, kernel), values)
                            .expect("shape matches length"),
                        bias: Array1::zeros(channels),
                        stride,
                    });
                }
                LayerSpec::Batchnorm => layers.push(Layer::BatchNorm {
                    gamma: Array1::ones(c_in),
                    beta: Array1::zeros(c_in),
                    running: RunningStats::new(c_in),
                }),
                LayerSpec::LeakyRelu { slope } => layers.push(Layer::LeakyRelu { slope }),
                LayerSpec::Maxpool { width, stride } => layers.push(Layer::MaxPool { width, stride }),
                LayerSpec::Dropout { p } => layers.push(Layer::Dropout { p }),
                LayerSpec::Head { kind, hidden } => {
                    let _ = len;
                    head = Some(FennParameters::he_init(c_in, hidden, spec.classes, kind, rng));
                }
            }
        }
        Ok(Network {
            spec,
            layers,
            head: head.expect("validated head"),
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn head(&self) -> &FennParameters {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut FennParameters {
        &mut self.head
    }

    pub fn set_dropout(&mut self, p: f64) {
        for layer in &mut self.layers {
            if let Layer::Dropout { p: q } = layer {
                *q = p;
            }
        }
        self.spec = self.spec.clone().with_dropout(p);
    }

    fn check_input(&self, x: &Array3<f64>) -> Result<()> {
        let (_, c, l) = x.dim();
        if c != self.spec.input_channels || l != self.spec.input_length {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_channels * self.spec.input_length,
                actual: c * l,
            });
        }
        if x.dim().0 == 0 {
            return Err(Error::contract("empty batch"));
        }
        Ok(())
    }

    /// Forward pass over a `(batch, channels, length)` input.
    ///
    /// In train mode batchnorm uses batch statistics (and updates its running
    /// statistics) and dropout draws masks from `rng`.
    pub fn forward<R: Rng + ?Sized>(&mut self, x: &Array3<f64>, mode: Mode, rng: &mut R) -> Result<ForwardPass> {
        self.check_input(x)?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for layer in &mut self.layers {
            let (next, cache) = match layer {
                Layer::Conv { kernels, bias, stride } => (
                    conv1d_forward(&h, kernels, bias, *stride)?,
                    if mode == Mode::Train {
                        Cache::Conv { input: h }
                    } else {
                        Cache::Identity
                    },
                ),
                Layer::BatchNorm { gamma, beta, running } => {
                    let (out, cache) = batchnorm1d_forward(&h, gamma, beta, DEFAULT_BN_EPS, mode, running)?;
                    (out, cache.map_or(Cache::Identity, Cache::BatchNorm))
                }
                Layer::LeakyRelu { slope } => (
                    leaky_relu_forward(&h, *slope),
                    if mode == Mode::Train {
                        Cache::LeakyRelu { input: h }
                    } else {
                        Cache::Identity
                    },
                ),
                Layer::MaxPool { width, stride } => {
                    let input_dim = h.dim();
                    let (out, argmax) = maxpool1d_forward(&h, *width, *stride)?;
                    (out, Cache::MaxPool { input_dim, argmax })
                }
                Layer::Dropout { p } => {
                    if mode == Mode::Train && *p > 0.0 {
                        let mask = dropout_mask(h.dim(), *p, rng);
                        (&h * &mask, Cache::Dropout { mask: Some(mask) })
                    } else {
                        (h, Cache::Dropout { mask: None })
                    }
                }
            };
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {} output", caches.len())));
            }
            h = next;
            caches.push(cache);
        }
        let batch = h.dim().0;
        let mut probs = Array2::<f64>::zeros((batch, self.spec.classes));
        let mut traces = Vec::with_capacity(batch);
        for b in 0..batch {
            let trace = fenn_sequence_forward(&self.head, &features_as_sequence(&h, b))?;
            probs.row_mut(b).assign(trace.final_output());
            traces.push(trace);
        }
        Ok(ForwardPass { caches, traces, probs })
    }

    /// Class distributions in inference mode.
    pub fn predict(&self, x: &Array3<f64>) -> Result<Array2<f64>> {
        let mut scratch = self.clone();
        let mut unused = crate::rng::stream(0);
        Ok(scratch.forward(x, Mode::Infer, &mut unused)?.probs)
    }

    /// Gradients in the order of [`Network::params_mut`] for dL/dprobs.
    pub fn backward(&self, pass: &ForwardPass, grad_probs: &Array2<f64>) -> Result<Vec<Vec<f64>>> {
        let batch = pass.traces.len();
        let steps = pass.traces.first().map_or(0, |t| t.states.len());
        let features = pass.traces.first().map_or(0, |t| t.inputs.ncols());
        let mut head_grad = FennParameters::zeros(
            self.head.inputs(),
            self.head.hidden(),
            self.head.classes(),
            self.head.kind,
        );
        let mut g = Array3::<f64>::zeros((batch, features, steps));
        for (b, trace) in pass.traces.iter().enumerate() {
            let mut out_grads = vec![Array1::zeros(self.spec.classes); steps];
            out_grads[steps - 1] = grad_probs.row(b).to_owned();
            let (gp, gu) = fenn_backward(&self.head, trace, &out_grads)?;
            for (acc, part) in head_grad.named_tensors_mut().into_iter().zip(gp.named_tensors()) {
                acc.iter_mut().zip(part.2).for_each(|(a, v)| *a += v);
            }
            g.index_axis_mut(Axis(0), b).assign(&gu.t());
        }

        let mut layer_grads: Vec<Vec<Vec<f64>>> = vec![Vec::new(); self.layers.len()];
        for (i, (layer, cache)) in self.layers.iter().zip(&pass.caches).enumerate().rev() {
            g = match (layer, cache) {
                (Layer::Conv { kernels, stride, .. }, Cache::Conv { input }) => {
                    let grads = conv1d_backward(input, kernels, *stride, &g)?;
                    layer_grads[i] = vec![grads.kernels.into_raw_vec_and_offset().0, grads.bias.to_vec()];
                    grads.input
                }
                (Layer::BatchNorm { gamma, .. }, Cache::BatchNorm(c)) => {
                    let grads = batchnorm1d_backward(c, gamma, &g);
                    layer_grads[i] = vec![grads.gamma.to_vec(), grads.beta.to_vec()];
                    grads.input
                }
                (Layer::LeakyRelu { slope }, Cache::LeakyRelu { input }) => leaky_relu_backward(input, *slope, &g),
                (Layer::MaxPool { .. }, Cache::MaxPool { input_dim, argmax }) => {
                    maxpool1d_backward(*input_dim, argmax, &g)
                }
                (Layer::Dropout { .. }, Cache::Dropout { mask }) => match mask {
                    Some(m) => &g * m,
                    None => g,
                },
                _ => return Err(Error::contract("backward needs a train-mode forward pass")),
            };
        }
        let mut out: Vec<Vec<f64>> = layer_grads.into_iter().flatten().collect();
        out.extend(head_grad.trainable().into_iter().map(|s| s.to_vec()));
        Ok(out)
    }

    /// Mean weighted cross-entropy of the final-step outputs and its gradients.
    pub fn loss_and_gradients<R: Rng + ?Sized>(
        &mut self,
        x: &Array3<f64>,
        targets: &[usize],
        class_weights: &[f64],
        rng: &mut R,
    ) -> Result<(f64, Vec<Vec<f64>>)> {
        let pass = self.forward(x, Mode::Train, rng)?;
        let batch = targets.len();
        if batch != pass.probs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: pass.probs.nrows(),
                actual: batch,
            });
        }
        let k = self.spec.classes;
        let mut loss = 0.0;
        let mut grad_probs = Array2::<f64>::zeros((batch, k));
        for (b, &t) in targets.iter().enumerate() {
            if t >= k {
                return Err(Error::contract(format!("target class {t} out of range")));
            }
            let mut onehot = vec![0.0; k];
            onehot[t] = 1.0;
            let p = pass.probs.row(b).to_vec();
            loss += weighted_cross_entropy(&p, &onehot, class_weights);
            let gp = weighted_cross_entropy_grad_probs(&p, &onehot, class_weights);
            for (dst, v) in grad_probs.row_mut(b).iter_mut().zip(gp) {
                *dst = v / batch as f64;
            }
        }
        let grads = self.backward(&pass, &grad_probs)?;
        Ok((loss / batch as f64, grads))
    }

    /// Mean weighted cross-entropy in inference mode.
    pub fn evaluate_loss(&self, x: &Array3<f64>, targets: &[usize], class_weights: &[f64]) -> Result<f64> {
        let probs = self.predict(x)?;
        let k = self.spec.classes;
        let mut loss = 0.0;
        for (row, &t) in probs.outer_iter().zip(targets) {
            let mut onehot = vec![0.0; k];
            onehot[t] = 1.0;
            loss += weighted_cross_entropy(row.as_slice().expect("row-major"), &onehot, class_weights);
        }
        Ok(loss / targets.len() as f64)
    }

    /// Trainable tensors in canonical order: per layer (conv kernels, bias;
    /// batchnorm gamma, beta), then the head.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv { kernels, bias, .. } => {
                    out.push(kernels.as_slice_mut().expect("standard layout"));
                    out.push(bias.as_slice_mut().expect("standard layout"));
                }
                Layer::BatchNorm { gamma, beta, .. } => {
                    out.push(gamma.as_slice_mut().expect("standard layout"));
                    out.push(beta.as_slice_mut().expect("standard layout"));
                }
                _ => {}
            }
        }
        out.extend(self.head.trainable_mut());
        out
    }

    pub fn param_sizes(&mut self) -> Vec<usize> {
        self.params_mut().iter().map(|s| s.len()).collect()
    }

    pub fn parameter_count(&mut self) -> usize {
        self.param_sizes().iter().sum()
    }

    fn all_tensors(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Conv { kernels, bias, .. } => {
                    out.push((
                        format!("layer{i}.kernels"),
                        kernels.shape().to_vec(),
                        kernels.iter().copied().collect(),
                    ));
                    out.push((format!("layer{i}.bias"), vec![bias.len()], bias.to_vec()));
                }
                Layer::BatchNorm { gamma, beta, running } => {
                    out.push((format!("layer{i}.gamma"), vec![gamma.len()], gamma.to_vec()));
                    out.push((format!("layer{i}.beta"), vec![beta.len()], beta.to_vec()));
                    out.push((
                        format!("layer{i}.running_mean"),
                        vec![running.mean.len()],
                        running.mean.to_vec(),
                    ));
                    out.push((
                        format!("layer{i}.running_var"),
                        vec![running.var.len()],
                        running.var.to_vec(),
                    ));
                }
                _ => {}
            }
        }
        for (name, shape, data) in self.head.named_tensors() {
            out.push((format!("head.{name}"), shape, data.to_vec()));
        }
        out
    }

    fn all_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv { kernels, bias, .. } => {
                    out.push(kernels.as_slice_mut().expect("standard layout"));
                    out.push(bias.as_slice_mut().expect("standard layout"));
                }
                Layer::BatchNorm { gamma, beta, running } => {
                    out.push(gamma.as_slice_mut().expect("standard layout"));
                    out.push(beta.as_slice_mut().expect("standard layout"));
                    out.push(running.mean.as_slice_mut().expect("standard layout"));
                    out.push(running.var.as_slice_mut().expect("standard layout"));
                }
                _ => {}
            }
        }
        out.extend(self.head.named_tensors_mut());
        out
    }

    /// Writes `<path>` (JSON manifest) and `<path>.bin` (little-endian f64).
    pub fn save(&self, path: &Path) -> Result<()> {
        let tensors = self.all_tensors();
        let mut blob = Vec::new();
        let mut entries = Vec::new();
        let mut offset = 0usize;
        for (name, shape, data) in &tensors {
            entries.push(TensorEntry {
                name: name.clone(),
                shape: shape.clone(),
                offset,
                len: data.len(),
            });
            offset += data.len();
            blob.extend(fsio::f64s_to_le_bytes(data));
        }
        let blob_path = blob_path_for(path);
        let manifest = ModelManifest {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            spec: self.spec.clone(),
            blob: blob_path.file_name().expect("file name").to_string_lossy().into_owned(),
            sha256: sha256_hex(&blob),
            tensors: entries,
        };
        fsio::write_atomic(&blob_path, &blob)?;
        fsio::write_atomic(path, serde_json::to_string_pretty(&manifest)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let manifest: ModelManifest = serde_json::from_str(&fsio::read_to_string(path)?)?;
        if manifest.format != FORMAT_NAME || manifest.version != FORMAT_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported model format {} v{}",
                manifest.format, manifest.version
            )));
        }
        let blob_path = path.with_file_name(&manifest.blob);
        let bytes = std::fs::read(&blob_path).map_err(|e| Error::io(&blob_path, e))?;
        if sha256_hex(&bytes) != manifest.sha256 {
            return Err(Error::Corrupt(format!("checksum mismatch for {}", blob_path.display())));
        }
        let values = fsio::f64s_from_le_bytes(&bytes)?;
        let mut net = Network::new(manifest.spec, &mut crate::rng::stream(0))?;
        let expected: Vec<(String, Vec<usize>)> = net.all_tensors().into_iter().map(|(n, s, _)| (n, s)).collect();
        if expected.len() != manifest.tensors.len() {
            return Err(Error::Corrupt("tensor count does not match the spec".into()));
        }
        for (slot, ((name, shape), entry)) in net
            .all_tensors_mut()
            .into_iter()
            .zip(expected.iter().zip(&manifest.tensors))
        {
            if &entry.name != name || &entry.shape != shape || entry.len != slot.len() {
                return Err(Error::Corrupt(format!("tensor {} does not match the spec", entry.name)));
            }
            let src = values
                .get(entry.offset..entry.offset + entry.len)
                .ok_or_else(|| Error::Corrupt(format!("tensor {} out of blob range", entry.name)))?;
            slot.copy_from_slice(src);
        }
        Ok(net)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelManifest {
    format: String,
    version: u32,
    spec: NetworkSpec,
    blob: String,
    sha256: String,
    tensors: Vec<TensorEntry>,
}

fn blob_path_for(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".bin");
    path.with_file_name(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
