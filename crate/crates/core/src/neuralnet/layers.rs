//! Batched 1-D layers over `(batch, channels, length)` tensors.

use ndarray::{Array1, Array3, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;
pub const DEFAULT_BN_EPS: f64 = 1e-5;
pub const DEFAULT_BN_MOMENTUM: f64 = 0.1;

/// Output length of a valid window sweep.
pub fn window_output_len(len: usize, width: usize, stride: usize) -> Result<usize> {
    if width == 0 || stride == 0 {
        return Err(Error::contract("window width and stride must be positive"));
    }
    if len < width {
        return Err(Error::contract(format!(
            "input length {len} shorter than window {width}"
        )));
    }
    Ok((len - width) / stride + 1)
}

/// Valid cross-correlation. `kernels` is `(out, in, width)`.
pub fn conv1d_forward(
    input: &Array3<f64>,
    kernels: &Array3<f64>,
    bias: &Array1<f64>,
    stride: usize,
) -> Result<Array3<f64>> {
    let (batch, c_in, len) = input.dim();
    let (c_out, k_in, width) = kernels.dim();
    if k_in != c_in {
        return Err(Error::DimensionMismatch {
            expected: k_in,
            actual: c_in,
        });
    }
    if bias.len() != c_out {
        return Err(Error::DimensionMismatch {
            expected: c_out,
            actual: bias.len(),
        });
    }
    let out_len = window_output_len(len, width, stride)?;
    let x = input.as_standard_layout();
    let w = kernels.as_standard_layout();
    let xs = x.as_slice().expect("standard layout");
    let ws = w.as_slice().expect("standard layout");
    let mut out = Array3::<f64>::zeros((batch, c_out, out_len));
    let os = out.as_slice_mut().expect("fresh array");
    for b in 0..batch {
        for o in 0..c_out {
            let row = &mut os[(b * c_out + o) * out_len..(b * c_out + o + 1) * out_len];
            row.fill(bias[o]);
            for i in 0..c_in {
                let xrow = &xs[(b * c_in + i) * len..(b * c_in + i + 1) * len];
                let krow = &ws[(o * c_in + i) * width..(o * c_in + i + 1) * width];
                for (t, acc) in row.iter_mut().enumerate() {
                    let start = t * stride;
                    let window = &xrow[start..start + width];
                    *acc += window.iter().zip(krow).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
    }
    Ok(out)
}

pub struct Conv1dGrads {
    pub input: Array3<f64>,
    pub kernels: Array3<f64>,
    pub bias: Array1<f64>,
}

pub fn conv1d_backward(
    input: &Array3<f64>,
    kernels: &Array3<f64>,
    stride: usize,
    grad_out: &Array3<f64>,
) -> Result<Conv1dGrads> {
    let (batch, c_in, len) = input.dim();
    let (c_out, _, width) = kernels.dim();
    let out_len = window_output_len(len, width, stride)?;
    if grad_out.dim() != (batch, c_out, out_len) {
        return Err(Error::contract("conv1d gradient shape does not match output"));
    }
    let x = input.as_standard_layout();
    let w = kernels.as_standard_layout();
    let g = grad_out.as_standard_layout();
    let xs = x.as_slice().expect("standard layout");
    let ws = w.as_slice().expect("standard layout");
    let gs = g.as_slice().expect("standard layout");
    let mut gx = Array3::<f64>::zeros((batch, c_in, len));
    let mut gw = Array3::<f64>::zeros((c_out, c_in, width));
    let mut gb = Array1::<f64>::zeros(c_out);
    {
        let gxs = gx.as_slice_mut().expect("fresh array");
        let gws = gw.as_slice_mut().expect("fresh array");
        for b in 0..batch {
            for o in 0..c_out {
                let grow = &gs[(b * c_out + o) * out_len..(b * c_out + o + 1) * out_len];
                gb[o] += grow.iter().sum::<f64>();
                for i in 0..c_in {
                    let xoff = (b * c_in + i) * len;
                    let koff = (o * c_in + i) * width;
                    for (t, &gv) in grow.iter().enumerate() {
                        if gv == 0.0 {
                            continue;
                        }
                        let start = t * stride;
                        for j in 0..width {
                            gws[koff + j] += gv * xs[xoff + start + j];
                            gxs[xoff + start + j] += gv * ws[koff + j];
                        }
                    }
                }
            }
        }
    }
    Ok(Conv1dGrads {
        input: gx,
        kernels: gw,
        bias: gb,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Infer,
}

/// Per-channel running statistics for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    pub mean: Array1<f64>,
    pub var: Array1<f64>,
    pub momentum: f64,
}

impl RunningStats {
    pub fn new(channels: usize) -> Self {
        RunningStats {
            mean: Array1::zeros(channels),
            var: Array1::ones(channels),
            momentum: DEFAULT_BN_MOMENTUM,
        }
    }
}

/// Values kept from a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    pub normalized: Array3<f64>,
    pub inv_std: Array1<f64>,
}

/// Batch normalization over the batch and length axes, per channel.
/// Running statistics use the biased batch variance.
pub fn batchnorm1d_forward(
    input: &Array3<f64>,
    gamma: &Array1<f64>,
    beta: &Array1<f64>,
    eps: f64,
    mode: Mode,
    running: &mut RunningStats,
) -> Result<(Array3<f64>, Option<BatchNormCache>)> {
    let (batch, channels, len) = input.dim();
    if gamma.len() != channels || beta.len() != channels || running.mean.len() != channels {
        return Err(Error::DimensionMismatch {
            expected: channels,
            actual: gamma.len(),
        });
    }
    match mode {
        Mode::Infer => {
            let mut out = input.to_owned();
            for c in 0..channels {
                let scale = gamma[c] / (running.var[c] + eps).sqrt();
                let shift = beta[c] - running.mean[c] * scale;
                out.index_axis_mut(Axis(1), c).mapv_inplace(|v| v * scale + shift);
            }
            Ok((out, None))
        }
        Mode::Train => {
            if batch < 2 {
                return Err(Error::contract(
                    "batch normalization in train mode needs batch size >= 2",
                ));
            }
            let count = (batch * len) as f64;
            let mut normalized = Array3::<f64>::zeros((batch, channels, len));
            let mut out = Array3::<f64>::zeros((batch, channels, len));
            let mut inv_std = Array1::<f64>::zeros(channels);
            for c in 0..channels {
                let view = input.index_axis(Axis(1), c);
                let mean = view.sum() / count;
                let var = view.fold(0.0, |acc, v| acc + (v - mean).powi(2)) / count;
                let istd = 1.0 / (var + eps).sqrt();
                inv_std[c] = istd;
                let mut nview = normalized.index_axis_mut(Axis(1), c);
                nview.zip_mut_with(&view, |n, &v| *n = (v - mean) * istd);
                let mut oview = out.index_axis_mut(Axis(1), c);
                oview.zip_mut_with(&nview, |o, &n| *o = gamma[c] * n + beta[c]);
                let m = running.momentum;
                running.mean[c] = (1.0 - m) * running.mean[c] + m * mean;
                running.var[c] = (1.0 - m) * running.var[c] + m * var;
            }
            Ok((out, Some(BatchNormCache { normalized, inv_std })))
        }
    }
}

pub struct BatchNormGrads {
    pub input: Array3<f64>,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
}

pub fn batchnorm1d_backward(cache: &BatchNormCache, gamma: &Array1<f64>, grad_out: &Array3<f64>) -> BatchNormGrads {
    let (batch, channels, len) = grad_out.dim();
    let count = (batch * len) as f64;
    let mut gx = Array3::<f64>::zeros((batch, channels, len));
    let mut gg = Array1::<f64>::zeros(channels);
    let mut gbeta = Array1::<f64>::zeros(channels);
    for c in 0..channels {
        let g = grad_out.index_axis(Axis(1), c);
        let n = cache.normalized.index_axis(Axis(1), c);
        let sum_g = g.sum();
        let sum_gn = g.iter().zip(n.iter()).map(|(a, b)| a * b).sum::<f64>();
        gbeta[c] = sum_g;
        gg[c] = sum_gn;
        let k = gamma[c] * cache.inv_std[c] / count;
        let mut out = gx.index_axis_mut(Axis(1), c);
        ndarray::Zip::from(&mut out)
            .and(&g)
            .and(&n)
            .for_each(|o, &gv, &nv| *o = k * (count * gv - sum_g - nv * sum_gn));
    }
    BatchNormGrads {
        input: gx,
        gamma: gg,
        beta: gbeta,
    }
}

pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

pub fn leaky_relu_forward(input: &Array3<f64>, slope: f64) -> Array3<f64> {
    input.mapv(|v| leaky_relu(v, slope))
}

pub fn leaky_relu_backward(input: &Array3<f64>, slope: f64, grad_out: &Array3<f64>) -> Array3<f64> {
    let mut g = grad_out.to_owned();
    g.zip_mut_with(input, |gv, &x| {
        if x < 0.0 {
            *gv *= slope;
        }
    });
    g
}

/// Window maxima plus the flat input index that produced each one.
pub fn maxpool1d_forward(input: &Array3<f64>, width: usize, stride: usize) -> Result<(Array3<f64>, Vec<usize>)> {
    let (batch, channels, len) = input.dim();
    let out_len = window_output_len(len, width, stride)?;
    let x = input.as_standard_layout();
    let xs = x.as_slice().expect("standard layout");
    let mut out = Array3::<f64>::zeros((batch, channels, out_len));
    let mut argmax = Vec::with_capacity(batch * channels * out_len);
    let os = out.as_slice_mut().expect("fresh array");
    for row in 0..batch * channels {
        for t in 0..out_len {
            let start = row * len + t * stride;
            let mut best = start;
            for k in start + 1..start + width {
                if xs[k] > xs[best] {
                    best = k;
                }
            }
            os[row * out_len + t] = xs[best];
            argmax.push(best);
        }
    }
    Ok((out, argmax))
}

/// Routes each output gradient to the input position that won its window.
pub fn maxpool1d_backward(input_dim: (usize, usize, usize), argmax: &[usize], grad_out: &Array3<f64>) -> Array3<f64> {
    let mut gx = Array3::<f64>::zeros(input_dim);
    let gxs = gx.as_slice_mut().expect("fresh array");
    for (&idx, &g) in argmax.iter().zip(grad_out.iter()) {
        gxs[idx] += g;
    }
    gx
}

/// Inverted dropout mask: kept units are scaled by `1 / (1 - p)`.
pub fn dropout_mask<R: Rng + ?Sized>(dim: (usize, usize, usize), p: f64, rng: &mut R) -> Array3<f64> {
    if p <= 0.0 {
        return Array3::ones(dim);
    }
    let keep = 1.0 - p;
    Array3::from_shape_simple_fn(dim, || if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_kernel_is_identity() {
        let x = Array3::from_shape_vec((1, 1, 4), vec![1.0, -2.0, 3.5, 0.0]).unwrap();
        let k = Array3::from_elem((1, 1, 1), 1.0);
        let y = conv1d_forward(&x, &k, &array![0.0], 1).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn pairwise_sum_kernel() {
        let x = Array3::from_shape_vec((1, 1, 3), vec![1.0, 2.0, 3.0]).unwrap();
        let k = Array3::from_elem((1, 1, 2), 1.0);
        let y = conv1d_forward(&x, &k, &array![0.0], 1).unwrap();
        assert_eq!(y.into_raw_vec_and_offset().0, vec![3.0, 5.0]);
    }

    #[test]
    fn conv_output_length_and_short_input() {
        let x = Array3::<f64>::zeros((2, 3, 11));
        let k = Array3::<f64>::zeros((4, 3, 3));
        let y = conv1d_forward(&x, &k, &Array1::zeros(4), 2).unwrap();
        assert_eq!(y.dim(), (2, 4, 5));
        let short = Array3::<f64>::zeros((1, 3, 2));
        assert!(conv1d_forward(&short, &k, &Array1::zeros(4), 1).is_err());
    }

    #[test]
    fn leaky_relu_examples() {
        assert_eq!(leaky_relu(1.0, DEFAULT_LEAKY_SLOPE), 1.0);
        assert_eq!(leaky_relu(-1.0, DEFAULT_LEAKY_SLOPE), -0.01);
    }

    #[test]
    fn maxpool_example() {
        let x = Array3::from_shape_vec((1, 1, 4), vec![1.0, 3.0, 2.0, 5.0]).unwrap();
        let (y, idx) = maxpool1d_forward(&x, 2, 2).unwrap();
        assert_eq!(y.into_raw_vec_and_offset().0, vec![3.0, 5.0]);
        assert_eq!(idx, vec![1, 3]);
        let g = maxpool1d_backward((1, 1, 4), &idx, &Array3::ones((1, 1, 2)));
        assert_eq!(g.into_raw_vec_and_offset().0, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn batchnorm_constant_channel_yields_beta() {
        let x = Array3::from_elem((3, 2, 5), 4.2);
        let mut rs = RunningStats::new(2);
        let (y, _) = batchnorm1d_forward(
            &x,
            &array![1.5, -0.5],
            &array![0.25, 3.0],
            DEFAULT_BN_EPS,
            Mode::Train,
            &mut rs,
        )
        .unwrap();
        for v in y.index_axis(Axis(1), 0) {
            assert_eq!(*v, 0.25);
        }
        for v in y.index_axis(Axis(1), 1) {
            assert_eq!(*v, 3.0);
        }
    }

    #[test]
    fn batchnorm_standardizes() {
        let x = Array3::from_shape_fn((4, 2, 6), |(b, c, l)| (b * 7 + l * 3) as f64 * (c + 1) as f64 - 5.0);
        let mut rs = RunningStats::new(2);
        let (y, _) = batchnorm1d_forward(
            &x,
            &array![1.0, 1.0],
            &array![0.0, 0.0],
            DEFAULT_BN_EPS,
            Mode::Train,
            &mut rs,
        )
        .unwrap();
        for c in 0..2 {
            let v = y.index_axis(Axis(1), c);
            let n = v.len() as f64;
            let mean = v.sum() / n;
            let var = v.fold(0.0, |a, x| a + (x - mean).powi(2)) / n;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn batchnorm_rejects_single_sample_training() {
        let x = Array3::<f64>::zeros((1, 2, 5));
        let mut rs = RunningStats::new(2);
        let r = batchnorm1d_forward(&x, &array![1.0, 1.0], &array![0.0, 0.0], 1e-5, Mode::Train, &mut rs);
        assert!(r.is_err());
        let r = batchnorm1d_forward(&x, &array![1.0, 1.0], &array![0.0, 0.0], 1e-5, Mode::Infer, &mut rs);
        assert!(r.is_ok());
    }

    #[test]
    fn infer_matches_train_after_running_stats_converge() {
        let x = Array3::from_shape_fn((5, 3, 8), |(b, c, l)| {
            ((b * 13 + c * 5 + l * 7) % 11) as f64 * 0.3 - 1.0
        });
        let gamma = array![1.2, 0.7, -0.4];
        let beta = array![0.1, 0.0, 2.0];
        let mut rs = RunningStats::new(3);
        let mut train_out = None;
        for _ in 0..400 {
            train_out = Some(
                batchnorm1d_forward(&x, &gamma, &beta, 1e-5, Mode::Train, &mut rs)
                    .unwrap()
                    .0,
            );
        }
        let (infer_out, _) = batchnorm1d_forward(&x, &gamma, &beta, 1e-5, Mode::Infer, &mut rs).unwrap();
        let diff = (&infer_out - &train_out.unwrap())
            .mapv(f64::abs)
            .fold(0.0f64, |a, &b| a.max(b));
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn dropout_mask_statistics() {
        let m = dropout_mask((10, 10, 100), 0.25, &mut crate::rng::stream(0));
        let mean = m.sum() / m.len() as f64;
        assert!((mean - 1.0).abs() < 0.05);
        assert!(m.iter().all(|&v| v == 0.0 || (v - 1.0 / 0.75).abs() < 1e-15));
        assert!(dropout_mask((2, 2, 2), 0.0, &mut crate::rng::stream(0))
            .iter()
            .all(|&v| v == 1.0));
    }
}
