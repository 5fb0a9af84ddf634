//! Butterworth low-pass design (bilinear transform) and zero-phase filtering.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EDGE_HZ: f64 = 15.0;
pub const DEFAULT_ORDER: usize = 4;

/// One second-order section, normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    /// Magnitude response at `f` Hz.
    pub fn magnitude(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * PI * f / fs;
        let eval = |c: &[f64; 3]| {
            let re = c[0] + c[1] * w.cos() + c[2] * (2.0 * w).cos();
            let im = -c[1] * w.sin() - c[2] * (2.0 * w).sin();
            re.hypot(im)
        };
        eval(&self.b) / eval(&self.a)
    }

    /// Transposed direct-form II state after a long run of ones.
    fn unit_steady_state(&self) -> [f64; 2] {
        let gain = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[1] + self.a[2]);
        let z2 = self.b[2] - self.a[2] * gain;
        let z1 = self.b[1] - self.a[1] * gain + z2;
        [z1, z2]
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[1] + self.a[2])
    }
}

/// A cascade of second-order sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

/// Low-pass Butterworth with its -3 dB point at `edge_hz`. `order` must be
/// even so the design factors into biquads.
pub fn butterworth_lowpass_design(order: usize, edge_hz: f64, fs: f64) -> Result<SosFilter> {
    if !(fs > 0.0 && edge_hz > 0.0 && edge_hz < fs / 2.0) {
        return Err(Error::contract(format!(
            "cutoff {edge_hz} Hz must lie strictly inside (0, {}) Hz",
            fs / 2.0
        )));
    }
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::contract("filter order must be a positive even number"));
    }
    let k = 2.0 * fs;
    let wc = k * (PI * edge_hz / fs).tan();
    let n = order as f64;
    let sections = (0..order / 2)
        .map(|i| {
            // Analog pole pair wc * exp(+-j theta) with Re < 0.
            let theta = PI * (2.0 * i as f64 + n + 1.0) / (2.0 * n);
            let a1 = -2.0 * wc * theta.cos();
            let a0 = wc * wc;
            let d0 = k * k + a1 * k + a0;
            Biquad {
                b: [a0 / d0, 2.0 * a0 / d0, a0 / d0],
                a: [1.0, (2.0 * a0 - 2.0 * k * k) / d0, (k * k - a1 * k + a0) / d0],
            }
        })
        .collect();
    Ok(SosFilter { sections })
}

impl SosFilter {
    pub fn magnitude(&self, f: f64, fs: f64) -> f64 {
        self.sections.iter().map(|s| s.magnitude(f, fs)).product()
    }

    /// Edge padding used by [`SosFilter::filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.sections.len() + 1)
    }

    /// Causal filtering starting from the steady state for a constant input
    /// equal to `x[0]`.
    pub fn filter_steady(&self, x: &[f64]) -> Vec<f64> {
        let Some(&x0) = x.first() else {
            return Vec::new();
        };
        let mut y = x.to_vec();
        let mut level = x0;
        for s in &self.sections {
            let [u1, u2] = s.unit_steady_state();
            let (mut z1, mut z2) = (u1 * level, u2 * level);
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[1] * out + z2;
                z2 = s.b[2] * input - s.a[2] * out;
                *v = out;
            }
            level *= s.dc_gain();
        }
        y
    }

    /// Forward-backward (zero-phase) filtering with odd reflection padding.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pad = self.pad_len();
        if x.len() <= pad {
            return Err(Error::contract(format!(
                "signal of {} samples is too short for zero-phase filtering (needs > {pad})",
                x.len()
            )));
        }
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        let mut y = self.filter_steady(&ext);
        y.reverse();
        let mut y = self.filter_steady(&y);
        y.reverse();
        Ok(y[pad..pad + n].to_vec())
    }
}

/// Zero-phase order-`order` Butterworth low-pass of `signal`.
pub fn butterworth_lowpass(signal: &[f64], fs: f64, edge_hz: f64, order: usize) -> Result<Vec<f64>> {
    butterworth_lowpass_design(order, edge_hz, fs)?.filtfilt(signal)
}
