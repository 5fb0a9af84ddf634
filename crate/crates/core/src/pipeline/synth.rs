//! Synthetic pulsatile flow/PAWP recordings and their on-disk format.
//!
//! A stand-in for clinical recordings: every 6 s segment gets a PAWP
//! baseline from either the normal band or one of the abnormal bands, and
//! the pump flow follows that baseline through a monotone map scaled by a
//! per-subject gain.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::segment::{label_segment, Label, DEFAULT_HIGH_MMHG, DEFAULT_LOW_MMHG, SEGMENT_LEN};
use crate::error::{Error, Result};
use crate::fsio;
use crate::neuralnet::network::sha256_hex;
use crate::rng;

pub const DEFAULT_FS: f64 = 50.0;
/// Class sizes of the reference clinical cohort the generator imitates.
pub const REFERENCE_ABNORMAL: usize = 459;
pub const REFERENCE_NORMAL: usize = 1338;
pub const DATASET_FORMAT: &str = "hhofenn-dataset";
pub const DATASET_VERSION: u32 = 1;

pub fn reference_abnormal_fraction() -> f64 {
    REFERENCE_ABNORMAL as f64 / (REFERENCE_ABNORMAL + REFERENCE_NORMAL) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    /// Pump flow, L/min.
    pub flow: Vec<f64>,
    /// Wedge pressure, mmHg.
    pub pawp: Vec<f64>,
    pub fs: f64,
    pub subject_id: u32,
}

impl SignalRecord {
    pub fn validate(&self) -> Result<()> {
        if self.flow.len() != self.pawp.len() {
            return Err(Error::DimensionMismatch {
                expected: self.flow.len(),
                actual: self.pawp.len(),
            });
        }
        if self.fs.is_nan() || self.fs <= 0.0 {
            return Err(Error::contract("sampling rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_subjects: usize,
    pub segments_per_subject: usize,
    pub abnormal_fraction: f64,
    pub seed: u64,
    pub fs: f64,
    /// Standard deviation of the additive PAWP noise, mmHg.
    pub pawp_noise: f64,
    /// Standard deviation of the additive flow noise, L/min.
    pub flow_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_subjects: 30,
            segments_per_subject: 60,
            abnormal_fraction: reference_abnormal_fraction(),
            seed: 0,
            fs: DEFAULT_FS,
            pawp_noise: 0.3,
            flow_noise: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub config: SyntheticConfig,
    pub records: Vec<SignalRecord>,
    /// Intended label of every segment, per subject.
    pub intended: Vec<Vec<Label>>,
}

impl SyntheticDataset {
    pub fn segment_count(&self) -> usize {
        self.intended.iter().map(Vec::len).sum()
    }

    pub fn intended_flat(&self) -> Vec<Label> {
        self.intended.iter().flatten().copied().collect()
    }
}

/// Mean pump flow for a PAWP baseline before the subject gain.
pub fn flow_from_pawp(pawp_mmhg: f64) -> f64 {
    1.5 + 0.22 * pawp_mmhg
}

fn draw_baseline<R: Rng + ?Sized>(label: Label, rng: &mut R) -> f64 {
    match label {
        Label::Normal => rng.random_range(9.5..14.5),
        Label::Abnormal => {
            if rng.random::<f64>() < 0.4 {
                rng.random_range(3.0..6.5)
            } else {
                rng.random_range(17.5..28.0)
            }
        }
    }
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticDataset> {
    if !(0.0..=1.0).contains(&config.abnormal_fraction) {
        return Err(Error::contract("abnormal fraction must lie in [0, 1]"));
    }
    if config.n_subjects == 0 || config.segments_per_subject == 0 || config.fs.is_nan() || config.fs <= 0.0 {
        return Err(Error::contract(
            "need at least one subject, one segment and a positive rate",
        ));
    }
    let total = config.n_subjects * config.segments_per_subject;
    let n_abnormal = (config.abnormal_fraction * total as f64).round() as usize;
    let mut labels: Vec<Label> = (0..total)
        .map(|i| if i < n_abnormal { Label::Abnormal } else { Label::Normal })
        .collect();
    labels.shuffle(&mut rng::child_stream(config.seed, &[0]));

    let seg_len = SEGMENT_LEN;
    let dt = 1.0 / config.fs;
    let pawp_noise = Normal::new(0.0, config.pawp_noise).map_err(|e| Error::contract(e.to_string()))?;
    let flow_noise = Normal::new(0.0, config.flow_noise).map_err(|e| Error::contract(e.to_string()))?;

    let mut records = Vec::with_capacity(config.n_subjects);
    let mut intended = Vec::with_capacity(config.n_subjects);
    for s in 0..config.n_subjects {
        let mut r = rng::child_stream(config.seed, &[1, s as u64]);
        let heart_hz = r.random_range(1.0..1.4);
        let resp_hz = r.random_range(0.2..0.3);
        let gain = r.random_range(0.96..1.04);
        let pulse_mmhg = r.random_range(2.0..3.5);
        let resp_mmhg = r.random_range(0.5..1.0);
        let flow_pulse = r.random_range(0.6..1.0);
        let (phase_c, phase_r) = (r.random_range(0.0..2.0 * PI), r.random_range(0.0..2.0 * PI));

        let subject_labels = labels[s * config.segments_per_subject..(s + 1) * config.segments_per_subject].to_vec();
        let n = seg_len * config.segments_per_subject;
        let mut pawp = Vec::with_capacity(n);
        let mut flow = Vec::with_capacity(n);
        for &label in &subject_labels {
            let base = draw_baseline(label, &mut r);
            let mean_flow = gain * flow_from_pawp(base);
            for _ in 0..seg_len {
                let t = pawp.len() as f64 * dt;
                let cardiac_phase = 2.0 * PI * heart_hz * t + phase_c;
                let cardiac = cardiac_phase.sin() + 0.3 * (2.0 * cardiac_phase).sin();
                let resp = (2.0 * PI * resp_hz * t + phase_r).sin();
                pawp.push(base + pulse_mmhg * cardiac + resp_mmhg * resp + pawp_noise.sample(&mut r));
                // Pump flow rises during systole and dips with inspiration.
                flow.push(mean_flow + flow_pulse * cardiac - 0.1 * resp + flow_noise.sample(&mut r));
            }
        }
        records.push(SignalRecord {
            flow,
            pawp,
            fs: config.fs,
            subject_id: s as u32,
        });
        intended.push(subject_labels);
    }
    Ok(SyntheticDataset {
        config: *config,
        records,
        intended,
    })
}

/// Fraction of segments whose recovered label equals the intended one.
pub fn label_recovery_rate(dataset: &SyntheticDataset) -> Result<f64> {
    let mut agree = 0usize;
    let mut total = 0usize;
    for (rec, want) in dataset.records.iter().zip(&dataset.intended) {
        let filtered = super::filter::butterworth_lowpass(
            &rec.pawp,
            rec.fs,
            super::filter::DEFAULT_EDGE_HZ,
            super::filter::DEFAULT_ORDER,
        )?;
        for (seg, &label) in super::segment::segment(&filtered, SEGMENT_LEN).iter().zip(want) {
            total += 1;
            if label_segment(seg, rec.fs, DEFAULT_LOW_MMHG, DEFAULT_HIGH_MMHG).label == label {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / total.max(1) as f64)
}

#[derive(Debug, Serialize, Deserialize)]
struct SubjectEntry {
    subject_id: u32,
    samples: usize,
    flow_file: String,
    flow_sha256: String,
    pawp_file: String,
    pawp_sha256: String,
    intended: Vec<Label>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetManifest {
    format: String,
    version: u32,
    config: SyntheticConfig,
    subjects: Vec<SubjectEntry>,
}

pub const MANIFEST_FILE: &str = "dataset.json";

/// Writes `dataset.json` plus one flow and one PAWP blob per subject.
pub fn save_dataset(dataset: &SyntheticDataset, dir: &Path) -> Result<()> {
    let mut subjects = Vec::with_capacity(dataset.records.len());
    for (rec, intended) in dataset.records.iter().zip(&dataset.intended) {
        let flow_bytes = fsio::f64s_to_le_bytes(&rec.flow);
        let pawp_bytes = fsio::f64s_to_le_bytes(&rec.pawp);
        let flow_file = format!("subject_{:03}_flow.f64", rec.subject_id);
        let pawp_file = format!("subject_{:03}_pawp.f64", rec.subject_id);
        fsio::write_atomic(&dir.join(&flow_file), &flow_bytes)?;
        fsio::write_atomic(&dir.join(&pawp_file), &pawp_bytes)?;
        subjects.push(SubjectEntry {
            subject_id: rec.subject_id,
            samples: rec.flow.len(),
            flow_sha256: sha256_hex(&flow_bytes),
            pawp_sha256: sha256_hex(&pawp_bytes),
            flow_file,
            pawp_file,
            intended: intended.clone(),
        });
    }
    let manifest = DatasetManifest {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        config: dataset.config,
        subjects,
    };
    fsio::write_atomic(
        &dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )
}

pub fn load_dataset(dir: &Path) -> Result<SyntheticDataset> {
    let manifest: DatasetManifest = serde_json::from_str(&fsio::read_to_string(&dir.join(MANIFEST_FILE))?)?;
    if manifest.format != DATASET_FORMAT || manifest.version != DATASET_VERSION {
        return Err(Error::Corrupt(format!(
            "unsupported dataset format {} v{}",
            manifest.format, manifest.version
        )));
    }
    let read_blob = |name: &str, sha: &str, samples: usize| -> Result<Vec<f64>> {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(&bytes) != sha {
            return Err(Error::Corrupt(format!("checksum mismatch for {}", path.display())));
        }
        let values = fsio::f64s_from_le_bytes(&bytes)?;
        if values.len() != samples {
            return Err(Error::Corrupt(format!(
                "{} holds {} samples, expected {samples}",
                path.display(),
                values.len()
            )));
        }
        Ok(values)
    };
    let mut records = Vec::new();
    let mut intended = Vec::new();
    for s in manifest.subjects {
        let rec = SignalRecord {
            flow: read_blob(&s.flow_file, &s.flow_sha256, s.samples)?,
            pawp: read_blob(&s.pawp_file, &s.pawp_sha256, s.samples)?,
            fs: manifest.config.fs,
            subject_id: s.subject_id,
        };
        rec.validate()?;
        records.push(rec);
        intended.push(s.intended);
    }
    Ok(SyntheticDataset {
        config: manifest.config,
        records,
        intended,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            n_subjects: 4,
            segments_per_subject: 10,
            ..Default::default()
        }
    }

    #[test]
    fn imbalance_and_shapes() {
        let d = generate_synthetic(&SyntheticConfig::default()).unwrap();
        assert_eq!(d.segment_count(), 1800);
        let abnormal = d.intended_flat().iter().filter(|&&l| l == Label::Abnormal).count();
        // round(1800 * 459 / 1797)
        assert_eq!(abnormal, 460);
        assert!(d
            .records
            .iter()
            .all(|r| r.flow.len() == 60 * SEGMENT_LEN && r.validate().is_ok()));
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(
            generate_synthetic(&small()).unwrap(),
            generate_synthetic(&small()).unwrap()
        );
        let other = SyntheticConfig { seed: 1, ..small() };
        assert_ne!(
            generate_synthetic(&small()).unwrap(),
            generate_synthetic(&other).unwrap()
        );
    }

    #[test]
    fn labels_are_recoverable() {
        let d = generate_synthetic(&SyntheticConfig {
            n_subjects: 8,
            ..Default::default()
        })
        .unwrap();
        let rate = label_recovery_rate(&d).unwrap();
        assert!(rate >= 0.95, "recovery {rate}");
    }

    #[test]
    fn disk_roundtrip_and_tamper_detection() {
        let dir = tempfile::tempdir().unwrap();
        let d = generate_synthetic(&small()).unwrap();
        save_dataset(&d, dir.path()).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), d);
        let blob = dir.path().join("subject_002_pawp.f64");
        let mut bytes = std::fs::read(&blob).unwrap();
        bytes[8] ^= 0x40;
        std::fs::write(&blob, bytes).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Corrupt(_))));
    }

    #[test]
    fn fraction_out_of_range() {
        let bad = SyntheticConfig {
            abnormal_fraction: 1.5,
            ..small()
        };
        assert!(generate_synthetic(&bad).is_err());
    }
}
