//! Fixed-length segmentation and beat-aligned PAWP labeling.

use serde::{Deserialize, Serialize};

pub const SEGMENT_LEN: usize = 300;
pub const DEFAULT_LOW_MMHG: f64 = 8.0;
pub const DEFAULT_HIGH_MMHG: f64 = 16.0;
pub const MIN_SEPARATION_S: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Abnormal,
    Normal,
}

impl Label {
    /// Class index: abnormal (the positive class) is 0.
    pub fn index(self) -> usize {
        match self {
            Label::Abnormal => 0,
            Label::Normal => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Label::Abnormal
        } else {
            Label::Normal
        }
    }

    pub fn from_mean(mean_pawp: f64, low: f64, high: f64) -> Self {
        if mean_pawp < low || mean_pawp > high {
            Label::Abnormal
        } else {
            Label::Normal
        }
    }
}

/// Consecutive non-overlapping windows; a trailing remainder is dropped.
pub fn segment(signal: &[f64], length: usize) -> Vec<Vec<f64>> {
    assert!(length > 0, "segment length must be positive");
    signal.chunks_exact(length).map(<[f64]>::to_vec).collect()
}

/// Local minima, keeping the deepest ones at least `min_separation`
/// samples apart. Returned in index order.
pub fn local_minima(x: &[f64], min_separation: usize) -> Vec<usize> {
    if x.len() < 3 {
        return Vec::new();
    }
    let mut candidates: Vec<usize> = (1..x.len() - 1)
        .filter(|&i| x[i] < x[i - 1] && x[i] <= x[i + 1])
        .collect();
    candidates.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&k| k.abs_diff(c) >= min_separation) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub mean_pawp: f64,
    pub label: Label,
    /// Fewer than two minima were found; the whole-segment mean was used.
    pub fallback: bool,
}

/// Mean PAWP over the complete beats of a segment, then thresholded.
pub fn label_segment(pawp: &[f64], fs: f64, low: f64, high: f64) -> SegmentLabel {
    let sep = (MIN_SEPARATION_S * fs).round().max(1.0) as usize;
    let minima = local_minima(pawp, sep);
    let (span, fallback) = match (minima.first(), minima.last()) {
        (Some(&a), Some(&b)) if minima.len() >= 2 && b > a => (&pawp[a..b], false),
        _ => (pawp, true),
    };
    let mean_pawp = span.iter().sum::<f64>() / span.len() as f64;
    SegmentLabel {
        mean_pawp,
        label: Label::from_mean(mean_pawp, low, high),
        fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn segment_counts() {
        assert_eq!(segment(&[0.0; 900], 300).len(), 3);
        assert_eq!(segment(&[0.0; 899], 300).len(), 2);
        let x: Vec<f64> = (0..300).map(f64::from).collect();
        assert_eq!(segment(&x, 300), vec![x.clone()]);
        assert!(segment(&[0.0; 299], 300).is_empty());
    }

    #[test]
    fn constant_segments_use_the_fallback() {
        let l = label_segment(&[12.0; 300], 50.0, 8.0, 16.0);
        assert_eq!(l.mean_pawp, 12.0);
        assert_eq!(l.label, Label::Normal);
        assert!(l.fallback);
        assert_eq!(label_segment(&[20.0; 300], 50.0, 8.0, 16.0).label, Label::Abnormal);
    }

    #[test]
    fn beat_aligned_mean_of_a_sinusoid() {
        let x: Vec<f64> = (0..300)
            .map(|i| 12.0 + 2.0 * (2.0 * PI * 1.2 * i as f64 / 50.0).sin())
            .collect();
        let l = label_segment(&x, 50.0, 8.0, 16.0);
        assert!(!l.fallback);
        assert!((l.mean_pawp - 12.0).abs() < 0.3, "{}", l.mean_pawp);
        assert_eq!(l.label, Label::Normal);
    }

    #[test]
    fn minima_respect_separation() {
        let x = [5.0, 1.0, 2.0, 0.5, 3.0, 4.0, 0.0, 4.0];
        assert_eq!(local_minima(&x, 1), vec![1, 3, 6]);
        assert_eq!(local_minima(&x, 3), vec![3, 6]);
    }
}
