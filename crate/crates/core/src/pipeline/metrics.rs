//! Confusion counts with abnormal as the positive class.

use serde::{Deserialize, Serialize};

use super::segment::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn from_predictions(predicted: &[Label], actual: &[Label]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::DimensionMismatch {
                expected: actual.len(),
                actual: predicted.len(),
            });
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (Label::Abnormal, Label::Abnormal) => cm.tp += 1,
                (Label::Normal, Label::Normal) => cm.tn += 1,
                (Label::Abnormal, Label::Normal) => cm.fp += 1,
                (Label::Normal, Label::Abnormal) => cm.fn_ += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }
}

/// `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion_metrics(cm: &ConfusionMatrix) -> Metrics {
    Metrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        sensitivity: ratio(cm.tp, cm.tp + cm.fn_),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
    }
}

/// Metric formatted for CSV, `undefined` when missing.
pub fn format_metric(m: Option<f64>) -> String {
    m.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_one_sided() {
        let m = confusion_metrics(&ConfusionMatrix {
            tp: 10,
            tn: 10,
            fp: 0,
            fn_: 0,
        });
        assert_eq!(
            (m.accuracy, m.sensitivity, m.specificity),
            (Some(1.0), Some(1.0), Some(1.0))
        );
        let m = confusion_metrics(&ConfusionMatrix {
            tp: 0,
            tn: 5,
            fp: 0,
            fn_: 5,
        });
        assert_eq!(
            (m.accuracy, m.sensitivity, m.specificity),
            (Some(0.5), Some(0.0), Some(1.0))
        );
    }

    #[test]
    fn undefined_denominators() {
        let m = confusion_metrics(&ConfusionMatrix {
            tp: 0,
            tn: 4,
            fp: 1,
            fn_: 0,
        });
        assert_eq!(m.sensitivity, None);
        assert_eq!(format_metric(m.sensitivity), "undefined");
        assert_eq!(confusion_metrics(&ConfusionMatrix::default()).accuracy, None);
    }

    #[test]
    fn counts_from_predictions() {
        use Label::*;
        let cm = ConfusionMatrix::from_predictions(
            &[Abnormal, Normal, Abnormal, Normal],
            &[Abnormal, Abnormal, Normal, Normal],
        )
        .unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                tn: 1,
                fp: 1,
                fn_: 1
            }
        );
        let json = serde_json::to_string(&cm).unwrap();
        assert!(json.contains("\"fn\":1"));
    }
}
