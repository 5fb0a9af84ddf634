//! Signal preprocessing, synthetic data, cross-validation and the
//! hyperparameter search around the CNN classifier.

pub mod filter;
pub mod folds;
pub mod hpo;
pub mod metrics;
pub mod segment;
pub mod synth;
pub mod train;

pub use filter::{butterworth_lowpass, butterworth_lowpass_design, SosFilter};
pub use folds::{stratified_group_kfold, stratified_kfold, FoldAssignment};
pub use hpo::{hpo_fitness, hpo_search, hpo_split, HpoConfig, HpoResult, HpoSpace};
pub use metrics::{confusion_metrics, ConfusionMatrix, Metrics};
pub use segment::{label_segment, segment, Label};
pub use synth::{generate_synthetic, load_dataset, save_dataset, SignalRecord, SyntheticConfig, SyntheticDataset};
pub use train::{prepare_segments, train_and_evaluate, train_model, CvReport, LabeledSegment, PreprocessConfig};
