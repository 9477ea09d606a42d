//! Experiment orchestration, report files, external scoring and synthetic
//! corpora.

pub mod analysis;
pub mod config;
pub mod experiment;
pub mod predictions;
pub mod report;
pub mod synth;

pub use analysis::{error_analysis, ClassReport};
pub use config::{ExperimentConfig, WeightMode, BASELINE};
pub use experiment::{run_experiment, ReportTable, TrainedModel};
pub use predictions::{score_external, PredictionRecord};
pub use synth::{generate_synthetic_corpus, SynthSpec};

pub use crate::fsio::write_atomic;
