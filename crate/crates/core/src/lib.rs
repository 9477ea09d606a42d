//! Utterance labeling for conversation transcripts: hierarchical label
//! tasks, context-windowed TF-IDF features, classical learners, classifier
//! chains and the evaluation/reporting pipeline around them.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod chain;
pub mod corpus;
pub mod error;
mod fsio;
pub mod learners;
pub mod metrics;
pub mod runner;
pub mod scalar;
pub mod seed;
pub mod text;

pub use chain::{fit_chain, frequency_order, predict_chain, Chain, ChainModel, LabelMatrix};
pub use corpus::{derive_task, parse_transcripts, stratified_split, Corpus, Task, TaskDataset, Taxonomy};
pub use error::{Error, Result};
pub use learners::{predict, Classifier, Learner, LearnerSpec, Model};
pub use metrics::{
    accuracy, aggregate_runs, confusion_counts, f1_scores, hamming_loss, majority_baseline,
    AggregateRow, ConfusionCounts, MetricsRow, WeightSource,
};
pub use scalar::Scalar;
pub use seed::derive_seed;
pub use text::{normalize_tokens, Normalizer, SparseVector, TokenList, Vocabulary};

pub type SparseVector64 = SparseVector<f64>;
pub type SparseVector32 = SparseVector<f32>;
pub type Vocabulary64 = Vocabulary<f64>;
pub type Vocabulary32 = Vocabulary<f32>;
pub type Model64 = Model<f64>;
pub type Model32 = Model<f32>;
pub type Chain64 = Chain<f64>;
pub type Chain32 = Chain<f32>;

/// Crate version recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
