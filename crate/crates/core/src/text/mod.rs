//! Text normalization and TF-IDF features.

pub mod sparse;
pub mod tfidf;
pub mod tokenize;

pub use sparse::SparseVector;
pub use tfidf::{fit_tfidf, transform_tfidf, Vocabulary, DEFAULT_MAX_VOCAB};
pub use tokenize::{normalize_tokens, Normalizer, TokenList};
