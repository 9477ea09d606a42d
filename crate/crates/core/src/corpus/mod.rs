//! Transcripts, the label taxonomy, per-task datasets and splitting.

pub mod split;
pub mod task;
pub mod taxonomy;
pub mod transcript;

pub use split::{read_manifest, stratified_split, SplitPair};
pub use task::{build_context_window, derive_task, ContextWindow, Task, TaskDataset, TaskItem};
pub use taxonomy::{Taxonomy, TaxonomyEntry, Top};
pub use transcript::{parse_transcripts, parse_transcripts_str, Corpus, Session, Utterance};
