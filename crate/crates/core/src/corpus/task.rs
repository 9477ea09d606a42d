use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::LabelMatrix;
use crate::corpus::taxonomy::{Taxonomy, Top};
use crate::corpus::transcript::Corpus;
use crate::error::{Error, Result};

pub const EMOTION: &str = "EMOTION";
pub const NON_EMOTION: &str = "NON-EMOTION";

/// The five labeling tasks of the hierarchical scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "EMO-COG")]
    EmoCog,
    #[serde(rename = "EMO-8")]
    Emo8,
    #[serde(rename = "COG-8")]
    Cog8,
    #[serde(rename = "EMO-FULL")]
    EmoFull,
    #[serde(rename = "COG-FULL")]
    CogFull,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::EmoCog,
        Task::Emo8,
        Task::Cog8,
        Task::EmoFull,
        Task::CogFull,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Task::EmoCog => "EMO-COG",
            Task::Emo8 => "EMO-8",
            Task::Cog8 => "COG-8",
            Task::EmoFull => "EMO-FULL",
            Task::CogFull => "COG-FULL",
        }
    }

    pub fn is_multilabel(self) -> bool {
        self != Task::EmoCog
    }

    fn top(self) -> Option<Top> {
        match self {
            Task::EmoCog => None,
            Task::Emo8 | Task::EmoFull => Some(Top::Emo),
            Task::Cog8 | Task::CogFull => Some(Top::Cog),
        }
    }

    fn coarse(self) -> bool {
        matches!(self, Task::Emo8 | Task::Cog8)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTask(s.to_string()))
    }
}

/// How an utterance is extended with its predecessors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextWindow {
    pub depth: usize,
    pub pad: String,
    pub sep: String,
}

impl Default for ContextWindow {
    fn default() -> Self {
        ContextWindow {
            depth: 2,
            pad: "[PAD]".into(),
            sep: "[SEP]".into(),
        }
    }
}

impl ContextWindow {
    pub fn with_depth(depth: usize) -> Self {
        ContextWindow {
            depth,
            ..Default::default()
        }
    }

    pub fn build<S: AsRef<str>>(&self, session: &[S], i: usize) -> String {
        build_context_window(session, i, self.depth, &self.pad, &self.sep)
    }
}

/// Joins the texts at `i-k ..= i` with `sep`, padding positions before the
/// start of the session with `pad`.
///
/// # Panics
///
/// Panics if `i` is out of range for `session`.
pub fn build_context_window<S: AsRef<str>>(
    session: &[S],
    i: usize,
    k: usize,
    pad: &str,
    sep: &str,
) -> String {
    assert!(i < session.len(), "utterance index {i} out of range");
    let joiner = format!(" {sep} ");
    (0..=k)
        .rev()
        .map(|back| match i.checked_sub(back) {
            Some(j) => session[j].as_ref(),
            None => pad,
        })
        .collect::<Vec<_>>()
        .join(&joiner)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskItem {
    /// `session_id:turn_index`
    pub id: String,
    pub context_text: String,
    /// Sorted, duplicate-free subset of the label universe.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDataset {
    pub task: Task,
    pub label_universe: Vec<String>,
    pub items: Vec<TaskItem>,
}

impl TaskDataset {
    pub fn multilabel(&self) -> bool {
        self.task.is_multilabel()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items at `indices`, in the given order, sharing this label universe.
    pub fn subset(&self, indices: &[usize]) -> TaskDataset {
        TaskDataset {
            task: self.task,
            label_universe: self.label_universe.clone(),
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_universe.iter().position(|l| l == label)
    }

    pub fn label_matrix(&self) -> LabelMatrix {
        LabelMatrix::from_label_sets(
            self.label_universe.clone(),
            self.items.iter().map(|it| it.labels.iter().map(String::as_str)),
        )
        .expect("item labels lie inside the universe")
    }

    /// Class index of each item's single label. Only meaningful for
    /// single-label tasks; multilabel items report their first label.
    pub fn class_indices(&self) -> Vec<usize> {
        self.items
            .iter()
            .map(|it| self.label_index(&it.labels[0]).expect("label in universe"))
            .collect()
    }
}

/// Derives the dataset for one task: context windows plus task-level labels.
pub fn derive_task(
    corpus: &Corpus,
    taxonomy: &Taxonomy,
    task: Task,
    window: &ContextWindow,
) -> Result<TaskDataset> {
    for fine in corpus.label_inventory() {
        taxonomy.lookup(fine)?;
    }
    let mut items = Vec::new();
    let mut universe = BTreeSet::new();
    for session in corpus.sessions() {
        let texts = session.texts();
        for (i, u) in session.utterances.iter().enumerate() {
            let entries = u
                .fine_labels
                .iter()
                .map(|l| Ok((l.as_str(), taxonomy.lookup(l)?)))
                .collect::<Result<Vec<_>>>()?;
            let labels: BTreeSet<String> = match task.top() {
                None => {
                    let emo = entries.iter().any(|(_, e)| e.top == Top::Emo);
                    BTreeSet::from([if emo { EMOTION } else { NON_EMOTION }.to_string()])
                }
                Some(top) => entries
                    .iter()
                    .filter(|(_, e)| e.top == top)
                    .map(|(fine, e)| {
                        if task.coarse() {
                            e.coarse.clone()
                        } else {
                            fine.to_string()
                        }
                    })
                    .collect(),
            };
            if labels.is_empty() {
                continue;
            }
            universe.extend(labels.iter().cloned());
            items.push(TaskItem {
                id: format!("{}:{}", u.session_id, u.turn_index),
                context_text: window.build(&texts, i),
                labels: labels.into_iter().collect(),
            });
        }
    }
    let label_universe = if task == Task::EmoCog {
        vec![EMOTION.to_string(), NON_EMOTION.to_string()]
    } else {
        universe.into_iter().collect()
    };
    Ok(TaskDataset {
        task,
        label_universe,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::transcript::parse_transcripts_str;
    use proptest::prelude::*;

    fn corpus(lines: &[(&str, usize, &str, &[&str])]) -> Corpus {
        let s: Vec<String> = lines
            .iter()
            .map(|(s, t, text, labels)| {
                serde_json::json!({"session": s, "turn": t, "speaker": "A", "text": text, "labels": labels})
                    .to_string()
            })
            .collect();
        parse_transcripts_str(&s.join("\n")).unwrap()
    }

    #[test]
    fn window_full_context() {
        let w = build_context_window(&["t0", "t1", "t2"], 2, 2, "[PAD]", "[SEP]");
        assert_eq!(w, "t0 [SEP] t1 [SEP] t2");
    }

    #[test]
    fn window_pads_session_start() {
        let w = build_context_window(&["t0", "t1", "t2"], 0, 2, "[PAD]", "[SEP]");
        assert_eq!(w, "[PAD] [SEP] [PAD] [SEP] t0");
    }

    #[test]
    fn window_depth_zero_is_identity() {
        assert_eq!(build_context_window(&["t0", "hello there"], 1, 0, "P", "S"), "hello there");
    }

    proptest! {
        #[test]
        fn separator_count_equals_depth(n in 1usize..8, k in 0usize..6, seed in 0usize..100) {
            let texts: Vec<String> = (0..n).map(|j| format!("u{j} words here")).collect();
            let i = seed % n;
            let w = build_context_window(&texts, i, k, "[PAD]", "[SEP]");
            prop_assert_eq!(w.matches("[SEP]").count(), k);
        }
    }

    #[test]
    fn emo_cog_labels() {
        let t = Taxonomy::default_bundled();
        let c = corpus(&[
            ("s", 0, "i am so sad", &["express sadness"]),
            ("s", 1, "ok", &["agree"]),
            ("s", 2, "sad but ok", &["express sadness", "agree"]),
        ]);
        let d = derive_task(&c, &t, Task::EmoCog, &ContextWindow::default()).unwrap();
        let labels: Vec<_> = d.items.iter().map(|i| i.labels[0].as_str()).collect();
        assert_eq!(labels, [EMOTION, NON_EMOTION, EMOTION]);
        assert!(!d.multilabel());
        assert_eq!(d.items[1].id, "s:1");
        assert_eq!(d.items[1].context_text, "[PAD] [SEP] i am so sad [SEP] ok");
    }

    #[test]
    fn cog8_maps_to_coarse_and_dedups() {
        let t = Taxonomy::default_bundled();
        let c = corpus(&[
            ("s", 0, "you mean", &["paraphrase"]),
            ("s", 1, "i mean", &["clarify", "elaborate"]),
            ("s", 2, "wow", &["express surprise"]),
        ]);
        let d = derive_task(&c, &t, Task::Cog8, &ContextWindow::default()).unwrap();
        assert_eq!(d.items.len(), 2);
        assert_eq!(d.items[0].labels, ["clarification"]);
        assert_eq!(d.items[1].labels, ["clarification"]);
        let full = derive_task(&c, &t, Task::CogFull, &ContextWindow::default()).unwrap();
        assert_eq!(full.items[1].labels, ["clarify", "elaborate"]);
        assert_eq!(full.label_universe, ["clarify", "elaborate", "paraphrase"]);
    }

    #[test]
    fn emo_subset_counts() {
        let t = Taxonomy::default_bundled();
        let c = corpus(&[
            ("s", 0, "a", &["express joy"]),
            ("s", 1, "b", &["agree"]),
            ("s", 2, "c", &["express fear", "advise"]),
            ("s", 3, "d", &["describe event"]),
        ]);
        let w = ContextWindow::default();
        assert_eq!(derive_task(&c, &t, Task::EmoCog, &w).unwrap().len(), 4);
        assert_eq!(derive_task(&c, &t, Task::Emo8, &w).unwrap().len(), 2);
        assert_eq!(derive_task(&c, &t, Task::Cog8, &w).unwrap().len(), 3);
    }

    #[test]
    fn missing_taxonomy_entry_is_named() {
        let t = Taxonomy::default_bundled();
        let c = corpus(&[("s", 0, "hi", &["greet"])]);
        match derive_task(&c, &t, Task::EmoCog, &ContextWindow::default()).unwrap_err() {
            Error::UnknownFineLabel(l) => assert_eq!(l, "greet"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn task_ids_parse() {
        for t in Task::ALL {
            assert_eq!(t.id().parse::<Task>().unwrap(), t);
        }
        assert!(matches!("EMO-9".parse::<Task>(), Err(Error::UnknownTask(_))));
    }

    #[test]
    fn windows_do_not_cross_sessions() {
        let t = Taxonomy::default_bundled();
        let c = corpus(&[("a", 0, "first", &["agree"]), ("b", 0, "second", &["agree"])]);
        let d = derive_task(&c, &t, Task::EmoCog, &ContextWindow::default()).unwrap();
        assert_eq!(d.items[1].context_text, "[PAD] [SEP] [PAD] [SEP] second");
    }
}
