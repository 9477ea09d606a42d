//! Prediction files and scoring of externally produced predictions.
//!
//! Predictions and gold labels share one JSON Lines format:
//! `{"item_id": "s1:4", "labels": ["EMOTION"]}`.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::LabelMatrix;
use crate::corpus::task::{EMOTION, NON_EMOTION};
use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::metrics::{score_matrices, MetricsRow, WeightSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub item_id: String,
    pub labels: Vec<String>,
}

pub fn records_from_matrix(ids: &[String], m: &LabelMatrix) -> Vec<PredictionRecord> {
    ids.iter()
        .enumerate()
        .map(|(i, id)| PredictionRecord {
            item_id: id.clone(),
            labels: m.row_labels(i).into_iter().map(String::from).collect(),
        })
        .collect()
}

pub fn to_jsonl(records: &[PredictionRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

pub fn parse_predictions_str(s: &str) -> Result<Vec<PredictionRecord>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (n, line) in s.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: PredictionRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(r.item_id.clone()) {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("duplicate item_id {:?}", r.item_id),
            });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions_str(&s)
}

/// Label universe file: one label per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(s.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// The universe a gold file implies: the fixed pair for EMO-COG, otherwise
/// the sorted labels that occur in it.
pub fn gold_universe(task: Task, gold: &[PredictionRecord]) -> Vec<String> {
    if task == Task::EmoCog {
        return vec![EMOTION.to_string(), NON_EMOTION.to_string()];
    }
    let set: BTreeSet<&str> = gold.iter().flat_map(|r| r.labels.iter().map(String::as_str)).collect();
    set.into_iter().map(String::from).collect()
}

/// Scores `pred` against `gold`, aligned by item id in gold order.
pub fn score_records(
    pred: &[PredictionRecord],
    gold: &[PredictionRecord],
    task: Task,
    model: &str,
    universe: Option<&[String]>,
) -> Result<MetricsRow> {
    let universe = match universe {
        Some(u) => u.to_vec(),
        None => gold_universe(task, gold),
    };
    let by_id: HashMap<&str, &PredictionRecord> = pred.iter().map(|r| (r.item_id.as_str(), r)).collect();
    let gold_ids: BTreeSet<&str> = gold.iter().map(|r| r.item_id.as_str()).collect();
    let missing: Vec<String> = gold
        .iter()
        .filter(|r| !by_id.contains_key(r.item_id.as_str()))
        .map(|r| r.item_id.clone())
        .collect();
    let extra: Vec<String> = pred
        .iter()
        .filter(|r| !gold_ids.contains(r.item_id.as_str()))
        .map(|r| r.item_id.clone())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::ItemMismatch { missing, extra });
    }
    let known: BTreeSet<&str> = universe.iter().map(String::as_str).collect();
    for l in pred.iter().chain(gold).flat_map(|r| &r.labels) {
        if !known.contains(l.as_str()) {
            return Err(Error::LabelOutsideUniverse {
                label: l.clone(),
                task: task.id().to_string(),
            });
        }
    }
    let matrix = |recs: Vec<&PredictionRecord>| {
        LabelMatrix::from_label_sets(
            universe.clone(),
            recs.into_iter().map(|r| r.labels.iter().map(String::as_str)),
        )
    };
    let truth = matrix(gold.iter().collect())?;
    let predicted = matrix(gold.iter().map(|g| by_id[g.item_id.as_str()]).collect())?;
    score_matrices(
        task.id(),
        model,
        None,
        &truth,
        &predicted,
        task.is_multilabel(),
        WeightSource::Evaluation,
    )
}

/// File-based [`score_records`].
pub fn score_external(
    pred_path: impl AsRef<Path>,
    gold_path: impl AsRef<Path>,
    task: Task,
    universe: Option<&[String]>,
) -> Result<MetricsRow> {
    let pred = read_predictions(pred_path)?;
    let gold = read_predictions(gold_path)?;
    score_records(&pred, &gold, task, "external", universe)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, labels: &[&str]) -> PredictionRecord {
        PredictionRecord {
            item_id: id.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn identical_predictions_score_perfectly() {
        let gold = vec![rec("a:0", &["x", "y"]), rec("a:1", &["y"])];
        let row = score_records(&gold, &gold, Task::Emo8, "m", None).unwrap();
        assert_eq!((row.w_f1, row.m_f1, row.hl), (100.0, 100.0, Some(0.0)));
        let gold = vec![rec("a:0", &[EMOTION]), rec("a:1", &[NON_EMOTION])];
        let row = score_records(&gold, &gold, Task::EmoCog, "m", None).unwrap();
        assert_eq!(row.acc, Some(100.0));
    }

    #[test]
    fn mismatches_are_named() {
        let gold = vec![rec("a:0", &["x"]), rec("a:1", &["y"])];
        let pred = vec![rec("a:0", &["x"]), rec("b:9", &["y"])];
        match score_records(&pred, &gold, Task::Emo8, "m", None) {
            Err(Error::ItemMismatch { missing, extra }) => {
                assert_eq!((missing, extra), (vec!["a:1".to_string()], vec!["b:9".to_string()]));
            }
            other => panic!("{other:?}"),
        }
        let pred = vec![rec("a:0", &["x"]), rec("a:1", &["zzz"])];
        assert!(matches!(
            score_records(&pred, &gold, Task::Emo8, "m", None),
            Err(Error::LabelOutsideUniverse { .. })
        ));
    }

    #[test]
    fn jsonl_round_trip_and_duplicates() {
        let recs = vec![rec("a:0", &["x"]), rec("a:1", &[])];
        assert_eq!(parse_predictions_str(&to_jsonl(&recs)).unwrap(), recs);
        assert!(parse_predictions_str("{\"item_id\":\"a\",\"labels\":[]}\n{\"item_id\":\"a\",\"labels\":[]}").is_err());
        assert!(matches!(parse_predictions_str("\n{oops"), Err(Error::Parse { line: 2, .. })));
    }
}
