//! Stratified train/test splitting.
//!
//! Uses iterative stratification: the label with the fewest unassigned items
//! is served first, each of its items goes to the fold whose remaining demand
//! for that label is largest, then to the fold with the largest remaining
//! overall demand, and only then to a seeded coin flip. On single-label data
//! this keeps every label's test count within one of its target.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::corpus::task::TaskDataset;
use crate::fsio::write_atomic;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: TaskDataset,
    pub test: TaskDataset,
    pub seed: u64,
    /// Fraction of items that go to the training fold.
    pub ratio: f64,
}

/// Splits `dataset` into train (`ratio`) and test (`1 - ratio`) folds.
pub fn stratified_split(dataset: &TaskDataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split ratio {ratio} outside (0, 1)"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("cannot split an empty dataset".into()));
    }
    let fold_of = assign_folds(dataset, &[ratio, 1.0 - ratio], seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, &f) in fold_of.iter().enumerate() {
        if f == 0 { train.push(i) } else { test.push(i) }
    }
    Ok(SplitPair {
        train: dataset.subset(&train),
        test: dataset.subset(&test),
        seed,
        ratio,
    })
}

fn assign_folds(dataset: &TaskDataset, proportions: &[f64], seed: u64) -> Vec<usize> {
    let n_labels = dataset.label_universe.len();
    let n_folds = proportions.len();
    let item_labels: Vec<Vec<usize>> = dataset
        .items
        .iter()
        .map(|it| {
            it.labels
                .iter()
                .map(|l| dataset.label_index(l).expect("label in universe"))
                .collect()
        })
        .collect();
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    for (i, labels) in item_labels.iter().enumerate() {
        for &l in labels {
            by_label[l].push(i);
        }
    }
    let n = dataset.len() as f64;
    let mut fold_demand: Vec<f64> = proportions.iter().map(|p| p * n).collect();
    let mut label_demand: Vec<Vec<f64>> = proportions
        .iter()
        .map(|p| by_label.iter().map(|items| p * items.len() as f64).collect())
        .collect();
    let mut unassigned: Vec<usize> = by_label.iter().map(Vec::len).collect();
    let mut fold_of = vec![usize::MAX; dataset.len()];
    let mut rng = rng_from_seed(seed);

    while let Some(label) = (0..n_labels)
        .filter(|&l| unassigned[l] > 0)
        .min_by_key(|&l| (unassigned[l], l))
    {
        for &item in &by_label[label] {
            if fold_of[item] != usize::MAX {
                continue;
            }
            let fold = choose_fold(
                (0..n_folds).map(|f| (label_demand[f][label], fold_demand[f])),
                &mut rng,
            );
            fold_of[item] = fold;
            fold_demand[fold] -= 1.0;
            for &l in &item_labels[item] {
                label_demand[fold][l] -= 1.0;
                unassigned[l] -= 1;
            }
        }
    }
    fold_of
}

fn choose_fold(demands: impl Iterator<Item = (f64, f64)>, rng: &mut impl Rng) -> usize {
    let demands: Vec<(f64, f64)> = demands.collect();
    let best_label = demands.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);
    let tier1: Vec<usize> = (0..demands.len())
        .filter(|&f| demands[f].0 >= best_label - TIE_EPS)
        .collect();
    let best_total = tier1
        .iter()
        .map(|&f| demands[f].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let tier2: Vec<usize> = tier1
        .into_iter()
        .filter(|&f| demands[f].1 >= best_total - TIE_EPS)
        .collect();
    if tier2.len() == 1 {
        tier2[0]
    } else {
        tier2[rng.gen_range(0..tier2.len())]
    }
}

impl SplitPair {
    fn header(&self) -> String {
        format!("# seed={} ratio={}", self.seed, self.ratio)
    }

    /// Writes `train_ids.txt` and `test_ids.txt` under `dir`.
    pub fn write_manifest(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for (name, ds) in [("train_ids.txt", &self.train), ("test_ids.txt", &self.test)] {
            let mut s = self.header();
            s.push('\n');
            for it in &ds.items {
                s.push_str(&it.id);
                s.push('\n');
            }
            let path = dir.join(name);
            write_atomic(&path, s.as_bytes())?;
        }
        Ok(())
    }
}

/// Reads one manifest file: returns `(seed, ratio, ids)`.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<(u64, f64, Vec<String>)> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = s.lines();
    let header = lines.next().ok_or_else(|| Error::Empty("manifest".into()))?;
    let parse_err = || Error::Parse {
        line: 1,
        message: format!("bad manifest header {header:?}"),
    };
    let mut seed = None;
    let mut ratio = None;
    for field in header.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("seed", v)) => seed = v.parse().ok(),
            Some(("ratio", v)) => ratio = v.parse().ok(),
            _ => return Err(parse_err()),
        }
    }
    let ids = lines.filter(|l| !l.is_empty()).map(str::to_string).collect();
    Ok((seed.ok_or_else(parse_err)?, ratio.ok_or_else(parse_err)?, ids))
}
