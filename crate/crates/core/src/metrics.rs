//! Evaluation metrics: per-class F1, macro/weighted F1, accuracy, Hamming
//! loss, the majority baseline and multi-seed aggregation.
//!
//! Metric functions return fractions in `[0, 1]`; [`MetricsRow`] carries
//! percentages.

use serde::{Deserialize, Serialize};

use crate::chain::LabelMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub labels: Vec<String>,
    pub tp: Vec<usize>,
    pub fp: Vec<usize>,
    pub fn_: Vec<usize>,
}

impl ConfusionCounts {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn support(&self, i: usize) -> usize {
        self.tp[i] + self.fn_[i]
    }

    pub fn supports(&self) -> Vec<usize> {
        (0..self.n_classes()).map(|i| self.support(i)).collect()
    }

    /// Number of items predicted as class `i`.
    pub fn predicted(&self, i: usize) -> usize {
        self.tp[i] + self.fp[i]
    }
}

pub fn confusion_counts(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<ConfusionCounts> {
    truth.same_shape(pred)?;
    let l = truth.n_labels();
    let (mut tp, mut fp, mut fn_) = (vec![0; l], vec![0; l], vec![0; l]);
    for i in 0..truth.n_rows() {
        for (j, (&t, &p)) in truth.row(i).iter().zip(pred.row(i)).enumerate() {
            match (t, p) {
                (true, true) => tp[j] += 1,
                (false, true) => fp[j] += 1,
                (true, false) => fn_[j] += 1,
                (false, false) => {}
            }
        }
    }
    Ok(ConfusionCounts {
        labels: truth.labels().to_vec(),
        tp,
        fp,
        fn_,
    })
}

/// Which class supports weight the weighted F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightSource<'a> {
    /// Supports in the evaluated set.
    #[default]
    Evaluation,
    /// Externally supplied supports, e.g. training-set counts.
    Training(&'a [usize]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Scores<F> {
    pub per_class: Vec<F>,
    pub macro_f1: F,
    pub weighted_f1: F,
}

/// `TP / (TP + (FP + FN) / 2)`, with 0/0 read as 0.
pub fn f1<F: Scalar>(tp: usize, fp: usize, fn_: usize) -> F {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        F::zero()
    } else {
        F::of_usize(2 * tp) / F::of_usize(denom)
    }
}

/// Per-class F1 plus its unweighted and support-weighted means.
///
/// Weights are normalized to sum to one; with zero total support the
/// weighted mean is 0. Panics if training supports have the wrong length.
pub fn f1_scores<F: Scalar>(counts: &ConfusionCounts, weights: WeightSource<'_>) -> F1Scores<F> {
    let n = counts.n_classes();
    let per_class: Vec<F> = (0..n)
        .map(|i| f1(counts.tp[i], counts.fp[i], counts.fn_[i]))
        .collect();
    let macro_f1 = if n == 0 {
        F::zero()
    } else {
        per_class.iter().copied().sum::<F>() / F::of_usize(n)
    };
    let supports = match weights {
        WeightSource::Evaluation => counts.supports(),
        WeightSource::Training(s) => {
            assert_eq!(s.len(), n, "one training support per class");
            s.to_vec()
        }
    };
    let total: usize = supports.iter().sum();
    let weighted_f1 = if total == 0 {
        F::zero()
    } else {
        per_class
            .iter()
            .zip(&supports)
            .map(|(&f, &s)| f * F::of_usize(s))
            .sum::<F>()
            / F::of_usize(total)
    };
    F1Scores {
        per_class,
        macro_f1,
        weighted_f1,
    }
}

/// Exact-match fraction of two equally long sequences.
pub fn accuracy<F: Scalar, T: PartialEq>(truth: &[T], pred: &[T]) -> Result<F> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("accuracy input".into()));
    }
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    Ok(F::of_usize(hits) / F::of_usize(truth.len()))
}

/// Fraction of label cells where the two matrices disagree.
pub fn hamming_loss<F: Scalar>(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<F> {
    truth.same_shape(pred)?;
    let cells = truth.n_rows() * truth.n_labels();
    if cells == 0 {
        return Err(Error::Empty("hamming loss input".into()));
    }
    let wrong: usize = (0..truth.n_rows())
        .map(|i| truth.row(i).iter().zip(pred.row(i)).filter(|(a, b)| a != b).count())
        .sum();
    Ok(F::of_usize(wrong) / F::of_usize(cells))
}

/// Constant predictor emitting the most frequent training label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityBaseline {
    pub label_universe: Vec<String>,
    /// Index of the emitted label.
    pub label: usize,
}

impl MajorityBaseline {
    pub fn label_name(&self) -> &str {
        &self.label_universe[self.label]
    }

    /// `n` rows, each the singleton set of the majority label.
    pub fn predict(&self, n: usize) -> LabelMatrix {
        let mut m = LabelMatrix::zeros(self.label_universe.clone(), n);
        for i in 0..n {
            m.set(i, self.label, true);
        }
        m
    }
}

/// Most frequent label column of `train`; ties go to the lexicographically
/// smallest label name.
pub fn majority_baseline(train: &LabelMatrix) -> Result<MajorityBaseline> {
    if train.n_rows() == 0 || train.n_labels() == 0 {
        return Err(Error::Empty("baseline training labels".into()));
    }
    let counts = train.column_counts();
    let names = train.labels();
    let label = (0..names.len())
        .min_by(|&a, &b| counts[b].cmp(&counts[a]).then_with(|| names[a].cmp(&names[b])))
        .expect("non-empty universe");
    Ok(MajorityBaseline {
        label_universe: names.to_vec(),
        label,
    })
}

/// One evaluated (task, model, seed) cell. Metrics are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub task: String,
    pub model: String,
    pub seed: Option<u64>,
    pub w_f1: f64,
    pub m_f1: f64,
    /// Single-label tasks only.
    pub acc: Option<f64>,
    /// Multilabel tasks only.
    pub hl: Option<f64>,
}

impl MetricsRow {
    pub fn multilabel(&self) -> bool {
        self.hl.is_some()
    }

    /// The third metric: HL for multilabel rows, ACC otherwise.
    pub fn third(&self) -> f64 {
        self.hl.or(self.acc).unwrap_or(f64::NAN)
    }
}

/// Scores predictions against truth. Accuracy is the exact row-match
/// fraction, which for one-hot rows is ordinary classification accuracy.
pub fn score_matrices(
    task: &str,
    model: &str,
    seed: Option<u64>,
    truth: &LabelMatrix,
    pred: &LabelMatrix,
    multilabel: bool,
    weights: WeightSource<'_>,
) -> Result<MetricsRow> {
    let counts = confusion_counts(truth, pred)?;
    let f: F1Scores<f64> = f1_scores(&counts, weights);
    let (acc, hl) = if multilabel {
        (None, Some(100.0 * hamming_loss::<f64>(truth, pred)?))
    } else {
        let t: Vec<&[bool]> = (0..truth.n_rows()).map(|i| truth.row(i)).collect();
        let p: Vec<&[bool]> = (0..pred.n_rows()).map(|i| pred.row(i)).collect();
        (Some(100.0 * accuracy::<f64, _>(&t, &p)?), None)
    };
    Ok(MetricsRow {
        task: task.to_string(),
        model: model.to_string(),
        seed,
        w_f1: 100.0 * f.weighted_f1,
        m_f1: 100.0 * f.macro_f1,
        acc,
        hl,
    })
}

/// Rounds half away from zero at `decimals` places, absorbing the binary
/// representation error of values like 74.745.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let y = x.abs() * scale;
    (y + 0.5 + 1e-9 * y.max(1.0)).floor().copysign(x) / scale
}

/// Fixed two-decimal rendering used in every report.
pub fn fmt2(x: f64) -> String {
    format!("{:.2}", round_half_up(x, 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }

    pub fn render(&self, n_runs: usize) -> String {
        if n_runs > 1 {
            format!("{} ± {}", fmt2(self.mean), fmt2(self.std))
        } else {
            fmt2(self.mean)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub task: String,
    pub model: String,
    pub n_runs: usize,
    pub w_f1: MeanStd,
    pub m_f1: MeanStd,
    pub acc: Option<MeanStd>,
    pub hl: Option<MeanStd>,
}

pub fn aggregate_runs(rows: &[MetricsRow]) -> Result<AggregateRow> {
    let first = rows.first().ok_or_else(|| Error::Empty("run list".into()))?;
    if let Some(r) = rows.iter().find(|r| {
        r.task != first.task || r.model != first.model || r.multilabel() != first.multilabel()
    }) {
        return Err(Error::Heterogeneous(format!(
            "({}, {}) mixed with ({}, {})",
            first.task, first.model, r.task, r.model
        )));
    }
    let collect = |f: fn(&MetricsRow) -> Option<f64>| -> Option<MeanStd> {
        rows.iter().map(f).collect::<Option<Vec<_>>>().map(|v| MeanStd::of(&v))
    };
    Ok(AggregateRow {
        task: first.task.clone(),
        model: first.model.clone(),
        n_runs: rows.len(),
        w_f1: collect(|r| Some(r.w_f1)).expect("always present"),
        m_f1: collect(|r| Some(r.m_f1)).expect("always present"),
        acc: collect(|r| r.acc),
        hl: collect(|r| r.hl),
    })
}
