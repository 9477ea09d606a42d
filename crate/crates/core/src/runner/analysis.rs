//! Per-class error analysis.

use serde::Serialize;

use crate::chain::LabelMatrix;
use crate::error::Result;
use crate::metrics::{confusion_counts, f1};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub label: String,
    pub support: usize,
    pub predicted: usize,
    /// 0 when the class is never predicted (see `never_predicted`).
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub never_predicted: bool,
}

/// One report per class, worst F1 first (ties by label).
pub fn error_analysis(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<Vec<ClassReport>> {
    let c = confusion_counts(truth, pred)?;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut out: Vec<ClassReport> = (0..c.n_classes())
        .map(|i| ClassReport {
            label: c.labels[i].clone(),
            support: c.support(i),
            predicted: c.predicted(i),
            precision: ratio(c.tp[i], c.predicted(i)),
            recall: ratio(c.tp[i], c.support(i)),
            f1: f1(c.tp[i], c.fp[i], c.fn_[i]),
            never_predicted: c.predicted(i) == 0,
        })
        .collect();
    out.sort_by(|a, b| a.f1.total_cmp(&b.f1).then_with(|| a.label.cmp(&b.label)));
    Ok(out)
}

/// CSV with columns label, support, predicted, precision, recall, f1, flag.
pub fn error_analysis_csv(reports: &[ClassReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "support", "predicted", "precision", "recall", "f1", "flag"])
        .expect("in-memory write");
    for r in reports {
        w.write_record([
            r.label.clone(),
            r.support.to_string(),
            r.predicted.to_string(),
            format!("{:.4}", r.precision),
            format!("{:.4}", r.recall),
            format!("{:.4}", r.f1),
            if r.never_predicted { "precision_undefined".into() } else { String::new() },
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
