use serde::{Deserialize, Serialize};

use crate::learners::Classifier;
use crate::scalar::Scalar;
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearKind {
    HingeSgd,
    Logistic,
}

/// Linear decision functions `w_k . x + b_k`.
///
/// Hinge models keep one row for two classes (the margin of the second
/// class) and one row per class otherwise (one-vs-rest). Logistic models
/// keep one row per class (multinomial logits). A model trained on a single
/// class has no rows and always predicts that class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct LinearModel<F> {
    #[serde(rename = "loss")]
    pub kind: LinearKind,
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<F>>,
    pub bias: Vec<F>,
    pub lambda: f64,
    pub n_features: usize,
    /// Epochs (hinge) or accepted iterations (logistic).
    pub iterations: usize,
    /// False when the logistic iteration cap was reached first.
    pub converged: bool,
}

impl<F: Scalar> LinearModel<F> {
    pub(crate) fn constant(kind: LinearKind, class: usize, n_features: usize, lambda: f64) -> Self {
        LinearModel {
            kind,
            classes: vec![class],
            weights: Vec::new(),
            bias: Vec::new(),
            lambda,
            n_features,
            iterations: 0,
            converged: true,
        }
    }

    pub fn margins(&self, x: &SparseVector<F>) -> Vec<F> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| x.dot_dense(w) + b)
            .collect()
    }
}

impl<F: Scalar> Classifier<F> for LinearModel<F> {
    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn scores(&self, x: &SparseVector<F>) -> Vec<F> {
        match (self.classes.len(), self.weights.len()) {
            (1, _) => vec![F::zero()],
            (2, 1) => {
                let m = self.margins(x)[0];
                vec![-m, m]
            }
            _ => self.margins(x),
        }
    }
}
