//! Classical learners over sparse features.
//!
//! Every fitted model implements [`Classifier`]: per-class decision scores
//! aligned with the sorted list of classes seen in training, and an argmax
//! prediction that breaks ties toward the lowest class index.

pub mod boost;
pub mod forest;
pub mod linear;
pub mod logistic;
pub mod model;
pub mod naive_bayes;
pub mod sgd;

pub use boost::{AdaBoostParams, BoostEnsemble};
pub use forest::{Forest, ForestParams, Tree};
pub use linear::{LinearKind, LinearModel};
pub use logistic::{LogRegParams, LogisticObjective};
pub use model::{LearnerSpec, Model};
pub use naive_bayes::{NaiveBayesParams, NbModel};
pub use sgd::{OptimalSchedule, SgdParams};

use crate::error::{Error, Result};
use crate::scalar::{argmax, Scalar};
use crate::text::SparseVector;

pub trait Classifier<F: Scalar> {
    /// Sorted class ids the model can emit.
    fn classes(&self) -> &[usize];

    fn n_features(&self) -> usize;

    /// Scores aligned with [`Classifier::classes`]; larger is more likely.
    fn scores(&self, x: &SparseVector<F>) -> Vec<F>;

    fn predict_one(&self, x: &SparseVector<F>) -> usize {
        let s = self.scores(x);
        self.classes()[argmax(&s).unwrap_or(0)]
    }
}

/// Fits a model from features, class ids and a seed.
pub trait Learner<F: Scalar> {
    type Model: Classifier<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], seed: u64) -> Result<Self::Model>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions<F> {
    pub classes: Vec<usize>,
    pub labels: Vec<usize>,
    pub scores: Vec<Vec<F>>,
}

/// Predicted class and score vector for every input row.
pub fn predict<F: Scalar, M: Classifier<F> + ?Sized>(
    model: &M,
    xs: &[SparseVector<F>],
) -> Result<Predictions<F>> {
    check_dims(xs, model.n_features())?;
    let scores: Vec<Vec<F>> = xs.iter().map(|x| model.scores(x)).collect();
    let labels = scores
        .iter()
        .map(|s| model.classes()[argmax(s).unwrap_or(0)])
        .collect();
    Ok(Predictions {
        classes: model.classes().to_vec(),
        labels,
        scores,
    })
}

pub(crate) fn check_dims<F: Scalar>(xs: &[SparseVector<F>], dim: usize) -> Result<()> {
    match xs.iter().find(|x| x.dim() != dim) {
        Some(x) => Err(Error::DimensionMismatch {
            expected: dim,
            found: x.dim(),
        }),
        None => Ok(()),
    }
}

/// Validates a training set and returns `(feature dimension, sorted classes)`.
pub(crate) fn check_training<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
) -> Result<(usize, Vec<usize>)> {
    if xs.is_empty() {
        return Err(Error::Empty("training set".into()));
    }
    if xs.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: y.len(),
        });
    }
    let dim = xs[0].dim();
    check_dims(xs, dim)?;
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    Ok((dim, classes))
}

pub(crate) fn class_position(classes: &[usize], c: usize) -> usize {
    classes.binary_search(&c).expect("class seen in training")
}
