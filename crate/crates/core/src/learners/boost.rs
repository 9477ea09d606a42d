//! Discrete multiclass AdaBoost (SAMME) over weighted naive Bayes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::naive_bayes::NbModel;
use crate::learners::{check_training, class_position, Classifier, Learner};
use crate::scalar::Scalar;
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Smoothing of the naive Bayes base learner.
    pub alpha: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            n_estimators: 50,
            learning_rate: 0.1,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct BoostEnsemble<F> {
    pub classes: Vec<usize>,
    pub weak_models: Vec<NbModel<F>>,
    pub alphas: Vec<F>,
    pub learning_rate: f64,
    pub max_estimators: usize,
    n_features: usize,
}

/// Outcome of one boosting round's reweighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SammeStep<F> {
    pub error: F,
    /// `None` when the round ends boosting (zero error or no better than chance).
    pub alpha: Option<F>,
}

/// Computes the weighted error of a round and, if boosting continues,
/// multiplies the misclassified weights by `exp(alpha)` and renormalizes.
pub fn samme_step<F: Scalar>(
    weights: &mut [F],
    misclassified: &[bool],
    learning_rate: f64,
    n_classes: usize,
) -> SammeStep<F> {
    let total: F = weights.iter().copied().sum();
    let wrong: F = weights
        .iter()
        .zip(misclassified)
        .filter(|(_, &m)| m)
        .map(|(&w, _)| w)
        .sum();
    let error = wrong / total;
    let k = F::of_usize(n_classes);
    if error <= F::zero() || error >= F::one() - F::one() / k {
        return SammeStep { error, alpha: None };
    }
    let alpha =
        F::of(learning_rate) * (((F::one() - error) / error).ln() + (k - F::one()).ln());
    let boost = alpha.exp();
    for (w, &m) in weights.iter_mut().zip(misclassified) {
        if m {
            *w = *w * boost;
        }
    }
    let total: F = weights.iter().copied().sum();
    for w in weights.iter_mut() {
        *w = *w / total;
    }
    SammeStep {
        error,
        alpha: Some(alpha),
    }
}

impl<F: Scalar> BoostEnsemble<F> {
    pub fn fit(xs: &[SparseVector<F>], y: &[usize], params: &AdaBoostParams) -> Result<Self> {
        Self::fit_traced(xs, y, params).map(|(m, _)| m)
    }

    /// Also returns the sample-weight distribution after every reweighting round.
    pub fn fit_traced(
        xs: &[SparseVector<F>],
        y: &[usize],
        params: &AdaBoostParams,
    ) -> Result<(Self, Vec<Vec<F>>)> {
        if params.n_estimators == 0 {
            return Err(Error::InvalidArgument("n_estimators must be >= 1".into()));
        }
        if !(params.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
        }
        let (dim, classes) = check_training(xs, y)?;
        let n = xs.len();
        let mut weights = vec![F::one() / F::of_usize(n); n];
        let mut trace = Vec::new();
        let mut weak_models = Vec::new();
        let mut alphas = Vec::new();
        for _ in 0..params.n_estimators {
            // The distribution is rescaled to mean 1 so smoothing keeps its
            // usual strength relative to the counts.
            let scaled: Vec<F> = weights.iter().map(|&w| w * F::of_usize(n)).collect();
            let nb = NbModel::fit_weighted(xs, y, Some(&scaled), params.alpha)?;
            let missed: Vec<bool> = xs
                .iter()
                .zip(y)
                .map(|(x, &t)| nb.predict_one(x) != t)
                .collect();
            let step = samme_step(&mut weights, &missed, params.learning_rate, classes.len());
            match step.alpha {
                Some(alpha) => {
                    weak_models.push(nb);
                    alphas.push(alpha);
                    trace.push(weights.clone());
                }
                None => {
                    // A perfect round is kept with unit weight; a failing first
                    // round is kept as well so the ensemble is never empty.
                    if step.error <= F::zero() || weak_models.is_empty() {
                        weak_models.push(nb);
                        alphas.push(F::one());
                    }
                    break;
                }
            }
        }
        Ok((
            BoostEnsemble {
                classes,
                weak_models,
                alphas,
                learning_rate: params.learning_rate,
                max_estimators: params.n_estimators,
                n_features: dim,
            },
            trace,
        ))
    }
}

impl<F: Scalar> Classifier<F> for BoostEnsemble<F> {
    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Sum of model weights voting for each class.
    fn scores(&self, x: &SparseVector<F>) -> Vec<F> {
        let mut votes = vec![F::zero(); self.classes.len()];
        for (m, &a) in self.weak_models.iter().zip(&self.alphas) {
            let c = class_position(&self.classes, m.predict_one(x));
            votes[c] = votes[c] + a;
        }
        votes
    }
}

impl<F: Scalar> Learner<F> for AdaBoostParams {
    type Model = BoostEnsemble<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], _seed: u64) -> Result<BoostEnsemble<F>> {
        BoostEnsemble::fit(xs, y, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(v)
    }

    /// Two "x" docs of class 0, one "y" and one "x" of class 1: the first
    /// NB round misclassifies exactly the last item.
    fn quarter_error_data() -> (Vec<SparseVector<f64>>, Vec<usize>) {
        (
            vec![sv(&[1.0, 0.0]), sv(&[1.0, 0.0]), sv(&[0.0, 1.0]), sv(&[1.0, 0.0])],
            vec![0, 0, 1, 1],
        )
    }

    #[test]
    fn samme_update_by_hand() {
        let mut w = vec![0.25f64; 4];
        let step = samme_step(&mut w, &[false, false, true, false], 0.1, 2);
        assert!((step.error - 0.25).abs() < 1e-15);
        // 0.1 * (ln 3 + ln 1)
        let alpha = step.alpha.unwrap();
        assert!((alpha - 0.109_861_228_866_810_97).abs() < 1e-12);
        // e^a / (3 + e^a) and 1 / (3 + e^a)
        let e = alpha.exp();
        assert!((w[2] - e / (3.0 + e)).abs() < 1e-15);
        assert!((w[2] - 0.271_159).abs() < 1e-6);
        assert!((w[0] - 0.242_947).abs() < 1e-6);
    }

    #[test]
    fn first_round_matches_worked_example() {
        let (xs, y) = quarter_error_data();
        let (m, trace) = BoostEnsemble::fit_traced(&xs, &y, &AdaBoostParams::default()).unwrap();
        assert!((m.alphas[0] - 0.1 * 3f64.ln()).abs() < 1e-12);
        assert!((trace[0][3] - 0.271_159).abs() < 1e-6);
        for w in &trace {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(m.alphas.iter().all(|&a| a > 0.0));
        assert!(m.weak_models.len() <= 50);
    }

    #[test]
    fn perfect_first_round_stops() {
        let xs = vec![sv(&[1.0, 0.0]), sv(&[0.0, 1.0])];
        let m = BoostEnsemble::fit(&xs, &[0, 1], &AdaBoostParams::default()).unwrap();
        assert_eq!(m.weak_models.len(), 1);
        assert_eq!(m.predict_one(&xs[1]), 1);
    }

    #[test]
    fn single_class() {
        let xs = vec![sv(&[1.0, 0.0]), sv(&[0.0, 1.0])];
        let m = BoostEnsemble::fit(&xs, &[4, 4], &AdaBoostParams::default()).unwrap();
        assert_eq!(m.predict_one(&sv(&[3.0, 0.0])), 4);
    }
}
