//! Multinomial naive Bayes with additive smoothing.
//!
//! TF-IDF weights are consumed as fractional counts:
//! `P(t | c) = (count(t, c) + alpha) / (count(c) + alpha * V)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{check_training, class_position, Classifier, Learner};
use crate::scalar::Scalar;
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    pub alpha: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct NbModel<F> {
    pub classes: Vec<usize>,
    pub log_prior: Vec<F>,
    /// `log_likelihood[c][t]`
    pub log_likelihood: Vec<Vec<F>>,
    pub alpha: f64,
}

impl<F: Scalar> NbModel<F> {
    pub fn fit(xs: &[SparseVector<F>], y: &[usize], alpha: f64) -> Result<Self> {
        Self::fit_weighted(xs, y, None, alpha)
    }

    /// Fits with per-sample weights (uniform when `None`).
    pub fn fit_weighted(
        xs: &[SparseVector<F>],
        y: &[usize],
        weights: Option<&[F]>,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
        }
        let (dim, classes) = check_training(xs, y)?;
        if let Some(w) = weights {
            if w.len() != xs.len() {
                return Err(Error::DimensionMismatch {
                    expected: xs.len(),
                    found: w.len(),
                });
            }
        }
        let k = classes.len();
        let mut class_weight = vec![F::zero(); k];
        let mut counts = vec![vec![F::zero(); dim]; k];
        for (i, (x, &label)) in xs.iter().zip(y).enumerate() {
            let c = class_position(&classes, label);
            let w = weights.map_or(F::one(), |w| w[i]);
            class_weight[c] = class_weight[c] + w;
            for (t, v) in x.iter() {
                counts[c][t] = counts[c][t] + w * v;
            }
        }
        let total: F = class_weight.iter().copied().sum();
        let log_prior = class_weight.iter().map(|&w| (w / total).ln()).collect();
        let a = F::of(alpha);
        let log_likelihood = counts
            .into_iter()
            .map(|row| {
                let denom = (row.iter().copied().sum::<F>() + a * F::of_usize(dim)).ln();
                row.into_iter().map(|c| (c + a).ln() - denom).collect()
            })
            .collect();
        Ok(NbModel {
            classes,
            log_prior,
            log_likelihood,
            alpha,
        })
    }
}

impl<F: Scalar> Classifier<F> for NbModel<F> {
    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn n_features(&self) -> usize {
        self.log_likelihood.first().map_or(0, Vec::len)
    }

    /// Joint log-likelihood per class.
    fn scores(&self, x: &SparseVector<F>) -> Vec<F> {
        self.log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(&p, row)| p + x.dot_dense(row))
            .collect()
    }
}

impl<F: Scalar> Learner<F> for NaiveBayesParams {
    type Model = NbModel<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], _seed: u64) -> Result<NbModel<F>> {
        NbModel::fit(xs, y, self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::predict;
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> SparseVector<f64> {
        SparseVector::from_dense(v)
    }

    // vocab {x, y}; class 0 = "x x", class 1 = "y"
    fn worked() -> NbModel<f64> {
        NbModel::fit(&[sv(&[2.0, 0.0]), sv(&[0.0, 1.0])], &[0, 1], 1.0).unwrap()
    }

    #[test]
    fn smoothed_likelihoods_by_hand() {
        let m = worked();
        let p = |c: usize, t: usize| m.log_likelihood[c][t].exp();
        assert!((p(0, 0) - 0.75).abs() < 1e-12);
        assert!((p(0, 1) - 0.25).abs() < 1e-12);
        assert!((p(1, 0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p(1, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.predict_one(&sv(&[1.0, 0.0])), 0);
    }

    #[test]
    fn score_gap_by_hand() {
        let m = worked();
        let s = m.scores(&sv(&[1.0, 0.0]));
        let expected = (0.75f64 * 0.5).ln() - (1.0f64 / 3.0 * 0.5).ln();
        assert!((s[0] - s[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let m: NbModel<f32> = NbModel::fit(
            &[
                SparseVector::from_dense(&[2.0f32, 0.0]),
                SparseVector::from_dense(&[0.0f32, 1.0]),
            ],
            &[0, 1],
            1.0,
        )
        .unwrap();
        assert!((m.log_likelihood[0][0].exp() - 0.75).abs() < 1e-6);
    }

    #[test]
    fn single_class_always_predicted() {
        let m = NbModel::fit(&[sv(&[1.0, 0.0]), sv(&[0.0, 1.0])], &[3, 3], 1.0).unwrap();
        let p = predict(&m, &[sv(&[0.0, 5.0]), sv(&[1.0, 1.0])]).unwrap();
        assert_eq!(p.labels, [3, 3]);
    }

    #[test]
    fn zero_vector_uses_prior() {
        let m = NbModel::fit(
            &[sv(&[1.0, 0.0]), sv(&[1.0, 0.0]), sv(&[0.0, 1.0])],
            &[0, 0, 1],
            1.0,
        )
        .unwrap();
        assert_eq!(m.predict_one(&sv(&[0.0, 0.0])), 0);
        let s = m.scores(&sv(&[0.0, 0.0]));
        assert_eq!(s, m.log_prior);
    }

    #[test]
    fn errors() {
        assert!(NbModel::<f64>::fit(&[], &[], 1.0).is_err());
        assert!(NbModel::fit(&[sv(&[1.0])], &[0, 1], 1.0).is_err());
        assert!(NbModel::fit(&[sv(&[1.0]), sv(&[1.0, 2.0])], &[0, 1], 1.0).is_err());
        assert!(NbModel::fit(&[sv(&[1.0])], &[0], 0.0).is_err());
        let m = worked();
        assert!(predict(&m, &[sv(&[1.0, 0.0, 0.0])]).is_err());
        assert!(predict(&m, &[]).unwrap().labels.is_empty());
    }

    proptest! {
        #[test]
        fn rows_and_priors_are_distributions(
            rows in prop::collection::vec((prop::collection::vec(0.0f64..3.0, 4), 0usize..3), 1..30),
            alpha in 0.01f64..5.0,
        ) {
            let xs: Vec<_> = rows.iter().map(|(v, _)| sv(v)).collect();
            let y: Vec<_> = rows.iter().map(|r| r.1).collect();
            let m = NbModel::fit(&xs, &y, alpha).unwrap();
            for row in &m.log_likelihood {
                let s: f64 = row.iter().map(|v| v.exp()).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
            let s: f64 = m.log_prior.iter().map(|v| v.exp()).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            for x in &xs {
                let sc = m.scores(x);
                let shifted: Vec<f64> = sc.iter().map(|v| v + 17.5).collect();
                prop_assert_eq!(crate::scalar::argmax(&sc), crate::scalar::argmax(&shifted));
            }
        }
    }
}
