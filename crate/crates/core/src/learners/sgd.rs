//! Linear SVM trained by per-sample subgradient descent on the
//! L2-regularized hinge loss, with the "optimal" learning-rate schedule
//! `eta_t = 1 / (lambda * (t0 + t))`.
//!
//! `t0 = 1 / (eta0 * lambda)` where `eta0 = lambda^(-1/4)`: the typical
//! weight magnitude `sqrt(1 / sqrt(lambda))` divided by the hinge
//! subgradient at that magnitude, which is 1.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::linear::{LinearKind, LinearModel};
use crate::learners::{check_training, Learner};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, rng_from_seed};
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdParams {
    pub epochs: usize,
    pub lambda: f64,
    /// Scale applied to intercept updates.
    pub intercept_decay: f64,
}

impl Default for SgdParams {
    fn default() -> Self {
        SgdParams {
            epochs: 1000,
            lambda: 1e-4,
            intercept_decay: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalSchedule {
    pub lambda: f64,
    pub t0: f64,
}

impl OptimalSchedule {
    pub fn new(lambda: f64) -> Self {
        let typical_w = (1.0 / lambda.sqrt()).sqrt();
        // divided by max(1, |hinge subgradient|), which is 1 here
        let eta0 = typical_w;
        OptimalSchedule {
            lambda,
            t0: 1.0 / (eta0 * lambda),
        }
    }

    pub fn with_t0(lambda: f64, t0: f64) -> Self {
        OptimalSchedule { lambda, t0 }
    }

    /// Learning rate for the update with zero-based index `t`.
    pub fn eta(&self, t: u64) -> f64 {
        1.0 / (self.lambda * (self.t0 + t as f64))
    }
}

/// Trains one binary hinge model; `positive[i]` marks the +1 samples.
fn train_binary<F: Scalar>(
    xs: &[SparseVector<F>],
    positive: &[bool],
    dim: usize,
    params: &SgdParams,
    seed: u64,
) -> (Vec<F>, F) {
    let schedule = OptimalSchedule::new(params.lambda);
    let lambda = F::of(params.lambda);
    let decay = F::of(params.intercept_decay);
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    // w = scale * v
    let mut v = vec![F::zero(); dim];
    let mut scale = F::one();
    let mut bias = F::zero();
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = F::of(schedule.eta(t));
            let y = if positive[i] { F::one() } else { -F::one() };
            let p = scale * xs[i].dot_dense(&v) + bias;
            let violated = y * p < F::one();
            let shrink = (F::one() - eta * lambda).max(F::zero());
            if shrink.is_zero() {
                v.iter_mut().for_each(|w| *w = F::zero());
                scale = F::one();
            } else {
                scale = scale * shrink;
            }
            if violated {
                let step = eta * y / scale;
                for (j, xv) in xs[i].iter() {
                    v[j] = v[j] + step * xv;
                }
                bias = bias + eta * y * decay;
            }
            if scale < F::of(1e-9) {
                v.iter_mut().for_each(|w| *w = *w * scale);
                scale = F::one();
            }
            t += 1;
        }
    }
    (v.into_iter().map(|w| w * scale).collect(), bias)
}

pub fn train_sgd_svm<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    params: &SgdParams,
    seed: u64,
) -> Result<LinearModel<F>> {
    if !(params.lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be > 0".into()));
    }
    let (dim, classes) = check_training(xs, y)?;
    if classes.len() == 1 {
        return Ok(LinearModel::constant(LinearKind::HingeSgd, classes[0], dim, params.lambda));
    }
    let targets: Vec<usize> = if classes.len() == 2 {
        vec![classes[1]]
    } else {
        classes.clone()
    };
    let (weights, bias) = targets
        .iter()
        .map(|&c| {
            let positive: Vec<bool> = y.iter().map(|&l| l == c).collect();
            train_binary(xs, &positive, dim, params, derive_seed(seed, &format!("ovr/{c}")))
        })
        .unzip();
    Ok(LinearModel {
        kind: LinearKind::HingeSgd,
        classes,
        weights,
        bias,
        lambda: params.lambda,
        n_features: dim,
        iterations: params.epochs,
        converged: true,
    })
}

impl<F: Scalar> Learner<F> for SgdParams {
    type Model = LinearModel<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], seed: u64) -> Result<LinearModel<F>> {
        train_sgd_svm(xs, y, self, seed)
    }
}
