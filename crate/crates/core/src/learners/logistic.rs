//! Multinomial logistic regression with an L2 penalty on the weights.
//!
//! Minimizes `mean NLL + (lambda / 2) * ||W||^2` (intercepts unpenalized) by
//! full-batch proximal gradient descent: a gradient step on the data term,
//! then the closed-form shrink `W / (1 + step * lambda)` for the penalty,
//! with a backtracking line search on the step. The objective never
//! increases between accepted iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::linear::{LinearKind, LinearModel};
use crate::learners::{check_training, class_position, Learner};
use crate::scalar::Scalar;
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm of the full objective is at most this.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            lambda: 1e-4,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

const MIN_STEP: f64 = 1e-12;

/// The training objective over a flat parameter vector laid out as
/// `K * d` row-major weights followed by `K` intercepts.
pub struct LogisticObjective<'a, F> {
    xs: &'a [SparseVector<F>],
    /// Class position of each sample.
    targets: Vec<usize>,
    n_classes: usize,
    dim: usize,
    lambda: F,
}

impl<'a, F: Scalar> LogisticObjective<'a, F> {
    /// `targets` are class positions in `0..n_classes`.
    pub fn new(xs: &'a [SparseVector<F>], targets: Vec<usize>, n_classes: usize, lambda: f64) -> Self {
        let dim = xs.first().map_or(0, SparseVector::dim);
        LogisticObjective {
            xs,
            targets,
            n_classes,
            dim,
            lambda: F::of(lambda),
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_classes * (self.dim + 1)
    }

    fn logits(&self, params: &[F], x: &SparseVector<F>) -> Vec<F> {
        let bias = &params[self.n_classes * self.dim..];
        (0..self.n_classes)
            .map(|k| x.dot_dense(&params[k * self.dim..(k + 1) * self.dim]) + bias[k])
            .collect()
    }

    fn log_sum_exp(z: &[F]) -> F {
        let m = z.iter().copied().fold(F::neg_infinity(), F::max);
        m + z.iter().map(|&v| (v - m).exp()).sum::<F>().ln()
    }

    fn penalty(&self, params: &[F]) -> F {
        let w = &params[..self.n_classes * self.dim];
        self.lambda / F::of(2.0) * w.iter().map(|&v| v * v).sum::<F>()
    }

    /// Mean negative log-likelihood only.
    pub fn data_loss(&self, params: &[F]) -> F {
        let n = F::of_usize(self.xs.len());
        self.xs
            .iter()
            .zip(&self.targets)
            .map(|(x, &t)| {
                let z = self.logits(params, x);
                Self::log_sum_exp(&z) - z[t]
            })
            .sum::<F>()
            / n
    }

    pub fn value(&self, params: &[F]) -> F {
        self.data_loss(params) + self.penalty(params)
    }

    /// Data loss and its gradient.
    fn data_loss_grad(&self, params: &[F]) -> (F, Vec<F>) {
        let n = F::of_usize(self.xs.len());
        let mut grad = vec![F::zero(); self.n_params()];
        let mut loss = F::zero();
        let bias_at = self.n_classes * self.dim;
        for (x, &t) in self.xs.iter().zip(&self.targets) {
            let z = self.logits(params, x);
            let lse = Self::log_sum_exp(&z);
            loss = loss + lse - z[t];
            for k in 0..self.n_classes {
                let mut r = (z[k] - lse).exp();
                if k == t {
                    r = r - F::one();
                }
                let r = r / n;
                let row = &mut grad[k * self.dim..(k + 1) * self.dim];
                for (j, v) in x.iter() {
                    row[j] = row[j] + r * v;
                }
                grad[bias_at + k] = grad[bias_at + k] + r;
            }
        }
        (loss / n, grad)
    }

    /// Gradient of the full (penalized) objective.
    pub fn gradient(&self, params: &[F]) -> Vec<F> {
        self.value_and_gradient(params).1
    }

    pub fn value_and_gradient(&self, params: &[F]) -> (F, Vec<F>) {
        let (loss, mut grad) = self.data_loss_grad(params);
        let k_dim = self.n_classes * self.dim;
        for (g, &w) in grad[..k_dim].iter_mut().zip(&params[..k_dim]) {
            *g = *g + self.lambda * w;
        }
        (loss + self.penalty(params), grad)
    }

    fn full_gradient_norm(&self, params: &[F], data_grad: &[F]) -> F {
        let k_dim = self.n_classes * self.dim;
        data_grad
            .iter()
            .zip(params)
            .enumerate()
            .map(|(i, (&g, &p))| if i < k_dim { g + self.lambda * p } else { g })
            .map(|g| g * g)
            .sum::<F>()
            .sqrt()
    }

    fn prox_step(&self, params: &[F], data_grad: &[F], step: F) -> Vec<F> {
        let k_dim = self.n_classes * self.dim;
        let shrink = F::one() / (F::one() + step * self.lambda);
        params
            .iter()
            .zip(data_grad)
            .enumerate()
            .map(|(i, (&p, &g))| {
                let moved = p - step * g;
                if i < k_dim { moved * shrink } else { moved }
            })
            .collect()
    }
}

/// Trained model plus the objective value after every accepted iteration
/// (the first entry is the value at the zero initialization).
pub fn train_logreg_traced<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    params: &LogRegParams,
) -> Result<(LinearModel<F>, Vec<F>)> {
    if !(params.lambda >= 0.0) || !(params.tol >= 0.0) {
        return Err(Error::InvalidArgument("lambda and tol must be >= 0".into()));
    }
    let (dim, classes) = check_training(xs, y)?;
    if classes.len() == 1 {
        let m = LinearModel::constant(LinearKind::Logistic, classes[0], dim, params.lambda);
        return Ok((m, Vec::new()));
    }
    let k = classes.len();
    let targets = y.iter().map(|&c| class_position(&classes, c)).collect();
    let obj = LogisticObjective::new(xs, targets, k, params.lambda);
    let mut theta = vec![F::zero(); obj.n_params()];
    let (mut smooth, mut data_grad) = obj.data_loss_grad(&theta);
    let mut value = smooth + obj.penalty(&theta);
    let mut trace = vec![value];
    let mut step = F::one();
    let mut iterations = 0;
    let mut converged = false;
    let tol = F::of(params.tol);
    let half = F::of(0.5);
    while iterations < params.max_iter {
        if obj.full_gradient_norm(&theta, &data_grad) <= tol {
            converged = true;
            break;
        }
        let (candidate, cand_smooth) = loop {
            let cand = obj.prox_step(&theta, &data_grad, step);
            let diff: Vec<F> = cand.iter().zip(&theta).map(|(&a, &b)| a - b).collect();
            let cand_smooth = obj.data_loss(&cand);
            let model = smooth
                + diff.iter().zip(&data_grad).map(|(&d, &g)| d * g).sum::<F>()
                + diff.iter().map(|&d| d * d).sum::<F>() / (F::of(2.0) * step);
            if cand_smooth <= model {
                break (cand, cand_smooth);
            }
            step = step * half;
            if step < F::of(MIN_STEP) {
                if cand_smooth + obj.penalty(&cand) <= value {
                    break (cand, cand_smooth);
                }
                return Err(Error::StepFailure {
                    iteration: iterations,
                });
            }
        };
        let new_value = cand_smooth + obj.penalty(&candidate);
        if new_value > value {
            return Err(Error::StepFailure {
                iteration: iterations,
            });
        }
        theta = candidate;
        let (s, g) = obj.data_loss_grad(&theta);
        smooth = s;
        data_grad = g;
        value = new_value;
        trace.push(value);
        iterations += 1;
        step = step * F::of(2.0);
    }
    if !converged {
        converged = obj.full_gradient_norm(&theta, &data_grad) <= tol;
    }
    let weights = (0..k).map(|c| theta[c * dim..(c + 1) * dim].to_vec()).collect();
    let bias = theta[k * dim..].to_vec();
    Ok((
        LinearModel {
            kind: LinearKind::Logistic,
            classes,
            weights,
            bias,
            lambda: params.lambda,
            n_features: dim,
            iterations,
            converged,
        },
        trace,
    ))
}

pub fn train_logreg<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    params: &LogRegParams,
) -> Result<LinearModel<F>> {
    train_logreg_traced(xs, y, params).map(|(m, _)| m)
}

impl<F: Scalar> Learner<F> for LogRegParams {
    type Model = LinearModel<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], _seed: u64) -> Result<LinearModel<F>> {
        train_logreg(xs, y, self)
    }
}
