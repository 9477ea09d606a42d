//! Random forest of Gini-impurity decision trees on sparse features.
//!
//! Each tree sees a bootstrap sample (kept as per-sample multiplicities) and
//! draws its randomness from a seed derived from `(forest seed, tree index)`,
//! so trees can be grown in parallel without changing the result.
//!
//! Split search at a node only looks at features that are nonzero for at
//! least one sample in the node: every other feature is constant there and
//! cannot split. Candidates are drawn in random order until
//! `features_per_split` non-constant ones have been evaluated.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{check_training, class_position, Classifier, Learner};
use crate::scalar::{argmax, Scalar};
use crate::seed::{derive_seed, rng_from_seed};
use crate::text::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub enum Node<F> {
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: F,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Weighted class histogram aligned with the forest's classes.
        counts: Vec<F>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Tree<F> {
    pub nodes: Vec<Node<F>>,
}

impl<F: Scalar> Tree<F> {
    pub fn leaf_counts(&self, x: &SparseVector<F>) -> &[F] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x.get(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    /// Class position (not id) chosen by this tree.
    pub fn vote(&self, x: &SparseVector<F>) -> usize {
        argmax(self.leaf_counts(x)).unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        fn walk<F>(nodes: &[Node<F>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Forest<F> {
    pub classes: Vec<usize>,
    pub trees: Vec<Tree<F>>,
    pub features_per_split: usize,
    pub seed: u64,
    pub params: ForestParams,
    n_features: usize,
}

/// Gini impurity `1 - sum p_k^2` of a (weighted) class histogram.
pub fn gini<F: Scalar>(counts: &[F]) -> F {
    let total: F = counts.iter().copied().sum();
    if total <= F::zero() {
        return F::zero();
    }
    F::one() - counts.iter().map(|&c| (c / total) * (c / total)).sum::<F>()
}

struct TrainSet<'a, F> {
    rows: &'a [SparseVector<F>],
    /// Column-major copy: `(sample, value)` per feature.
    columns: Vec<Vec<(usize, F)>>,
    classes: Vec<usize>,
    n_classes: usize,
}

struct Builder<'a, 'b, F, R> {
    data: &'b TrainSet<'a, F>,
    weight: Vec<F>,
    rng: R,
    mtry: usize,
    params: ForestParams,
    feature_stamp: Vec<u32>,
    sample_stamp: Vec<u32>,
    stamp: u32,
    nodes: Vec<Node<F>>,
}

struct BestSplit<F> {
    feature: usize,
    threshold: F,
    proxy: F,
}

impl<'a, 'b, F: Scalar, R: Rng> Builder<'a, 'b, F, R> {
    fn class_counts(&self, samples: &[usize]) -> Vec<F> {
        let mut counts = vec![F::zero(); self.data.n_classes];
        for &s in samples {
            counts[self.data.classes[s]] = counts[self.data.classes[s]] + self.weight[s];
        }
        counts
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.feature_stamp.iter_mut().for_each(|v| *v = 0);
            self.sample_stamp.iter_mut().for_each(|v| *v = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    fn grow(mut self, samples: &mut [usize]) -> Tree<F> {
        // (node slot, range start, range end, depth)
        let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        while let Some((slot, start, end, depth)) = stack.pop() {
            let range = &mut samples[start..end];
            let counts = self.class_counts(range);
            let pure = counts.iter().filter(|c| **c > F::zero()).count() <= 1;
            let too_small = range.len() < self.params.min_samples_split;
            let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || too_small || too_deep {
                None
            } else {
                self.best_split(range, &counts)
            };
            let Some(split) = split else {
                self.nodes[slot] = Node::Leaf { counts };
                continue;
            };
            let mut mid = 0;
            for j in 0..range.len() {
                if self.data.rows[range[j]].get(split.feature) <= split.threshold {
                    range.swap(mid, j);
                    mid += 1;
                }
            }
            let left = self.nodes.len();
            let right = left + 1;
            self.nodes.push(Node::Leaf { counts: Vec::new() });
            self.nodes.push(Node::Leaf { counts: Vec::new() });
            self.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, start + mid, end, depth + 1));
            stack.push((left, start, start + mid, depth + 1));
        }
        Tree { nodes: self.nodes }
    }

    fn best_split(&mut self, samples: &[usize], counts: &[F]) -> Option<BestSplit<F>> {
        let stamp = self.next_stamp();
        let mut candidates = Vec::new();
        for &s in samples {
            self.sample_stamp[s] = stamp;
            for &f in self.data.rows[s].indices() {
                if self.feature_stamp[f] != stamp {
                    self.feature_stamp[f] = stamp;
                    candidates.push(f);
                }
            }
        }
        let total: F = counts.iter().copied().sum();
        let mut best: Option<BestSplit<F>> = None;
        let mut visited = 0;
        let mut remaining = candidates.len();
        while visited < self.mtry && remaining > 0 {
            let pick = self.rng.gen_range(0..remaining);
            remaining -= 1;
            candidates.swap(pick, remaining);
            let feature = candidates[remaining];
            if let Some(split) = self.split_on(feature, samples, counts, total, stamp) {
                visited += 1;
                if best.as_ref().is_none_or(|b| split.proxy > b.proxy) {
                    best = Some(split);
                }
            }
        }
        best
    }

    /// Best threshold for one feature, or `None` if the feature is constant
    /// in the node. The proxy `sum_k L_k^2 / |L| + sum_k R_k^2 / |R|` is
    /// maximal exactly where the weighted child Gini impurity is minimal.
    fn split_on(
        &self,
        feature: usize,
        samples: &[usize],
        counts: &[F],
        total: F,
        stamp: u32,
    ) -> Option<BestSplit<F>> {
        let column = &self.data.columns[feature];
        let mut nonzero: Vec<(F, usize, F)> = if column.len() < samples.len() * 4 {
            column
                .iter()
                .filter(|(s, _)| self.sample_stamp[*s] == stamp)
                .map(|&(s, v)| (v, self.data.classes[s], self.weight[s]))
                .collect()
        } else {
            samples
                .iter()
                .filter_map(|&s| {
                    let v = self.data.rows[s].get(feature);
                    (!v.is_zero()).then(|| (v, self.data.classes[s], self.weight[s]))
                })
                .collect()
        };
        let n_zero = samples.len() - nonzero.len();
        nonzero.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut zero_counts = counts.to_vec();
        for &(_, c, w) in &nonzero {
            zero_counts[c] = zero_counts[c] - w;
        }
        // Groups of equal value in ascending order: negatives, zeros, positives.
        let split_at = nonzero.partition_point(|e| e.0 < F::zero());
        let mut groups: Vec<(F, Vec<F>)> = Vec::new();
        let push = |v: F, c: usize, w: F, groups: &mut Vec<(F, Vec<F>)>| {
            if groups.last().is_none_or(|g| g.0 != v) {
                groups.push((v, vec![F::zero(); counts.len()]));
            }
            let g = groups.last_mut().expect("just pushed");
            g.1[c] = g.1[c] + w;
        };
        for &(v, c, w) in &nonzero[..split_at] {
            push(v, c, w, &mut groups);
        }
        if n_zero > 0 {
            groups.push((F::zero(), zero_counts));
        }
        for &(v, c, w) in &nonzero[split_at..] {
            push(v, c, w, &mut groups);
        }
        if groups.len() < 2 {
            return None;
        }
        let mut left = vec![F::zero(); counts.len()];
        let mut left_total = F::zero();
        let mut best: Option<(F, usize)> = None;
        for g in 0..groups.len() - 1 {
            for (l, &c) in left.iter_mut().zip(&groups[g].1) {
                *l = *l + c;
                left_total = left_total + c;
            }
            let right_total = total - left_total;
            if left_total <= F::zero() || right_total <= F::zero() {
                continue;
            }
            let sq_left: F = left.iter().map(|&c| c * c).sum();
            let sq_right: F = left
                .iter()
                .zip(counts)
                .map(|(&l, &c)| (c - l) * (c - l))
                .sum();
            let proxy = sq_left / left_total + sq_right / right_total;
            if best.is_none_or(|(p, _)| proxy > p) {
                best = Some((proxy, g));
            }
        }
        let (proxy, g) = best?;
        let (lo, hi) = (groups[g].0, groups[g + 1].0);
        let mut threshold = (lo + hi) / F::of(2.0);
        if threshold >= hi || !threshold.is_finite() {
            threshold = lo;
        }
        Some(BestSplit {
            feature,
            threshold,
            proxy,
        })
    }
}

impl<F: Scalar> Forest<F> {
    pub fn fit(xs: &[SparseVector<F>], y: &[usize], params: &ForestParams, seed: u64) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be >= 1".into()));
        }
        let (dim, classes) = check_training(xs, y)?;
        let mtry = params
            .max_features
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .max(1);
        let mut columns: Vec<Vec<(usize, F)>> = vec![Vec::new(); dim];
        for (s, x) in xs.iter().enumerate() {
            for (f, v) in x.iter() {
                columns[f].push((s, v));
            }
        }
        let data = TrainSet {
            rows: xs,
            columns,
            classes: y.iter().map(|&c| class_position(&classes, c)).collect(),
            n_classes: classes.len(),
        };
        let n = xs.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(seed, &format!("tree/{t}")));
                let mut weight = vec![F::zero(); n];
                if params.bootstrap {
                    for _ in 0..n {
                        let s = rng.gen_range(0..n);
                        weight[s] = weight[s] + F::one();
                    }
                } else {
                    weight.iter_mut().for_each(|w| *w = F::one());
                }
                let mut samples: Vec<usize> = (0..n).filter(|&s| weight[s] > F::zero()).collect();
                Builder {
                    data: &data,
                    weight,
                    rng,
                    mtry,
                    params: *params,
                    feature_stamp: vec![0; dim],
                    sample_stamp: vec![0; n],
                    stamp: 0,
                    nodes: Vec::new(),
                }
                .grow(&mut samples)
            })
            .collect();
        Ok(Forest {
            classes,
            trees,
            features_per_split: mtry,
            seed,
            params: *params,
            n_features: dim,
        })
    }
}

impl<F: Scalar> Classifier<F> for Forest<F> {
    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of trees voting for each class.
    fn scores(&self, x: &SparseVector<F>) -> Vec<F> {
        let mut votes = vec![F::zero(); self.classes.len()];
        for t in &self.trees {
            let c = t.vote(x);
            votes[c] = votes[c] + F::one();
        }
        votes
    }
}

impl<F: Scalar> Learner<F> for ForestParams {
    type Model = Forest<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], seed: u64) -> Result<Forest<F>> {
        Forest::fit(xs, y, self, seed)
    }
}
