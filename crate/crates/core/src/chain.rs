//! Classifier chains for multilabel prediction.
//!
//! Link `j` is a binary classifier for label `order[j]` that sees the base
//! features plus `j` indicator columns for the labels earlier in the chain:
//! the true labels during training, its predecessors' predictions at
//! inference time.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{check_dims, Classifier, Learner, LearnerSpec, Model};
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::text::SparseVector;

/// Binary N × L matrix over an ordered label universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMatrix {
    labels: Vec<String>,
    n_rows: usize,
    cells: Vec<bool>,
}

impl LabelMatrix {
    pub fn zeros(labels: Vec<String>, n_rows: usize) -> Self {
        let cells = vec![false; labels.len() * n_rows];
        LabelMatrix {
            labels,
            n_rows,
            cells,
        }
    }

    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<bool>>) -> Result<Self> {
        let l = labels.len();
        if let Some(r) = rows.iter().find(|r| r.len() != l) {
            return Err(Error::ShapeMismatch(format!(
                "row has {} cells, universe has {l} labels",
                r.len()
            )));
        }
        Ok(LabelMatrix {
            n_rows: rows.len(),
            cells: rows.into_iter().flatten().collect(),
            labels,
        })
    }

    /// One row per label set; every label must be in `labels`.
    pub fn from_label_sets<'a, R, I>(labels: Vec<String>, rows: R) -> Result<Self>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = &'a str>,
    {
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut cells = Vec::new();
        let mut n_rows = 0;
        for row in rows {
            let mut r = vec![false; labels.len()];
            for l in row {
                let j = index.get(l).ok_or_else(|| {
                    Error::InvalidArgument(format!("label {l:?} not in universe"))
                })?;
                r[*j] = true;
            }
            cells.extend(r);
            n_rows += 1;
        }
        Ok(LabelMatrix {
            labels,
            n_rows,
            cells,
        })
    }

    /// One-hot rows from class indices.
    pub fn one_hot(labels: Vec<String>, classes: &[usize]) -> Result<Self> {
        let l = labels.len();
        let mut m = LabelMatrix::zeros(labels, classes.len());
        for (i, &c) in classes.iter().enumerate() {
            if c >= l {
                return Err(Error::InvalidArgument(format!("class {c} outside {l} labels")));
            }
            m.set(i, c, true);
        }
        Ok(m)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.labels.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let l = self.labels.len();
        self.cells[i * l + j] = v;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        let l = self.labels.len();
        &self.cells[i * l..(i + 1) * l]
    }

    pub fn column(&self, j: usize) -> Vec<bool> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_counts(&self) -> Vec<usize> {
        (0..self.n_labels())
            .map(|j| (0..self.n_rows).filter(|&i| self.get(i, j)).count())
            .collect()
    }

    pub fn row_labels(&self, i: usize) -> Vec<&str> {
        self.row(i)
            .iter()
            .zip(&self.labels)
            .filter(|(on, _)| **on)
            .map(|(_, l)| l.as_str())
            .collect()
    }

    /// Index of the first set cell of each row (`None` for all-zero rows).
    pub fn argmax_rows(&self) -> Vec<Option<usize>> {
        (0..self.n_rows)
            .map(|i| self.row(i).iter().position(|&b| b))
            .collect()
    }

    pub fn complement(&self) -> Self {
        LabelMatrix {
            labels: self.labels.clone(),
            n_rows: self.n_rows,
            cells: self.cells.iter().map(|b| !b).collect(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        LabelMatrix {
            labels: self.labels.clone(),
            n_rows: rows.len(),
            cells: rows.iter().flat_map(|&i| self.row(i).to_vec()).collect(),
        }
    }

    pub fn same_shape(&self, other: &LabelMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::ShapeMismatch("label universes differ".into()));
        }
        if self.n_rows != other.n_rows {
            return Err(Error::ShapeMismatch(format!(
                "{} rows vs {} rows",
                self.n_rows, other.n_rows
            )));
        }
        Ok(())
    }
}

/// Labels ordered by descending frequency in `y`, ties by label name.
pub fn frequency_order(y: &LabelMatrix) -> Vec<usize> {
    let counts = y.column_counts();
    let mut order: Vec<usize> = (0..y.n_labels()).collect();
    order.sort_by(|&a, &b| {
        counts[b]
            .cmp(&counts[a])
            .then_with(|| y.labels()[a].cmp(&y.labels()[b]))
    });
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel<L, M> {
    pub base: L,
    /// Label indices in chain order.
    pub order: Vec<usize>,
    pub links: Vec<M>,
    pub label_universe: Vec<String>,
    pub base_dim: usize,
}

pub type Chain<F> = ChainModel<LearnerSpec, Model<F>>;

impl<L, M> ChainModel<L, M> {
    /// Number of indicator columns appended for the last link.
    pub fn augment_dim(&self) -> usize {
        self.order.len().saturating_sub(1)
    }
}

fn check_order(order: &[usize], n_labels: usize) -> Result<()> {
    let mut seen = vec![false; n_labels];
    if order.len() != n_labels {
        return Err(Error::InvalidArgument(format!(
            "chain order has {} entries for {n_labels} labels",
            order.len()
        )));
    }
    for &j in order {
        if j >= n_labels || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidArgument(format!(
                "chain order {order:?} is not a permutation of 0..{n_labels}"
            )));
        }
    }
    Ok(())
}

/// Training design for link `j`: base features plus the true indicators of
/// `order[..j]`.
pub fn augmented_design<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &LabelMatrix,
    order: &[usize],
    j: usize,
) -> Vec<SparseVector<F>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let flags: Vec<bool> = order[..j].iter().map(|&l| y.get(i, l)).collect();
            x.with_indicators(&flags)
        })
        .collect()
}

fn link_seed(seed: u64, j: usize) -> u64 {
    if j == 0 {
        seed
    } else {
        derive_seed(seed, &format!("link/{j}"))
    }
}

pub fn fit_chain<F, L>(
    base: &L,
    xs: &[SparseVector<F>],
    y: &LabelMatrix,
    order: &[usize],
    seed: u64,
) -> Result<ChainModel<L, L::Model>>
where
    F: Scalar,
    L: Learner<F> + Clone,
{
    if xs.len() != y.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: y.n_rows(),
            found: xs.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::Empty("chain training set".into()));
    }
    check_order(order, y.n_labels())?;
    let base_dim = xs[0].dim();
    check_dims(xs, base_dim)?;
    let links = (0..order.len())
        .map(|j| {
            let design = augmented_design(xs, y, order, j);
            let target: Vec<usize> = (0..y.n_rows()).map(|i| usize::from(y.get(i, order[j]))).collect();
            base.fit(&design, &target, link_seed(seed, j))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainModel {
        base: base.clone(),
        order: order.to_vec(),
        links,
        label_universe: y.labels().to_vec(),
        base_dim,
    })
}

impl<L, M> ChainModel<L, M> {
    /// Per-label decisions for one item, in label-universe order.
    pub fn predict_row<F: Scalar>(&self, x: &SparseVector<F>) -> Vec<bool>
    where
        M: Classifier<F>,
    {
        let mut in_chain = Vec::with_capacity(self.order.len());
        let mut out = vec![false; self.order.len()];
        for (link, &label) in self.links.iter().zip(&self.order) {
            let on = link.predict_one(&x.with_indicators(&in_chain)) == 1;
            in_chain.push(on);
            out[label] = on;
        }
        out
    }
}

pub fn predict_chain<F, L, M>(chain: &ChainModel<L, M>, xs: &[SparseVector<F>]) -> Result<LabelMatrix>
where
    F: Scalar,
    L: Sync,
    M: Classifier<F> + Sync,
{
    check_dims(xs, chain.base_dim)?;
    let rows: Vec<Vec<bool>> = xs.par_iter().map(|x| chain.predict_row(x)).collect();
    LabelMatrix::from_rows(chain.label_universe.clone(), rows)
}
