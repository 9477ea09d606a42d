use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse real vector with sorted, unique indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct SparseVector<F> {
    indices: Vec<usize>,
    values: Vec<F>,
    dim: usize,
}

impl<F: Scalar> SparseVector<F> {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    /// Builds a vector from `(index, value)` pairs in any order; duplicate
    /// indices are summed and zeros dropped.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(usize, F)>) -> Result<Self> {
        if let Some(&(i, _)) = pairs.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: i + 1,
            });
        }
        pairs.sort_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<F> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                let last = values.last_mut().expect("paired with index");
                *last = *last + v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector {
            indices,
            values,
            dim,
        };
        out.drop_zeros();
        Ok(out)
    }

    /// Dense slice to sparse.
    pub fn from_dense(dense: &[F]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, &v)| (i, v))
            .unzip();
        SparseVector {
            indices,
            values,
            dim: dense.len(),
        }
    }

    fn drop_zeros(&mut self) {
        let mut k = 0;
        for j in 0..self.indices.len() {
            if !self.values[j].is_zero() {
                self.indices[k] = self.indices[j];
                self.values[k] = self.values[j];
                k += 1;
            }
        }
        self.indices.truncate(k);
        self.values.truncate(k);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, F)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> F {
        match self.indices.binary_search(&index) {
            Ok(j) => self.values[j],
            Err(_) => F::zero(),
        }
    }

    pub fn norm(&self) -> F {
        self.values.iter().map(|&v| v * v).sum::<F>().sqrt()
    }

    /// Scales to unit Euclidean norm; the zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > F::zero() {
            for v in &mut self.values {
                *v = *v / n;
            }
        }
        self.drop_zeros();
        self
    }

    pub fn dot_dense(&self, dense: &[F]) -> F {
        self.iter().fold(F::zero(), |acc, (i, v)| acc + v * dense[i])
    }

    pub fn to_dense(&self) -> Vec<F> {
        let mut d = vec![F::zero(); self.dim];
        for (i, v) in self.iter() {
            d[i] = v;
        }
        d
    }

    /// Appends binary indicator features at columns `dim .. dim + flags.len()`.
    pub fn with_indicators(&self, flags: &[bool]) -> Self {
        let mut out = self.clone();
        for (j, &on) in flags.iter().enumerate() {
            if on {
                out.indices.push(self.dim + j);
                out.values.push(F::one());
            }
        }
        out.dim = self.dim + flags.len();
        out
    }
}
