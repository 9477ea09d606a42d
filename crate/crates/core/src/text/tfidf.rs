//! TF-IDF with raw term counts, smooth idf `ln((1 + n) / (1 + df)) + 1`
//! and L2-normalized output vectors.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fsio::write_atomic;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::text::sparse::SparseVector;
use crate::text::tokenize::TokenList;

pub const DEFAULT_MAX_VOCAB: usize = 3034;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar", from = "VocabRepr<F>", into = "VocabRepr<F>")]
pub struct Vocabulary<F> {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<F>,
    n_docs: usize,
    max_size: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct VocabRepr<F> {
    terms: Vec<String>,
    idf: Vec<F>,
    n_docs: usize,
    max_size: usize,
}

impl<F: Scalar> From<VocabRepr<F>> for Vocabulary<F> {
    fn from(r: VocabRepr<F>) -> Self {
        Vocabulary::from_parts(r.terms, r.idf, r.n_docs, r.max_size)
    }
}

impl<F: Scalar> From<Vocabulary<F>> for VocabRepr<F> {
    fn from(v: Vocabulary<F>) -> Self {
        VocabRepr {
            terms: v.terms,
            idf: v.idf,
            n_docs: v.n_docs,
            max_size: v.max_size,
        }
    }
}

/// Document frequency of every term in `docs`.
pub fn document_frequencies(docs: &[TokenList]) -> HashMap<&str, usize> {
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens().iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    df
}

impl<F: Scalar> Vocabulary<F> {
    fn from_parts(terms: Vec<String>, idf: Vec<F>, n_docs: usize, max_size: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms,
            index,
            idf,
            n_docs,
            max_size,
        }
    }

    /// Keeps the `max_vocab` terms with the highest document frequency
    /// (ties broken lexicographically) and computes their smooth idf.
    pub fn fit(docs: &[TokenList], max_vocab: usize) -> Result<Self> {
        if max_vocab == 0 {
            return Err(Error::InvalidArgument("max_vocab must be positive".into()));
        }
        let df = document_frequencies(docs);
        if df.is_empty() {
            return Err(Error::Empty("no terms in training documents".into()));
        }
        let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_vocab);
        let n = docs.len();
        let idf = ranked
            .iter()
            .map(|&(_, d)| {
                (F::of_usize(1 + n) / F::of_usize(1 + d)).ln() + F::one()
            })
            .collect();
        let terms = ranked.into_iter().map(|(t, _)| t.to_string()).collect();
        Ok(Self::from_parts(terms, idf, n, max_vocab))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<F> {
        self.index_of(term).map(|i| self.idf[i])
    }

    pub fn idf_values(&self) -> &[F] {
        &self.idf
    }

    /// Count × idf for in-vocabulary terms, L2-normalized.
    pub fn transform(&self, doc: &TokenList) -> SparseVector<F> {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for t in doc.tokens() {
            if let Some(i) = self.index_of(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let pairs = counts
            .into_iter()
            .map(|(i, c)| (i, F::of_usize(c) * self.idf[i]))
            .collect();
        SparseVector::from_pairs(self.len(), pairs)
            .expect("indices come from the vocabulary")
            .normalized()
    }

    pub fn transform_all(&self, docs: &[TokenList]) -> Vec<SparseVector<F>> {
        docs.iter().map(|d| self.transform(d)).collect()
    }

    /// `term<TAB>idf` lines in index order after a `# n_docs=.. max_vocab=..` header.
    pub fn to_tsv(&self) -> String {
        let mut s = format!("# n_docs={} max_vocab={}\n", self.n_docs, self.max_size);
        for (t, v) in self.terms.iter().zip(&self.idf) {
            let _ = writeln!(s, "{t}\t{}", v.as_f64());
        }
        s
    }

    pub fn from_tsv(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Empty("vocabulary file".into()))?;
        let bad_header = || Error::Parse {
            line: 1,
            message: format!("bad vocabulary header {header:?}"),
        };
        let mut n_docs = None;
        let mut max_vocab = None;
        for field in header.strip_prefix('#').ok_or_else(bad_header)?.split_whitespace() {
            match field.split_once('=') {
                Some(("n_docs", v)) => n_docs = v.parse().ok(),
                Some(("max_vocab", v)) => max_vocab = v.parse().ok(),
                _ => return Err(bad_header()),
            }
        }
        let mut terms = Vec::new();
        let mut idf = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .split_once('\t')
                .and_then(|(t, v)| Some((t, v.parse::<f64>().ok()?)));
            let (t, v) = parsed.ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected term<TAB>idf, got {line:?}"),
            })?;
            terms.push(t.to_string());
            idf.push(F::of(v));
        }
        Ok(Self::from_parts(
            terms,
            idf,
            n_docs.ok_or_else(bad_header)?,
            max_vocab.ok_or_else(bad_header)?,
        ))
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_tsv().as_bytes())
    }

    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

pub fn fit_tfidf<F: Scalar>(train_docs: &[TokenList], max_vocab: usize) -> Result<Vocabulary<F>> {
    Vocabulary::fit(train_docs, max_vocab)
}

pub fn transform_tfidf<F: Scalar>(vocab: &Vocabulary<F>, doc: &TokenList) -> SparseVector<F> {
    vocab.transform(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(words: &[&str]) -> TokenList {
        TokenList(words.iter().map(|s| s.to_string()).collect())
    }

    fn two_docs() -> Vec<TokenList> {
        vec![doc(&["cat", "sat"]), doc(&["cat", "ran"])]
    }

    #[test]
    fn smooth_idf_by_hand() {
        let v: Vocabulary<f64> = Vocabulary::fit(&two_docs(), 10).unwrap();
        assert_eq!(v.terms(), ["cat", "ran", "sat"]);
        assert!((v.idf("cat").unwrap() - 1.0).abs() < 1e-12);
        // ln(3/2) + 1
        for t in ["sat", "ran"] {
            assert!((v.idf(t).unwrap() - 1.405_465_108_108_164_4).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_keeps_highest_df() {
        let v: Vocabulary<f64> = Vocabulary::fit(&two_docs(), 1).unwrap();
        assert_eq!(v.terms(), ["cat"]);
    }

    #[test]
    fn empty_documents_fail() {
        assert!(Vocabulary::<f64>::fit(&[doc(&[])], 10).is_err());
        assert!(Vocabulary::<f64>::fit(&[], 10).is_err());
    }

    #[test]
    fn transform_by_hand() {
        let v: Vocabulary<f64> = Vocabulary::fit(&two_docs(), 10).unwrap();
        let x = v.transform(&doc(&["cat", "sat"]));
        // (1, 1.405465) / |(1, 1.405465)|
        assert!((x.get(v.index_of("cat").unwrap()) - 0.579_738_671_537_665_7).abs() < 1e-9);
        assert!((x.get(v.index_of("sat").unwrap()) - 0.814_802_474_667_168_9).abs() < 1e-9);
        assert_eq!(x.nnz(), 2);
    }

    #[test]
    fn out_of_vocabulary_gives_zero_vector() {
        let v: Vocabulary<f64> = Vocabulary::fit(&two_docs(), 10).unwrap();
        let x = v.transform(&doc(&["dog", "bird"]));
        assert!(x.is_zero());
        assert_eq!(x.dim(), 3);
    }

    #[test]
    fn repeated_term_is_unit() {
        let v: Vocabulary<f32> = Vocabulary::fit(&two_docs(), 10).unwrap();
        let x = v.transform(&doc(&["cat", "cat"]));
        assert_eq!(x.nnz(), 1);
        assert!((x.values()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tsv_round_trip() {
        let v: Vocabulary<f64> = Vocabulary::fit(&two_docs(), 10).unwrap();
        let back = Vocabulary::<f64>::from_tsv(&v.to_tsv()).unwrap();
        assert_eq!(back, v);
        assert!(v.to_tsv().starts_with("# n_docs=2 max_vocab=10\ncat\t1\n"));
    }

    fn docs_strategy() -> impl Strategy<Value = Vec<TokenList>> {
        let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h"]);
        prop::collection::vec(prop::collection::vec(word, 0..10), 1..20).prop_map(|ds| {
            ds.into_iter()
                .map(|d| TokenList(d.into_iter().map(String::from).collect()))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn unit_norm_and_df_consistency(docs in docs_strategy(), max_vocab in 1usize..10) {
            prop_assume!(docs.iter().any(|d| !d.is_empty()));
            let v: Vocabulary<f64> = Vocabulary::fit(&docs, max_vocab).unwrap();
            prop_assert!(v.len() <= max_vocab);
            let xs = v.transform_all(&docs);
            let mut col_df = vec![0usize; v.len()];
            for x in &xs {
                if !x.is_zero() {
                    prop_assert!((x.norm() - 1.0).abs() <= 1e-9);
                }
                for (i, _) in x.iter() {
                    col_df[i] += 1;
                }
            }
            let df = document_frequencies(&docs);
            for (i, t) in v.terms().iter().enumerate() {
                prop_assert_eq!(col_df[i], df[t.as_str()]);
                prop_assert!(v.idf_values()[i] >= 1.0);
            }
        }

        #[test]
        fn smaller_cap_is_prefix(docs in docs_strategy(), small in 1usize..5, extra in 0usize..5) {
            prop_assume!(docs.iter().any(|d| !d.is_empty()));
            let a: Vocabulary<f64> = Vocabulary::fit(&docs, small).unwrap();
            let b: Vocabulary<f64> = Vocabulary::fit(&docs, small + extra).unwrap();
            prop_assert_eq!(a.terms(), &b.terms()[..a.len()]);
        }
    }
}
