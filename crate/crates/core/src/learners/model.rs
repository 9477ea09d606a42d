use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fsio::write_atomic;
use crate::error::{Error, Result};
use crate::learners::boost::{AdaBoostParams, BoostEnsemble};
use crate::learners::forest::{Forest, ForestParams};
use crate::learners::linear::LinearModel;
use crate::learners::logistic::{train_logreg, LogRegParams};
use crate::learners::naive_bayes::{NaiveBayesParams, NbModel};
use crate::learners::sgd::{train_sgd_svm, SgdParams};
use crate::learners::{Classifier, Learner};
use crate::scalar::Scalar;
use crate::text::SparseVector;

const FORMAT: &str = "uttlab-model";
const FORMAT_VERSION: u32 = 1;

/// A learner kind with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    #[serde(rename = "nb")]
    NaiveBayes(NaiveBayesParams),
    AdaboostNb(AdaBoostParams),
    #[serde(rename = "rf")]
    RandomForest(ForestParams),
    GdSvm(SgdParams),
    Logreg(LogRegParams),
}

impl LearnerSpec {
    pub const IDS: [&'static str; 5] = ["nb", "adaboost_nb", "rf", "gd_svm", "logreg"];

    pub fn id(&self) -> &'static str {
        match self {
            LearnerSpec::NaiveBayes(_) => "nb",
            LearnerSpec::AdaboostNb(_) => "adaboost_nb",
            LearnerSpec::RandomForest(_) => "rf",
            LearnerSpec::GdSvm(_) => "gd_svm",
            LearnerSpec::Logreg(_) => "logreg",
        }
    }

    /// Whether results depend on the seed.
    pub fn is_seeded(&self) -> bool {
        matches!(self, LearnerSpec::RandomForest(_) | LearnerSpec::GdSvm(_))
    }
}

impl FromStr for LearnerSpec {
    type Err = Error;

    /// Default hyperparameters for a model id.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nb" => LearnerSpec::NaiveBayes(Default::default()),
            "adaboost_nb" => LearnerSpec::AdaboostNb(Default::default()),
            "rf" => LearnerSpec::RandomForest(Default::default()),
            "gd_svm" => LearnerSpec::GdSvm(Default::default()),
            "logreg" => LearnerSpec::Logreg(Default::default()),
            other => return Err(Error::UnknownModel(other.to_string())),
        })
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Any fitted model, tagged by kind when serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "F: Scalar")]
pub enum Model<F> {
    #[serde(rename = "nb")]
    NaiveBayes(NbModel<F>),
    AdaboostNb(BoostEnsemble<F>),
    #[serde(rename = "rf")]
    RandomForest(Forest<F>),
    GdSvm(LinearModel<F>),
    Logreg(LinearModel<F>),
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
struct Envelope<T> {
    format: String,
    version: u32,
    payload: T,
}

/// Wraps any serializable payload in the versioned container.
pub fn to_container_json<T: Serialize>(payload: &T) -> Result<String> {
    serde_json::to_string(&Envelope {
        format: FORMAT.into(),
        version: FORMAT_VERSION,
        payload,
    })
    .map_err(|e| Error::Serde(e.to_string()))
}

pub fn from_container_json<T: Serialize + serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))?;
    if env.format != FORMAT || env.version != FORMAT_VERSION {
        return Err(Error::Serde(format!(
            "unsupported container {} v{}",
            env.format, env.version
        )));
    }
    Ok(env.payload)
}

impl<F: Scalar> Model<F> {
    pub fn id(&self) -> &'static str {
        match self {
            Model::NaiveBayes(_) => "nb",
            Model::AdaboostNb(_) => "adaboost_nb",
            Model::RandomForest(_) => "rf",
            Model::GdSvm(_) => "gd_svm",
            Model::Logreg(_) => "logreg",
        }
    }

    fn inner(&self) -> &dyn Classifier<F> {
        match self {
            Model::NaiveBayes(m) => m,
            Model::AdaboostNb(m) => m,
            Model::RandomForest(m) => m,
            Model::GdSvm(m) | Model::Logreg(m) => m,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_container_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        from_container_json(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

impl<F: Scalar> Classifier<F> for Model<F> {
    fn classes(&self) -> &[usize] {
        self.inner().classes()
    }

    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn scores(&self, x: &SparseVector<F>) -> Vec<F> {
        self.inner().scores(x)
    }
}

impl<F: Scalar> Learner<F> for LearnerSpec {
    type Model = Model<F>;

    fn fit(&self, xs: &[SparseVector<F>], y: &[usize], seed: u64) -> Result<Model<F>> {
        Ok(match self {
            LearnerSpec::NaiveBayes(p) => Model::NaiveBayes(NbModel::fit(xs, y, p.alpha)?),
            LearnerSpec::AdaboostNb(p) => Model::AdaboostNb(BoostEnsemble::fit(xs, y, p)?),
            LearnerSpec::RandomForest(p) => Model::RandomForest(Forest::fit(xs, y, p, seed)?),
            LearnerSpec::GdSvm(p) => Model::GdSvm(train_sgd_svm(xs, y, p, seed)?),
            LearnerSpec::Logreg(p) => Model::Logreg(train_logreg(xs, y, p)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::predict;

    fn data() -> (Vec<SparseVector<f64>>, Vec<usize>) {
        let xs = (0..24)
            .map(|i| {
                let c = i % 3;
                let mut v = vec![0.05; 4];
                v[c] = 1.0 + (i as f64) * 0.01;
                SparseVector::from_dense(&v).normalized()
            })
            .collect();
        (xs, (0..24).map(|i| i % 3).collect())
    }

    fn small_specs() -> Vec<LearnerSpec> {
        vec![
            LearnerSpec::NaiveBayes(Default::default()),
            LearnerSpec::AdaboostNb(Default::default()),
            LearnerSpec::RandomForest(ForestParams {
                n_trees: 7,
                ..Default::default()
            }),
            LearnerSpec::GdSvm(SgdParams {
                epochs: 30,
                ..Default::default()
            }),
            LearnerSpec::Logreg(Default::default()),
        ]
    }

    #[test]
    fn ids_parse() {
        for id in LearnerSpec::IDS {
            assert_eq!(id.parse::<LearnerSpec>().unwrap().id(), id);
        }
        assert!(matches!("svm".parse::<LearnerSpec>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn save_load_predicts_identically() {
        let (xs, y) = data();
        for spec in small_specs() {
            let m: Model<f64> = spec.fit(&xs, &y, 3).unwrap();
            let back = Model::<f64>::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m, "{}", spec.id());
            assert_eq!(predict(&back, &xs).unwrap(), predict(&m, &xs).unwrap());
        }
    }

    #[test]
    fn f32_round_trip() {
        let xs: Vec<SparseVector<f32>> = vec![
            SparseVector::from_dense(&[0.3, 0.7]),
            SparseVector::from_dense(&[0.9, 0.1]),
        ];
        let m: Model<f32> = LearnerSpec::Logreg(Default::default()).fit(&xs, &[0, 1], 0).unwrap();
        assert_eq!(Model::<f32>::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn every_learner_fits_a_keyed_dataset() {
        // feature 0 or 1 is always present and decides the label; 2..5 are noise
        let xs: Vec<SparseVector<f64>> = (0..30)
            .map(|i| {
                let mut v = vec![0.0; 6];
                v[i % 2] = 1.0;
                v[2 + (i * 7) % 4] = 0.4;
                SparseVector::from_dense(&v).normalized()
            })
            .collect();
        let y: Vec<usize> = (0..30).map(|i| i % 2).collect();
        for spec in small_specs() {
            let m: Model<f64> = spec.fit(&xs, &y, 1).unwrap();
            assert_eq!(predict(&m, &xs).unwrap().labels, y, "{}", spec.id());
        }
    }

    #[test]
    fn scores_agree_with_labels() {
        let (xs, y) = data();
        for spec in small_specs() {
            let m: Model<f64> = spec.fit(&xs, &y, 2).unwrap();
            let p = predict(&m, &xs).unwrap();
            for (s, &l) in p.scores.iter().zip(&p.labels) {
                assert_eq!(p.classes[crate::scalar::argmax(s).unwrap()], l);
            }
        }
    }
}
