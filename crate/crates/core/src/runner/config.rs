//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! corpus = "corpus.jsonl"
//! tasks = ["EMO-COG", "EMO-8"]
//! models = ["baseline", "nb", "rf"]
//! seeds = [1, 2, 3]
//!
//! [overrides.rf]
//! n_trees = 50
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ContextWindow, Task, Taxonomy};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::text::DEFAULT_MAX_VOCAB;

pub const BASELINE: &str = "baseline";

/// Which supports weight W-F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Evaluation,
    Training,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    /// Defaults to the bundled taxonomy.
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    #[serde(default = "all_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default = "all_models")]
    pub models: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Train fraction.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_max_vocab")]
    pub max_vocab: usize,
    #[serde(default = "default_split_seed")]
    pub split_seed: u64,
    #[serde(default)]
    pub weight_source: WeightMode,
    #[serde(default = "default_pad")]
    pub pad: String,
    #[serde(default = "default_sep")]
    pub sep: String,
    /// Per-model hyperparameters replacing the defaults, keyed by model id.
    #[serde(default)]
    pub overrides: BTreeMap<String, toml::Table>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn all_tasks() -> Vec<Task> {
    Task::ALL.to_vec()
}

fn all_models() -> Vec<String> {
    std::iter::once(BASELINE)
        .chain(LearnerSpec::IDS)
        .map(String::from)
        .collect()
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_ratio() -> f64 {
    0.9
}

fn default_depth() -> usize {
    2
}

fn default_max_vocab() -> usize {
    DEFAULT_MAX_VOCAB
}

fn default_split_seed() -> u64 {
    42
}

fn default_pad() -> String {
    ContextWindow::default().pad
}

fn default_sep() -> String {
    ContextWindow::default().sep
}

impl ExperimentConfig {
    /// A config with every default and the given corpus.
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            corpus: corpus.into(),
            taxonomy: None,
            tasks: all_tasks(),
            models: all_models(),
            seeds: default_seeds(),
            ratio: default_ratio(),
            depth: default_depth(),
            max_vocab: default_max_vocab(),
            split_seed: default_split_seed(),
            weight_source: WeightMode::default(),
            pad: default_pad(),
            sep: default_sep(),
            overrides: BTreeMap::new(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(s: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!("ratio {} outside (0, 1)", self.ratio)));
        }
        if self.tasks.is_empty() || self.models.is_empty() {
            return Err(Error::Config("tasks and models must not be empty".into()));
        }
        if self.max_vocab == 0 {
            return Err(Error::Config("max_vocab must be positive".into()));
        }
        for m in &self.models {
            self.learner(m)?;
        }
        for m in self.overrides.keys() {
            if !self.models.contains(m) {
                return Err(Error::Config(format!("override for unused model {m:?}")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.resolve(&self.corpus)
    }

    pub fn load_taxonomy(&self) -> Result<Taxonomy> {
        match &self.taxonomy {
            Some(p) => Taxonomy::load(self.resolve(p)),
            None => Ok(Taxonomy::default_bundled()),
        }
    }

    pub fn context_window(&self) -> ContextWindow {
        ContextWindow {
            depth: self.depth,
            pad: self.pad.clone(),
            sep: self.sep.clone(),
        }
    }

    /// Learner for a model id with overrides applied; `None` for the baseline.
    pub fn learner(&self, model: &str) -> Result<Option<LearnerSpec>> {
        if model == BASELINE {
            if self.overrides.contains_key(model) {
                return Err(Error::Config("the baseline has no hyperparameters".into()));
            }
            return Ok(None);
        }
        let spec: LearnerSpec = model.parse()?;
        let Some(over) = self.overrides.get(model) else {
            return Ok(Some(spec));
        };
        let mut value = serde_json::to_value(spec).map_err(|e| Error::Serde(e.to_string()))?;
        let obj = value.as_object_mut().expect("specs serialize as objects");
        for (k, v) in over {
            if k == "kind" || !obj.contains_key(k) {
                return Err(Error::Config(format!("model {model} has no hyperparameter {k:?}")));
            }
            let v = serde_json::to_value(v).map_err(|e| Error::Serde(e.to_string()))?;
            obj.insert(k.clone(), v);
        }
        serde_json::from_value(value)
            .map(Some)
            .map_err(|e| Error::Config(format!("overrides for {model}: {e}")))
    }

    /// Seeds a model runs under: every seed for seed-sensitive learners,
    /// only the first for deterministic ones.
    pub fn run_seeds(&self, model: &str) -> Result<Vec<Option<u64>>> {
        Ok(match self.learner(model)? {
            Some(s) if s.is_seeded() => self.seeds.iter().copied().map(Some).collect(),
            _ => vec![None],
        })
    }

    /// SHA-256 of the normalized config.
    pub fn digest(&self) -> String {
        hex_sha256(self.to_toml_string().as_bytes())
    }
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::ForestParams;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml_str("corpus = \"c.jsonl\"", "/data").unwrap();
        assert_eq!(c.tasks.len(), 5);
        assert_eq!(c.models.len(), 6);
        assert_eq!((c.ratio, c.depth, c.max_vocab), (0.9, 2, 3034));
        assert_eq!(c.corpus_path(), PathBuf::from("/data/c.jsonl"));
        assert_eq!(c.run_seeds("rf").unwrap().len(), 3);
        assert_eq!(c.run_seeds("nb").unwrap(), vec![None]);
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::from_toml_str(
            "corpus = \"c\"\nmodels = [\"rf\"]\n[overrides.rf]\nn_trees = 7\n",
            "",
        )
        .unwrap();
        match c.learner("rf").unwrap() {
            Some(LearnerSpec::RandomForest(p)) => {
                assert_eq!(p, ForestParams { n_trees: 7, ..Default::default() })
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            "corpus = \"c\"\nseeds = []",
            "corpus = \"c\"\nratio = 1.0",
            "corpus = \"c\"\nmodels = [\"svm\"]",
            "corpus = \"c\"\ntasks = [\"EMO-9\"]",
            "corpus = \"c\"\nmodels = [\"rf\"]\n[overrides.rf]\ntrees = 3",
            "corpus = \"c\"\nmodels = [\"rf\"]\n[overrides.nb]\nalpha = 3",
            "corpus = \"c\"\nunknown = 1",
        ] {
            assert!(ExperimentConfig::from_toml_str(bad, "").is_err(), "{bad}");
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::new("c");
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seeds = vec![9];
        assert_ne!(a.digest(), b.digest());
    }
}
