use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_TAXONOMY: &str = include_str!("../../data/taxonomy_default.json");

/// Top-level category of a fine label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Top {
    #[serde(rename = "EMO")]
    Emo,
    #[serde(rename = "COG")]
    Cog,
}

impl fmt::Display for Top {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Top::Emo => "EMO",
            Top::Cog => "COG",
        })
    }
}

impl FromStr for Top {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EMO" => Ok(Top::Emo),
            "COG" => Ok(Top::Cog),
            other => Err(Error::Taxonomy(format!("unknown top category {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub top: Top,
    pub coarse: String,
}

/// Fine label → (top category, coarse class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    entries: BTreeMap<String, TaxonomyEntry>,
}

impl Taxonomy {
    /// Builds a taxonomy, rejecting coarse classes that appear under both tops.
    pub fn new(entries: BTreeMap<String, TaxonomyEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Taxonomy("no entries".into()));
        }
        let mut owner: HashMap<&str, Top> = HashMap::new();
        for (fine, e) in &entries {
            if e.coarse.is_empty() {
                return Err(Error::Taxonomy(format!("fine label {fine:?} has empty coarse class")));
            }
            match owner.get(e.coarse.as_str()) {
                Some(&t) if t != e.top => {
                    return Err(Error::Taxonomy(format!(
                        "coarse class {:?} appears under both EMO and COG",
                        e.coarse
                    )))
                }
                _ => {
                    owner.insert(&e.coarse, e.top);
                }
            }
        }
        Ok(Taxonomy { entries })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let entries: BTreeMap<String, TaxonomyEntry> =
            serde_json::from_str(s).map_err(|e| Error::Taxonomy(e.to_string()))?;
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s)
    }

    /// The bundled taxonomy with the mappings named in the source study.
    pub fn default_bundled() -> Self {
        Self::from_json_str(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("taxonomy serializes")
    }

    pub fn get(&self, fine: &str) -> Option<&TaxonomyEntry> {
        self.entries.get(fine)
    }

    pub fn lookup(&self, fine: &str) -> Result<&TaxonomyEntry> {
        self.get(fine)
            .ok_or_else(|| Error::UnknownFineLabel(fine.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &TaxonomyEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Fine labels under `top`, sorted.
    pub fn fine_labels(&self, top: Top) -> Vec<&str> {
        self.entries()
            .filter(|(_, e)| e.top == top)
            .map(|(k, _)| k)
            .collect()
    }

    /// Coarse classes under `top`, sorted and deduplicated.
    pub fn coarse_classes(&self, top: Top) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .entries
            .values()
            .filter(|e| e.top == top)
            .map(|e| e.coarse.as_str())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}
