//! Synthetic transcripts with learnable labels.
//!
//! Every fine label owns a handful of keywords; an utterance repeats the
//! keywords of its labels among generic filler words, with occasional stray
//! keywords from other labels as noise. Label-set sizes follow the configured
//! two- and three-label rates, and the first label is emotional with
//! probability `emo_rate`. Emotional turns cluster within a session (see
//! `persistence`), so context windows carry signal rather than only noise.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Taxonomy, Top, Utterance};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub size: usize,
    /// Probability of exactly two labels.
    pub two_label_rate: f64,
    /// Probability of three labels.
    pub three_label_rate: f64,
    /// Probability that the first label is emotional.
    pub emo_rate: f64,
    pub session_len: usize,
    pub keywords_per_label: usize,
    /// Probability of one stray keyword from an unrelated label.
    pub noise_rate: f64,
    /// Probability that an utterance's first label keeps the top category of
    /// the previous turn instead of a fresh draw; the marginal emotional
    /// rate stays `emo_rate`.
    pub persistence: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            size: 5000,
            two_label_rate: 0.24,
            three_label_rate: 0.12,
            emo_rate: 1373.0 / 7965.0,
            session_len: 126,
            keywords_per_label: 5,
            noise_rate: 0.1,
            persistence: 0.6,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidArgument("synthetic corpus size must be ≥ 1".into()));
        }
        if self.session_len == 0 || self.keywords_per_label == 0 {
            return Err(Error::InvalidArgument(
                "session length and keywords per label must be ≥ 1".into(),
            ));
        }
        for (name, r) in [
            ("two_label_rate", self.two_label_rate),
            ("three_label_rate", self.three_label_rate),
            ("emo_rate", self.emo_rate),
            ("noise_rate", self.noise_rate),
            ("persistence", self.persistence),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("{name} = {r} outside [0, 1]")));
            }
        }
        if self.two_label_rate + self.three_label_rate > 1.0 {
            return Err(Error::InvalidArgument(
                "two- and three-label rates sum above 1".into(),
            ));
        }
        Ok(())
    }
}

const FILLER: &[&str] = &[
    "today", "really", "think", "maybe", "week", "time", "thing", "people", "work", "home",
    "feel", "know", "said", "going", "talk", "little", "kind", "right", "okay", "yeah",
    "sort", "mean", "actually", "lot", "day", "year", "family", "friend", "school", "job",
    "money", "house", "morning", "night", "weekend", "month", "phone", "car", "dinner", "sleep",
    "guess", "sure", "probably", "pretty", "just", "like", "want", "need", "try", "start",
];

/// Keywords for a fine label: a label-specific stem plus an index.
pub fn keywords(label: &str, n: usize) -> Vec<String> {
    let stem: String = label
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    (0..n).map(|k| format!("{stem}{}", KEY_SUFFIX[k % KEY_SUFFIX.len()])).collect()
}

const KEY_SUFFIX: &[&str] = &["ly", "ness", "ful", "ish", "ment", "wise", "ous", "ic"];

/// Generates a corpus over the fine labels of `taxonomy`.
pub fn generate_synthetic_corpus(spec: &SynthSpec, taxonomy: &Taxonomy) -> Result<Corpus> {
    spec.validate()?;
    let emo = taxonomy.fine_labels(Top::Emo);
    let cog = taxonomy.fine_labels(Top::Cog);
    if emo.is_empty() || cog.len() < 3 {
        return Err(Error::Taxonomy(
            "synthetic data needs ≥ 1 EMO and ≥ 3 COG fine labels".into(),
        ));
    }
    let all: Vec<&str> = emo.iter().chain(&cog).copied().collect();
    let mut rng = rng_from_seed(derive_seed(spec.seed, "synth"));
    let mut utterances = Vec::with_capacity(spec.size);
    let mut prev_emo = None;
    for n in 0..spec.size {
        let u: f64 = rng.gen();
        let count = if u < spec.three_label_rate {
            3
        } else if u < spec.three_label_rate + spec.two_label_rate {
            2
        } else {
            1
        };
        let first_emo = match prev_emo {
            Some(p) if n % spec.session_len != 0 && rng.gen_bool(spec.persistence) => p,
            _ => rng.gen_bool(spec.emo_rate),
        };
        prev_emo = Some(first_emo);
        let mut labels: Vec<&str> = vec![pick_skewed(&mut rng, if first_emo { &emo } else { &cog })];
        while labels.len() < count {
            // extra labels stay within COG for COG-first utterances so the
            // emotional fraction is exactly `emo_rate`
            let pool = if first_emo && rng.gen_bool(0.5) { &emo } else { &cog };
            let candidates: Vec<&str> = pool.iter().copied().filter(|l| !labels.contains(l)).collect();
            let pool = if candidates.is_empty() {
                cog.iter().copied().filter(|l| !labels.contains(l)).collect()
            } else {
                candidates
            };
            labels.push(pool[rng.gen_range(0..pool.len())]);
        }
        let mut words: Vec<String> = Vec::new();
        for l in &labels {
            let kw = keywords(l, spec.keywords_per_label);
            for _ in 0..2 {
                words.push(kw[rng.gen_range(0..kw.len())].clone());
            }
        }
        if rng.gen_bool(spec.noise_rate) {
            let other = all[rng.gen_range(0..all.len())];
            let kw = keywords(other, spec.keywords_per_label);
            words.push(kw[rng.gen_range(0..kw.len())].clone());
        }
        for _ in 0..rng.gen_range(3..=7) {
            words.push(FILLER[rng.gen_range(0..FILLER.len())].to_string());
        }
        words.shuffle(&mut rng);
        let session = n / spec.session_len;
        let turn = n % spec.session_len;
        utterances.push(Utterance {
            session_id: format!("s{session:03}"),
            turn_index: turn,
            speaker: if turn.is_multiple_of(2) { "counselor" } else { "client" }.to_string(),
            text: words.join(" "),
            fine_labels: labels.iter().map(|s| s.to_string()).collect(),
        });
    }
    Corpus::from_utterances(utterances)
}

/// Uniform over the first half of `pool`, half as likely for the rest, so
/// some classes are minor.
fn pick_skewed<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    let weights: Vec<f64> = (0..pool.len())
        .map(|i| if 2 * i < pool.len() { 1.0 } else { 0.5 })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (w, l) in weights.iter().zip(pool) {
        if u < *w {
            return l;
        }
        u -= w;
    }
    pool[pool.len() - 1]
}
