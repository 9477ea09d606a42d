use std::collections::HashSet;

use serde::{Deserialize, Serialize};

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Cleaned, lowercase tokens in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList(pub Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

/// Lowercases, splits on whitespace, strips punctuation and drops stopwords
/// and context placeholder tokens.
#[derive(Debug, Clone)]
pub struct Normalizer {
    stopwords: HashSet<String>,
    placeholders: HashSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::english()
    }
}

impl Normalizer {
    /// Uses the bundled English stopword list.
    pub fn english() -> Self {
        Self::with_stopwords(
            ENGLISH_STOPWORDS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Normalizer {
            stopwords: words.into_iter().map(Into::into).collect(),
            placeholders: HashSet::new(),
        }
    }

    /// Raw tokens (e.g. `[PAD]`, `[SEP]`) removed before any other cleaning.
    pub fn with_placeholders<I, S>(mut self, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.placeholders = tokens.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn normalize(&self, text: &str) -> TokenList {
        TokenList(
            text.split_whitespace()
                .filter(|raw| !self.placeholders.contains(*raw))
                .filter_map(|raw| {
                    let token: String = raw
                        .chars()
                        .flat_map(char::to_lowercase)
                        .filter(|c| c.is_alphanumeric())
                        .collect();
                    (!token.is_empty() && !self.stopwords.contains(&token)).then_some(token)
                })
                .collect(),
        )
    }
}

pub fn normalize_tokens(text: &str, normalizer: &Normalizer) -> TokenList {
    normalizer.normalize(text)
}
