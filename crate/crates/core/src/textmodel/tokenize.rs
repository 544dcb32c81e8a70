use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_urls: bool,
    pub strip_mentions: bool,
    pub stopword_list: BTreeSet<String>,
    pub min_token_len: usize,
}

fn english_stopwords() -> &'static BTreeSet<String> {
    static WORDS: OnceLock<BTreeSet<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        include_str!("../../data/stopwords_en.txt")
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(String::from)
            .collect()
    })
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            strip_urls: true,
            strip_mentions: true,
            stopword_list: english_stopwords().clone(),
            min_token_len: 2,
        }
    }
}

impl TokenizerConfig {
    pub fn with_stopwords<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        TokenizerConfig {
            stopword_list: words.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }
}

fn is_url(chunk: &str) -> bool {
    let c = chunk.to_ascii_lowercase();
    c.starts_with("http://") || c.starts_with("https://") || c.starts_with("www.")
}

/// Whitespace chunks are lowercased, URL and mention chunks dropped, the rest
/// split on non-alphanumeric runs; stopwords and short tokens are then removed.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chunk = if cfg.lowercase {
            chunk.to_lowercase()
        } else {
            chunk.to_string()
        };
        if cfg.strip_urls && is_url(&chunk) {
            continue;
        }
        if cfg.strip_mentions && chunk.starts_with('@') {
            continue;
        }
        for tok in chunk.split(|c: char| !c.is_alphanumeric()) {
            if tok.is_empty() || cfg.stopword_list.contains(tok) {
                continue;
            }
            if tok.chars().count() < cfg.min_token_len.max(1) {
                continue;
            }
            out.push(tok.to_string());
        }
    }
    out
}
