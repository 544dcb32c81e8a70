//! Tweet corpora: ingest, cleaning, summary statistics and synthesis.

mod clean;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::KvReport;
use crate::stance::Topic;

pub use clean::{clean_corpus, nearest_rank_threshold, CleaningConfig, CleaningReport};
pub use synth::{
    generate_synthetic_corpus, GroundTruth, SyntheticCorpus, SyntheticSpec, TopicVocabulary, DEFAULT_COUPLING,
    HISTORY_TOPIC,
};

/// One social-media post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub tweet_id: String,
    pub user_id: String,
    pub topic: Topic,
    pub text: String,
    /// Lowercase tags without the leading `#`.
    #[serde(default)]
    pub hashtags: Vec<String>,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub is_retweet: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_user_id: Option<String>,
}

impl Tweet {
    /// Retweets and quote tweets both carry a reference to another user.
    pub fn is_repost(&self) -> bool {
        self.is_retweet || self.retweeted_user_id.is_some()
    }
}

/// Byte ranges `[start, end)` of every hashtag token in `text`, `#` included.
///
/// A hashtag is `#` at the start of the text or after whitespace, followed by
/// a maximal non-empty run of alphanumerics or underscores.
pub fn hashtag_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut prev: Option<char> = None;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        let at_boundary = prev.is_none_or(char::is_whitespace);
        if c == '#' && at_boundary {
            let mut end = i + 1;
            while let Some(&(j, d)) = iter.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    iter.next();
                    prev = Some(d);
                } else {
                    break;
                }
            }
            if end > i + 1 {
                spans.push((i, end));
                continue;
            }
        }
        prev = Some(c);
    }
    spans
}

/// Lowercase hashtags of `text` in order of appearance.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    hashtag_spans(text)
        .into_iter()
        .map(|(s, e)| text[s + 1..e].to_lowercase())
        .collect()
}

#[derive(Debug, Deserialize)]
struct TweetRecord {
    tweet_id: String,
    user_id: String,
    topic: String,
    text: String,
    created_at: DateTime<Utc>,
    is_retweet: bool,
    #[serde(default)]
    retweeted_user_id: Option<String>,
    #[serde(default)]
    hashtags: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub tweets: Vec<Tweet>,
    pub rejected: Vec<RejectedLine>,
}

impl LoadedCorpus {
    pub fn report(&self, path: &Path) -> KvReport {
        let mut r = KvReport::new("load");
        r.push("path", path.display())
            .push("accepted", self.tweets.len())
            .push("rejected", self.rejected.len());
        if !self.rejected.is_empty() {
            let body: String = self
                .rejected
                .iter()
                .map(|rej| format!("line {}: {}\n", rej.line, rej.reason))
                .collect();
            r.block("rejected", body);
        }
        r
    }
}

/// Reads one JSON record per line. Blank lines are skipped; malformed lines,
/// records for another topic and duplicate ids are rejected and reported.
pub fn load_corpus(path: &Path, topic: &Topic) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut tweets = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TweetRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RejectedLine {
                    line: lineno,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if rec.topic != topic.as_str() {
            rejected.push(RejectedLine {
                line: lineno,
                reason: format!("topic `{}` does not match `{}`", rec.topic, topic),
            });
            continue;
        }
        if !seen.insert(rec.tweet_id.clone()) {
            rejected.push(RejectedLine {
                line: lineno,
                reason: format!("duplicate tweet_id `{}`", rec.tweet_id),
            });
            continue;
        }
        let hashtags = match rec.hashtags {
            Some(tags) => tags
                .into_iter()
                .map(|t| t.trim_start_matches('#').to_lowercase())
                .collect(),
            None => extract_hashtags(&rec.text),
        };
        tweets.push(Tweet {
            tweet_id: rec.tweet_id,
            user_id: rec.user_id,
            topic: Topic(rec.topic),
            text: rec.text,
            hashtags,
            created_at: rec.created_at,
            is_retweet: rec.is_retweet,
            retweeted_user_id: rec.retweeted_user_id,
        });
    }
    if tweets.is_empty() {
        return Err(Error::NoRecords {
            path: path.to_path_buf(),
            rejected: rejected.len(),
        });
    }
    Ok(LoadedCorpus { tweets, rejected })
}

pub fn write_corpus(path: &Path, tweets: &[Tweet]) -> Result<()> {
    write_jsonl(path, tweets)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(item);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub tweets_total: usize,
    pub users_total: usize,
    pub per_topic_counts: BTreeMap<Topic, usize>,
    pub per_user_post_counts: BTreeMap<String, usize>,
    pub hashtag_coverage: f64,
}

impl CorpusStats {
    pub fn report(&self) -> KvReport {
        let mut r = KvReport::new("corpus_stats");
        r.push("tweets_total", self.tweets_total)
            .push("users_total", self.users_total)
            .push_f64("hashtag_coverage", self.hashtag_coverage);
        for (t, n) in &self.per_topic_counts {
            r.push(format!("topic.{t}"), n);
        }
        r
    }
}

pub fn corpus_stats(tweets: &[Tweet]) -> CorpusStats {
    if tweets.is_empty() {
        return CorpusStats::default();
    }
    let mut per_topic_counts = BTreeMap::new();
    let mut per_user_post_counts = BTreeMap::new();
    let mut with_tags = 0usize;
    for t in tweets {
        *per_topic_counts.entry(t.topic.clone()).or_insert(0) += 1;
        *per_user_post_counts.entry(t.user_id.clone()).or_insert(0) += 1;
        if !t.hashtags.is_empty() {
            with_tags += 1;
        }
    }
    CorpusStats {
        tweets_total: tweets.len(),
        users_total: per_user_post_counts.len(),
        per_topic_counts,
        per_user_post_counts,
        hashtag_coverage: with_tags as f64 / tweets.len() as f64,
    }
}
