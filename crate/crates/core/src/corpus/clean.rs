use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::Tweet;
use crate::error::{Error, Result};
use crate::report::KvReport;
use crate::stance::Topic;

/// Cleaning thresholds.
///
/// The bot percentile is computed over whatever corpus is passed in; loading
/// one topic at a time makes it a per-topic cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    pub bot_percentile: f64,
    pub min_posts_per_topic: usize,
    pub drop_retweets: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            bot_percentile: 0.95,
            min_posts_per_topic: 2,
            drop_retweets: true,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bot_percentile > 0.0 && self.bot_percentile <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "bot_percentile must be in (0, 1], got {}",
                self.bot_percentile
            )));
        }
        if self.min_posts_per_topic < 1 {
            return Err(Error::InvalidConfig(
                "min_posts_per_topic must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleaningReport {
    pub input_tweets: usize,
    pub retweets_removed: usize,
    /// Nearest-rank post count threshold; users strictly above it are removed.
    pub bot_threshold: usize,
    pub bot_users_removed: usize,
    pub bot_tweets_removed: usize,
    pub low_activity_users_removed: usize,
    pub low_activity_tweets_removed: usize,
    pub output_tweets: usize,
    pub output_users: usize,
}

impl CleaningReport {
    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new("cleaning");
        r.push("input_tweets", self.input_tweets)
            .push("stage1.retweets_removed", self.retweets_removed)
            .push("stage2.bot_threshold", self.bot_threshold)
            .push("stage2.bot_users_removed", self.bot_users_removed)
            .push("stage2.bot_tweets_removed", self.bot_tweets_removed)
            .push(
                "stage3.low_activity_users_removed",
                self.low_activity_users_removed,
            )
            .push(
                "stage3.low_activity_tweets_removed",
                self.low_activity_tweets_removed,
            )
            .push("output_tweets", self.output_tweets)
            .push("output_users", self.output_users);
        r
    }
}

/// Nearest-rank percentile: the value at 1-based position `ceil(p * n)` of
/// the ascending sort. `sorted` must be non-empty and sorted.
pub fn nearest_rank_threshold(sorted: &[usize], p: f64) -> usize {
    assert!(!sorted.is_empty(), "nearest rank of an empty sample");
    let n = sorted.len();
    // Tolerate products like 0.95 * 100 = 95.00000000000001.
    let rank = ((p * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

/// Removes reposts, then bot-like users, then low-activity (user, topic)
/// pairs, in that order. Each stage counts on the output of the previous one.
pub fn clean_corpus(tweets: Vec<Tweet>, cfg: &CleaningConfig) -> Result<(Vec<Tweet>, CleaningReport)> {
    cfg.validate()?;
    if tweets.is_empty() {
        return Err(Error::EmptyInput("clean_corpus received no tweets".into()));
    }
    let mut report = CleaningReport {
        input_tweets: tweets.len(),
        ..Default::default()
    };

    let mut kept = tweets;
    if cfg.drop_retweets {
        let before = kept.len();
        kept.retain(|t| !t.is_repost());
        report.retweets_removed = before - kept.len();
    }
    if kept.is_empty() {
        return Err(Error::EverythingCleaned);
    }

    let mut per_user: HashMap<&str, usize> = HashMap::new();
    for t in &kept {
        *per_user.entry(t.user_id.as_str()).or_insert(0) += 1;
    }
    let mut counts: Vec<usize> = per_user.values().copied().collect();
    counts.sort_unstable();
    let threshold = nearest_rank_threshold(&counts, cfg.bot_percentile);
    report.bot_threshold = threshold;
    let bots: HashSet<String> = per_user
        .iter()
        .filter(|(_, &c)| c > threshold)
        .map(|(u, _)| u.to_string())
        .collect();
    report.bot_users_removed = bots.len();
    let before = kept.len();
    kept.retain(|t| !bots.contains(&t.user_id));
    report.bot_tweets_removed = before - kept.len();

    let mut per_user_topic: BTreeMap<(&str, &Topic), usize> = BTreeMap::new();
    for t in &kept {
        *per_user_topic
            .entry((t.user_id.as_str(), &t.topic))
            .or_insert(0) += 1;
    }
    let sparse: HashSet<(String, Topic)> = per_user_topic
        .iter()
        .filter(|(_, &c)| c < cfg.min_posts_per_topic)
        .map(|((u, t), _)| (u.to_string(), (*t).clone()))
        .collect();
    let users_before: HashSet<&str> = kept.iter().map(|t| t.user_id.as_str()).collect();
    let users_before = users_before.len();
    let before = kept.len();
    kept.retain(|t| !sparse.contains(&(t.user_id.clone(), t.topic.clone())));
    report.low_activity_tweets_removed = before - kept.len();

    let users_after: HashSet<&str> = kept.iter().map(|t| t.user_id.as_str()).collect();
    report.low_activity_users_removed = users_before - users_after.len();
    report.output_users = users_after.len();
    report.output_tweets = kept.len();

    if kept.is_empty() {
        return Err(Error::EverythingCleaned);
    }
    Ok((kept, report))
}
