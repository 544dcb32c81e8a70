use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::UserRecord;
use crate::corpus::{Tweet, HISTORY_TOPIC};
use crate::error::{Error, Result};
use crate::profile::{ProfileTable, StanceCategory};
use crate::stance::Topic;
use crate::textmodel::{tokenize, TokenizerConfig};

pub const STATS_DIM: usize = 7;

/// Where content vectors come from: tweets on a topic, or the user's
/// off-topic history.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ContentSource {
    Topic(Topic),
    Historical,
}

impl From<String> for ContentSource {
    fn from(s: String) -> Self {
        if s == HISTORY_TOPIC {
            ContentSource::Historical
        } else {
            ContentSource::Topic(Topic(s))
        }
    }
}

impl From<ContentSource> for String {
    fn from(c: ContentSource) -> Self {
        c.to_string()
    }
}

impl fmt::Display for ContentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentSource::Topic(t) => write!(f, "{t}"),
            ContentSource::Historical => f.write_str(HISTORY_TOPIC),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSpec {
    pub include_stance: Vec<Topic>,
    pub include_content: Vec<ContentSource>,
    pub include_stats: bool,
    pub include_profile_text: bool,
    pub content_dim: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec {
            include_stance: Vec::new(),
            include_content: Vec::new(),
            include_stats: false,
            include_profile_text: false,
            content_dim: 512,
        }
    }
}

impl FeatureSpec {
    pub fn stance(topics: &[Topic]) -> Self {
        FeatureSpec {
            include_stance: topics.to_vec(),
            ..Default::default()
        }
    }

    pub fn stats() -> Self {
        FeatureSpec {
            include_stats: true,
            ..Default::default()
        }
    }

    pub fn validate(&self, target: &Topic) -> Result<()> {
        let any = !self.include_stance.is_empty()
            || !self.include_content.is_empty()
            || self.include_stats
            || self.include_profile_text;
        if !any {
            return Err(Error::InvalidConfig("feature spec selects no feature group".into()));
        }
        if self.include_stance.contains(target) {
            return Err(Error::InvalidConfig(format!("stance on the target topic {target} would leak the label")));
        }
        if self.include_content.contains(&ContentSource::Topic(target.clone())) {
            return Err(Error::InvalidConfig(format!("content from the target topic {target} would leak the label")));
        }
        if (self.include_profile_text || !self.include_content.is_empty()) && self.content_dim == 0 {
            return Err(Error::InvalidConfig("content_dim must be positive".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.include_stance.len()
            + self.include_content.len() * self.content_dim
            + if self.include_stats { STATS_DIM } else { 0 }
            + if self.include_profile_text { 2 * self.content_dim } else { 0 }
    }
}

/// Everything feature assembly draws on.
#[derive(Debug, Clone)]
pub struct PredictData {
    pub target: Topic,
    pub profiles: ProfileTable,
    pub topic_tweets: BTreeMap<Topic, Vec<Tweet>>,
    pub history: Vec<Tweet>,
    pub users: Vec<UserRecord>,
}

impl PredictData {
    /// Users with a Support/Against category on the target, sorted by id.
    pub fn eligible_users(&self) -> Vec<(String, StanceCategory)> {
        self.profiles
            .topics
            .get(&self.target)
            .map(|m| {
                m.iter()
                    .filter(|(_, s)| s.category.is_opinionated())
                    .map(|(u, s)| (u.clone(), s.category))
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserFeatureSet {
    pub user_id: String,
    pub values: Vec<f64>,
    /// Target-topic category; always Support or Against.
    pub label: StanceCategory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub spec: FeatureSpec,
    pub dimension: usize,
    pub users: Vec<UserFeatureSet>,
    /// Columns holding raw counts, to be standardized on the training split.
    pub numeric_columns: Vec<usize>,
    pub eligible: usize,
    /// Drop reason -> number of users.
    pub dropped: BTreeMap<String, usize>,
}

/// L2-normalized hashed term frequencies of one text (all zeros when it has
/// no tokens).
pub fn hash_text(text: &str, tokenizer: &TokenizerConfig, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for tok in tokenize(text, tokenizer) {
        let mut h = FnvHasher::default();
        h.write(tok.as_bytes());
        v[(h.finish() % dim as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn mean_vectors(texts: &[&str], tokenizer: &TokenizerConfig, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for t in texts {
        for (a, x) in acc.iter_mut().zip(hash_text(t, tokenizer, dim)) {
            *a += x;
        }
    }
    let n = texts.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn texts_by_user(tweets: &[Tweet]) -> BTreeMap<&str, Vec<&str>> {
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in tweets {
        if !t.is_repost() {
            out.entry(t.user_id.as_str()).or_default().push(t.text.as_str());
        }
    }
    out
}

/// Builds one feature vector per eligible user. Users lacking a required
/// source (opinionated stance on a feature topic, tweets for a content
/// source, a user record for stats/profile) are dropped and tallied.
pub fn assemble_features(data: &PredictData, spec: &FeatureSpec) -> Result<FeatureSet> {
    spec.validate(&data.target)?;
    let tokenizer = TokenizerConfig::default();
    let url_tokenizer = TokenizerConfig {
        strip_urls: false,
        ..TokenizerConfig::default()
    };
    let sources: Vec<BTreeMap<&str, Vec<&str>>> = spec
        .include_content
        .iter()
        .map(|src| match src {
            ContentSource::Historical => texts_by_user(&data.history),
            ContentSource::Topic(t) => data.topic_tweets.get(t).map(|v| texts_by_user(v)).unwrap_or_default(),
        })
        .collect();
    let records: BTreeMap<&str, &UserRecord> = data.users.iter().map(|u| (u.user_id.as_str(), u)).collect();

    let mut numeric_columns = Vec::new();
    if spec.include_stats {
        let start = spec.include_stance.len() + spec.include_content.len() * spec.content_dim;
        numeric_columns.extend(start..start + 5);
    }

    let eligible = data.eligible_users();
    let mut users = Vec::new();
    let mut dropped: BTreeMap<String, usize> = BTreeMap::new();
    'user: for (uid, label) in &eligible {
        let mut values = Vec::with_capacity(spec.dimension());
        for t in &spec.include_stance {
            match data.profiles.get(t, uid).map(|s| s.category) {
                Some(StanceCategory::Support) => values.push(1.0),
                Some(StanceCategory::Against) => values.push(0.0),
                _ => {
                    *dropped.entry(format!("no_stance.{t}")).or_default() += 1;
                    continue 'user;
                }
            }
        }
        for (src, by_user) in spec.include_content.iter().zip(&sources) {
            match by_user.get(uid.as_str()) {
                Some(texts) => values.extend(mean_vectors(texts, &tokenizer, spec.content_dim)),
                None => {
                    *dropped.entry(format!("no_content.{src}")).or_default() += 1;
                    continue 'user;
                }
            }
        }
        if spec.include_stats || spec.include_profile_text {
            let Some(rec) = records.get(uid.as_str()) else {
                *dropped.entry("no_user_record".to_string()).or_default() += 1;
                continue 'user;
            };
            if spec.include_stats {
                values.extend(rec.stats.to_vec());
            }
            if spec.include_profile_text {
                values.extend(hash_text(&rec.description, &tokenizer, spec.content_dim));
                values.extend(hash_text(&rec.url, &url_tokenizer, spec.content_dim));
            }
        }
        users.push(UserFeatureSet {
            user_id: uid.clone(),
            values,
            label: *label,
        });
    }
    if users.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no users left after feature assembly ({} eligible)",
            eligible.len()
        )));
    }
    Ok(FeatureSet {
        spec: spec.clone(),
        dimension: spec.dimension(),
        users,
        numeric_columns,
        eligible: eligible.len(),
        dropped,
    })
}

/// Column-wise z-scoring fitted on training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub means: Vec<f64>,
    /// Population standard deviations; 0 marks a constant column.
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &[Vec<f64>], columns: &[usize]) -> Self {
        let n = train.len().max(1) as f64;
        let mut means = Vec::with_capacity(columns.len());
        let mut stds = Vec::with_capacity(columns.len());
        for &c in columns {
            let mean = train.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = train.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
            means.push(mean);
            stds.push(if var > 0.0 { var.sqrt() } else { 0.0 });
        }
        Standardizer {
            columns: columns.to_vec(),
            means,
            stds,
        }
    }

    /// Constant training columns map to 0.
    pub fn apply(&self, row: &mut [f64]) {
        for (i, &c) in self.columns.iter().enumerate() {
            row[c] = if self.stds[i] > 0.0 {
                (row[c] - self.means[i]) / self.stds[i]
            } else {
                0.0
            };
        }
    }

    pub fn constant_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .zip(&self.stds)
            .filter(|(_, s)| **s == 0.0)
            .map(|(c, _)| *c)
            .collect()
    }
}

/// Single-feature convenience: returns the standardized `apply` values and
/// whether the training values were constant.
pub fn standardize(train: &[f64], apply: &[f64]) -> (Vec<f64>, bool) {
    let rows: Vec<Vec<f64>> = train.iter().map(|&x| vec![x]).collect();
    let s = Standardizer::fit(&rows, &[0]);
    let out = apply
        .iter()
        .map(|&x| {
            let mut r = [x];
            s.apply(&mut r);
            r[0]
        })
        .collect();
    (out, s.stds[0] == 0.0)
}
