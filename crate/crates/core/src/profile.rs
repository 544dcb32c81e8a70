//! Per-user, per-topic stance aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stance::{StanceLabel, Topic};
use crate::weaklabel::WeakLabeledTweet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StanceCategory {
    Against,
    Weak,
    Support,
}

impl StanceCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            StanceCategory::Against => "against",
            StanceCategory::Weak => "weak",
            StanceCategory::Support => "support",
        }
    }

    pub fn is_opinionated(self) -> bool {
        self != StanceCategory::Weak
    }
}

impl fmt::Display for StanceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "against" => Ok(StanceCategory::Against),
            "weak" => Ok(StanceCategory::Weak),
            "support" => Ok(StanceCategory::Support),
            other => Err(Error::Parse(format!("unknown category `{other}`"))),
        }
    }
}

/// Inclusive support-share thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub upper: f64,
    pub lower: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            upper: 0.55,
            lower: 0.45,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if 0.0 <= self.lower && self.lower < self.upper && self.upper <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "thresholds must satisfy 0 <= lower < upper <= 1, got {} / {}",
                self.lower, self.upper
            )))
        }
    }

    /// Thresholds reflected around one half.
    pub fn mirrored(&self) -> Self {
        ThresholdConfig {
            upper: 1.0 - self.lower,
            lower: 1.0 - self.upper,
        }
    }
}

/// Where tweet-level labels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Hashtag,
    Classifier,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Hashtag => "hashtag",
            Provenance::Classifier => "classifier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StanceCounts {
    pub n_support: usize,
    pub n_against: usize,
}

impl StanceCounts {
    pub fn total(&self) -> usize {
        self.n_support + self.n_against
    }

    pub fn support_pct(&self) -> Option<f64> {
        (self.total() > 0).then(|| self.n_support as f64 / self.total() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTopicStance {
    pub counts: StanceCounts,
    pub support_pct: f64,
    pub category: StanceCategory,
}

/// Counts Support and Against labels per user. Non-opinionated labels are
/// ignored and users without opinionated labels are omitted.
pub fn aggregate_user_stances<'a, I>(labels: I) -> BTreeMap<String, StanceCounts>
where
    I: IntoIterator<Item = (&'a str, StanceLabel)>,
{
    let mut out: BTreeMap<String, StanceCounts> = BTreeMap::new();
    for (user, label) in labels {
        let slot = match label {
            StanceLabel::NonOpinionated => continue,
            _ => out.entry(user.to_string()).or_default(),
        };
        match label {
            StanceLabel::Support => slot.n_support += 1,
            StanceLabel::Against => slot.n_against += 1,
            StanceLabel::NonOpinionated => unreachable!(),
        }
    }
    out
}

pub fn aggregate_weak_labels(labeled: &[WeakLabeledTweet]) -> BTreeMap<String, StanceCounts> {
    aggregate_user_stances(labeled.iter().map(|w| (w.tweet.user_id.as_str(), w.label)))
}

const EPS: f64 = 1e-12;

pub fn categorize_user(user: &str, counts: StanceCounts, cfg: &ThresholdConfig) -> Result<StanceCategory> {
    let pct = counts
        .support_pct()
        .ok_or_else(|| Error::NoOpinionatedTweets(user.to_string()))?;
    Ok(categorize_pct(pct, cfg))
}

pub fn categorize_pct(pct: f64, cfg: &ThresholdConfig) -> StanceCategory {
    if pct >= cfg.upper - EPS {
        StanceCategory::Support
    } else if pct <= cfg.lower + EPS {
        StanceCategory::Against
    } else {
        StanceCategory::Weak
    }
}

/// Per-topic user stances from one label source.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub provenance: Provenance,
    pub topics: BTreeMap<Topic, BTreeMap<String, UserTopicStance>>,
}

impl ProfileTable {
    pub fn new(provenance: Provenance) -> Self {
        ProfileTable {
            provenance,
            topics: BTreeMap::new(),
        }
    }

    pub fn insert_topic(&mut self, topic: Topic, counts: &BTreeMap<String, StanceCounts>, cfg: &ThresholdConfig) {
        let entries = counts
            .iter()
            .filter_map(|(u, c)| {
                let pct = c.support_pct()?;
                Some((
                    u.clone(),
                    UserTopicStance {
                        counts: *c,
                        support_pct: pct,
                        category: categorize_pct(pct, cfg),
                    },
                ))
            })
            .collect();
        self.topics.insert(topic, entries);
    }

    pub fn get(&self, topic: &Topic, user: &str) -> Option<&UserTopicStance> {
        self.topics.get(topic)?.get(user)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["user_id", "topic", "n_support", "n_against", "support_pct", "category"])?;
        for (topic, users) in &self.topics {
            for (u, s) in users {
                w.write_record([
                    u.as_str(),
                    topic.as_str(),
                    &s.counts.n_support.to_string(),
                    &s.counts.n_against.to_string(),
                    &format!("{:.6}", s.support_pct),
                    s.category.as_str(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a profile table; support_pct is recomputed from the counts.
    pub fn read_csv(path: &Path, provenance: Provenance) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut table = ProfileTable::new(provenance);
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("short profile row {rec:?}")));
            let parse_n = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
            let counts = StanceCounts {
                n_support: parse_n(field(2)?)?,
                n_against: parse_n(field(3)?)?,
            };
            let user = field(0)?;
            let support_pct = counts
                .support_pct()
                .ok_or_else(|| Error::NoOpinionatedTweets(user.to_string()))?;
            table.topics.entry(Topic::from(field(1)?)).or_default().insert(
                field(0)?.to_string(),
                UserTopicStance {
                    counts,
                    support_pct,
                    category: field(5)?.parse()?,
                },
            );
        }
        Ok(table)
    }
}

/// A user with a non-Weak category on every joined topic.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedUser {
    pub user_id: String,
    /// In the order of the `topics` argument.
    pub stances: Vec<UserTopicStance>,
}

/// Inner join over users that are opinionated on all `topics`, sorted by id.
pub fn opinionated_user_join(table: &ProfileTable, topics: &[Topic]) -> Result<Vec<JoinedUser>> {
    if topics.len() < 2 {
        return Err(Error::InvalidConfig("a join needs at least two topics".into()));
    }
    let empty = BTreeMap::new();
    let per_topic: Vec<&BTreeMap<String, UserTopicStance>> = topics
        .iter()
        .map(|t| table.topics.get(t).unwrap_or(&empty))
        .collect();
    let candidates: BTreeSet<&String> = per_topic[0].keys().collect();
    let mut out = Vec::new();
    for user in candidates {
        let stances: Option<Vec<UserTopicStance>> = per_topic
            .iter()
            .map(|m| m.get(user).copied().filter(|s| s.category.is_opinionated()))
            .collect();
        if let Some(stances) = stances {
            out.push(JoinedUser {
                user_id: user.clone(),
                stances,
            });
        }
    }
    Ok(out)
}
