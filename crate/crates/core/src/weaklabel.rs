//! Hashtag lexicons, the hashtag stance scorer, corpus labeling and masking.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{hashtag_spans, Tweet};
use crate::error::{Error, Result};
use crate::report::KvReport;
use crate::stance::{StanceLabel, Topic};

/// Support and Against hashtag sets for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StanceLexicon {
    pub topic: Topic,
    pub support_tags: BTreeSet<String>,
    pub against_tags: BTreeSet<String>,
}

#[derive(Deserialize)]
struct LexiconFile {
    topic: String,
    support: Vec<String>,
    against: Vec<String>,
}

fn normalize_tag(tag: &str) -> Option<String> {
    let t = tag.trim().trim_start_matches('#').to_lowercase();
    (!t.is_empty()).then_some(t)
}

impl StanceLexicon {
    /// Tags are normalized (trimmed, `#` stripped, lowercased); empty tags are
    /// dropped and overlapping sets rejected.
    pub fn new<S, A>(topic: Topic, support: S, against: A) -> Result<Self>
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        A: IntoIterator,
        A::Item: AsRef<str>,
    {
        let support_tags: BTreeSet<String> = support
            .into_iter()
            .filter_map(|t| normalize_tag(t.as_ref()))
            .collect();
        let against_tags: BTreeSet<String> = against
            .into_iter()
            .filter_map(|t| normalize_tag(t.as_ref()))
            .collect();
        let overlap: Vec<String> = support_tags.intersection(&against_tags).cloned().collect();
        if !overlap.is_empty() {
            return Err(Error::OverlappingLexicon {
                topic: topic.0,
                tags: overlap,
            });
        }
        Ok(StanceLexicon {
            topic,
            support_tags,
            against_tags,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: LexiconFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("lexicon: {e}")))?;
        Self::new(Topic(file.topic), file.support, file.against)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let list = |s: &BTreeSet<String>| {
            s.iter()
                .map(|t| format!("\"{t}\""))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "topic = \"{}\"\nsupport = [{}]\nagainst = [{}]\n",
            self.topic,
            list(&self.support_tags),
            list(&self.against_tags)
        )
    }

    /// Same topic with the two sets exchanged.
    pub fn swapped(&self) -> Self {
        StanceLexicon {
            topic: self.topic.clone(),
            support_tags: self.against_tags.clone(),
            against_tags: self.support_tags.clone(),
        }
    }
}

/// Lexicons shipped with the crate for `trump`, `mask` and `racial`.
pub fn bundled_lexicon(topic: &Topic) -> Option<StanceLexicon> {
    let text = match topic.as_str() {
        "trump" => include_str!("../data/lexicons/trump.toml"),
        "mask" => include_str!("../data/lexicons/mask.toml"),
        "racial" => include_str!("../data/lexicons/racial.toml"),
        _ => return None,
    };
    Some(StanceLexicon::from_toml_str(text).expect("bundled lexicon is valid"))
}

/// Scores a tweet: +1 for every Support tag present, -1 for every Against
/// tag present. A tag repeated within one tweet counts once.
pub fn detect_stance(tweet: &Tweet, lexicon: &StanceLexicon) -> (StanceLabel, i64) {
    let present: HashSet<&str> = tweet.hashtags.iter().map(String::as_str).collect();
    let score: i64 = present
        .into_iter()
        .map(|tag| {
            if lexicon.support_tags.contains(tag) {
                1
            } else if lexicon.against_tags.contains(tag) {
                -1
            } else {
                0
            }
        })
        .sum();
    (StanceLabel::from_score(score), score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabeledTweet {
    #[serde(flatten)]
    pub tweet: Tweet,
    pub label: StanceLabel,
    pub score: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masked_text: Option<String>,
}

impl WeakLabeledTweet {
    /// Text with hashtags removed, computing it when not cached.
    pub fn masked(&self) -> std::borrow::Cow<'_, str> {
        match &self.masked_text {
            Some(m) => std::borrow::Cow::Borrowed(m.as_str()),
            None => std::borrow::Cow::Owned(mask_hashtags(&self.tweet.text)),
        }
    }
}

/// Labels every tweet in order. Masked text is filled in for later stages.
pub fn label_corpus(tweets: &[Tweet], lexicon: &StanceLexicon) -> Result<Vec<WeakLabeledTweet>> {
    tweets
        .iter()
        .map(|t| {
            if t.topic != lexicon.topic {
                return Err(Error::TopicMismatch {
                    expected: lexicon.topic.to_string(),
                    found: t.topic.to_string(),
                });
            }
            let (label, score) = detect_stance(t, lexicon);
            Ok(WeakLabeledTweet {
                tweet: t.clone(),
                label,
                score,
                masked_text: Some(mask_hashtags(&t.text)),
            })
        })
        .collect()
}

pub fn label_distribution(labeled: &[WeakLabeledTweet]) -> BTreeMap<StanceLabel, usize> {
    let mut out: BTreeMap<StanceLabel, usize> =
        StanceLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for w in labeled {
        *out.entry(w.label).or_insert(0) += 1;
    }
    out
}

pub fn distribution_report(topic: &Topic, dist: &BTreeMap<StanceLabel, usize>) -> KvReport {
    let total: usize = dist.values().sum();
    let mut r = KvReport::new("label_distribution");
    r.push("topic", topic).push("total", total);
    for (l, n) in dist {
        r.push(format!("count.{l}"), n);
    }
    for (l, n) in dist {
        let frac = if total == 0 { 0.0 } else { *n as f64 / total as f64 };
        r.push_f64(format!("fraction.{l}"), frac);
    }
    r
}

/// Deletes every hashtag token (with its `#`) and collapses whitespace.
///
/// Deleting `#a` from `#a#b` exposes `#b` at a token start, so deletion repeats
/// until no hashtag remains; the result is a fixed point.
pub fn mask_hashtags(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let spans = hashtag_spans(&current);
        if spans.is_empty() {
            break;
        }
        let mut next = String::with_capacity(current.len());
        let mut pos = 0;
        for (s, e) in spans {
            next.push_str(&current[pos..s]);
            pos = e;
        }
        next.push_str(&current[pos..]);
        current = next;
    }
    current.split_whitespace().collect::<Vec<_>>().join(" ")
}
