//! Seeded synthetic populations with planted cross-topic coupling.
//!
//! Each user draws a latent ideology vector `z ~ N(0, C)` where `C` is the
//! coupling matrix. On topic `k` the user's true stance is the sign of `z_k`
//! and each opinionated tweet is Support with probability
//! `Phi(conviction * z_k)`, so the user's support share is a monotone
//! function of the latent and inherits its rank correlation.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::IndexedRandom;
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::Tweet;
use crate::error::{Error, Result};
use crate::predict::{TwitterStats, UserRecord};
use crate::seed;
use crate::stance::{StanceLabel, Topic};
use crate::weaklabel::StanceLexicon;

/// Words and stance-expressing tags for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicVocabulary {
    pub support_words: Vec<String>,
    pub against_words: Vec<String>,
    pub neutral_words: Vec<String>,
    pub support_tags: Vec<String>,
    pub against_tags: Vec<String>,
}

impl TopicVocabulary {
    /// Pseudo-words of the form `<topic>sup07`, `<topic>agn07`, `<topic>neu07`.
    pub fn generated(topic: &Topic, words_per_class: usize, lexicon: Option<&StanceLexicon>) -> Self {
        let make = |kind: &str| -> Vec<String> {
            (0..words_per_class)
                .map(|i| format!("{}{kind}{i:02}", topic.as_str()))
                .collect()
        };
        let (support_tags, against_tags) = match lexicon {
            Some(lex) => (
                lex.support_tags.iter().cloned().collect(),
                lex.against_tags.iter().cloned().collect(),
            ),
            None => (
                (0..3).map(|i| format!("{}yes{i}", topic.as_str())).collect(),
                (0..3).map(|i| format!("{}no{i}", topic.as_str())).collect(),
            ),
        };
        TopicVocabulary {
            support_words: make("sup"),
            against_words: make("agn"),
            neutral_words: make("neu"),
            support_tags,
            against_tags,
        }
    }

    pub fn lexicon(&self, topic: &Topic) -> Result<StanceLexicon> {
        StanceLexicon::new(
            topic.clone(),
            self.support_tags.iter().cloned(),
            self.against_tags.iter().cloned(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_users: usize,
    /// Inclusive range of tweets per user per topic.
    pub tweets_per_user_range: (usize, usize),
    pub topics: Vec<Topic>,
    pub ideology_coupling: Vec<Vec<f64>>,
    /// Probability that an opinionated tweet carries a stance tag.
    pub hashtag_emission_rate: f64,
    pub vocabulary: BTreeMap<Topic, TopicVocabulary>,
    pub seed: u64,
    /// Fraction of tweets that express a stance; the rest are neutral filler.
    pub opinion_rate: f64,
    /// Probability that a word of an opinionated tweet comes from the stance
    /// vocabulary rather than the topic's neutral words.
    pub word_signal: f64,
    /// Scale applied to the latent before the normal CDF.
    pub conviction: f64,
    pub words_per_tweet: (usize, usize),
    pub retweets_per_user_range: (usize, usize),
    /// Probability a retweet targets a user with the same true stance.
    pub retweet_homophily: f64,
    pub history_tweets_range: (usize, usize),
    /// Probability a history word leans with the user's stance on the first topic.
    pub history_signal: f64,
    /// Probability a profile description carries one stance word of the first topic.
    pub profile_signal: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec::three_topic(1000, 42)
    }
}

pub const DEFAULT_TOPICS: [&str; 3] = ["trump", "mask", "racial"];

/// Target-mask and target-racial negative, mask-racial positive.
pub const DEFAULT_COUPLING: [[f64; 3]; 3] = [
    [1.0, -0.97, -0.97],
    [-0.97, 1.0, 0.94],
    [-0.97, 0.94, 1.0],
];

impl SyntheticSpec {
    /// Three-topic population with the bundled lexicons and planted coupling.
    pub fn three_topic(n_users: usize, seed: u64) -> Self {
        let topics: Vec<Topic> = DEFAULT_TOPICS.iter().map(|t| Topic::from(*t)).collect();
        let vocabulary = topics
            .iter()
            .map(|t| {
                let lex = crate::weaklabel::bundled_lexicon(t);
                (t.clone(), TopicVocabulary::generated(t, 30, lex.as_ref()))
            })
            .collect();
        SyntheticSpec {
            n_users,
            tweets_per_user_range: (16, 40),
            topics,
            ideology_coupling: DEFAULT_COUPLING.iter().map(|r| r.to_vec()).collect(),
            hashtag_emission_rate: 0.5,
            vocabulary,
            seed,
            opinion_rate: 0.7,
            word_signal: 0.5,
            conviction: 3.0,
            words_per_tweet: (6, 12),
            retweets_per_user_range: (0, 4),
            retweet_homophily: 0.85,
            history_tweets_range: (5, 15),
            history_signal: 0.3,
            profile_signal: 0.3,
        }
    }

    fn check_rate(name: &str, v: f64) -> Result<()> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {v}")))
        }
    }

    fn check_range(name: &str, r: (usize, usize)) -> Result<()> {
        if r.0 <= r.1 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{name} range {r:?} is reversed")))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.topics.len();
        if k == 0 {
            return Err(Error::InvalidConfig("no topics".into()));
        }
        if self.ideology_coupling.len() != k || self.ideology_coupling.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidConfig(format!(
                "coupling matrix must be {k}x{k}"
            )));
        }
        for i in 0..k {
            if (self.ideology_coupling[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig("coupling diagonal must be 1".into()));
            }
            for j in 0..k {
                let v = self.ideology_coupling[i][j];
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidConfig(format!(
                        "coupling entry ({i},{j}) = {v} outside [-1, 1]"
                    )));
                }
                if (v - self.ideology_coupling[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig("coupling matrix must be symmetric".into()));
                }
            }
        }
        for t in &self.topics {
            let v = self
                .vocabulary
                .get(t)
                .ok_or_else(|| Error::InvalidConfig(format!("no vocabulary for topic {t}")))?;
            if v.support_words.is_empty()
                || v.against_words.is_empty()
                || v.neutral_words.is_empty()
                || v.support_tags.is_empty()
                || v.against_tags.is_empty()
            {
                return Err(Error::InvalidConfig(format!(
                    "vocabulary for topic {t} has an empty word or tag list"
                )));
            }
        }
        Self::check_rate("hashtag_emission_rate", self.hashtag_emission_rate)?;
        Self::check_rate("opinion_rate", self.opinion_rate)?;
        Self::check_rate("word_signal", self.word_signal)?;
        Self::check_rate("retweet_homophily", self.retweet_homophily)?;
        Self::check_rate("history_signal", self.history_signal)?;
        Self::check_rate("profile_signal", self.profile_signal)?;
        Self::check_range("tweets_per_user_range", self.tweets_per_user_range)?;
        Self::check_range("words_per_tweet", self.words_per_tweet)?;
        Self::check_range("retweets_per_user_range", self.retweets_per_user_range)?;
        Self::check_range("history_tweets_range", self.history_tweets_range)?;
        if self.words_per_tweet.0 == 0 {
            return Err(Error::InvalidConfig("words_per_tweet must be at least 1".into()));
        }
        if !(self.conviction.is_finite() && self.conviction > 0.0) {
            return Err(Error::InvalidConfig("conviction must be positive".into()));
        }
        Ok(())
    }

    /// Matrix square root `V diag(sqrt(max(l, 0))) V^T` of the coupling
    /// matrix; fails when an eigenvalue is meaningfully negative.
    fn coupling_root(&self) -> Result<DMatrix<f64>> {
        let k = self.topics.len();
        let m = DMatrix::from_fn(k, k, |i, j| self.ideology_coupling[i][j]);
        let eig = SymmetricEigen::new(m);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NotPositiveSemiDefinite { min_eigenvalue: min });
        }
        let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        Ok(&eig.eigenvectors * sqrt_vals * eig.eigenvectors.transpose())
    }
}

/// What the generator planted, for oracle checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub topics: Vec<Topic>,
    /// user -> topic -> sign of the latent component.
    pub user_stances: BTreeMap<String, BTreeMap<Topic, StanceLabel>>,
    /// user -> latent ideology vector, in topic order.
    pub latent: BTreeMap<String, Vec<f64>>,
    /// Expressed stance of every original (non-retweet) topic tweet.
    pub tweet_labels: BTreeMap<String, StanceLabel>,
}

impl GroundTruth {
    /// (n_support, n_against) of a user's expressed tweets on a topic.
    pub fn tally(&self, tweets: &[Tweet], user: &str, topic: &Topic) -> (usize, usize) {
        let mut s = 0;
        let mut a = 0;
        for t in tweets.iter().filter(|t| t.user_id == user && &t.topic == topic) {
            match self.tweet_labels.get(&t.tweet_id) {
                Some(StanceLabel::Support) => s += 1,
                Some(StanceLabel::Against) => a += 1,
                _ => {}
            }
        }
        (s, a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Per-topic tweets, originals and retweets interleaved per user.
    pub tweets: BTreeMap<Topic, Vec<Tweet>>,
    /// Recent non-topic posts per user.
    pub history: Vec<Tweet>,
    pub users: Vec<UserRecord>,
    pub truth: GroundTruth,
}

impl SyntheticCorpus {
    pub fn lexicons(&self, spec: &SyntheticSpec) -> Result<Vec<StanceLexicon>> {
        spec.topics
            .iter()
            .map(|t| spec.vocabulary[t].lexicon(t))
            .collect()
    }
}

pub const HISTORY_TOPIC: &str = "history";

const SHARED_WORDS: &[&str] = &[
    "people", "today", "news", "time", "country", "week", "vote", "state", "city", "life",
    "world", "family", "friends", "video", "story", "media", "think", "know", "really", "right",
];

const PROFILE_WORDS: &[&str] = &[
    "dad", "mom", "teacher", "writer", "fan", "coffee", "music", "travel", "sports", "engineer",
    "nurse", "student", "artist", "veteran", "reader", "gamer", "runner", "chef", "photographer", "lawyer",
];

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn sentence(
    rng: &mut seed::Rng,
    len: usize,
    signal: f64,
    stance_words: &[String],
    neutral: &[String],
) -> Vec<String> {
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < signal {
                stance_words.choose(rng).expect("non-empty").clone()
            } else if rng.random::<f64>() < 0.2 {
                SHARED_WORDS.choose(rng).expect("non-empty").to_string()
            } else {
                neutral.choose(rng).expect("non-empty").clone()
            }
        })
        .collect()
}

/// Generates a deterministic population for `spec`.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let root = spec.coupling_root()?;
    let k = spec.topics.len();
    let mut rng = seed::rng(spec.seed);
    let base: DateTime<Utc> = Utc.with_ymd_and_hms(2020, 11, 3, 0, 0, 0).unwrap();

    let user_ids: Vec<String> = (0..spec.n_users).map(|u| format!("u{u:06}")).collect();
    let mut latent = Vec::with_capacity(spec.n_users);
    for _ in 0..spec.n_users {
        let eps: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z: Vec<f64> = (0..k)
            .map(|i| (0..k).map(|j| root[(i, j)] * eps[j]).sum())
            .collect();
        latent.push(z);
    }
    let stance_of = |z: f64| {
        if z >= 0.0 {
            StanceLabel::Support
        } else {
            StanceLabel::Against
        }
    };

    // Users grouped by true stance per topic, for retweet targets.
    let mut pools: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; k];
    for (u, z) in latent.iter().enumerate() {
        for (ti, pool) in pools.iter_mut().enumerate() {
            pool[usize::from(z[ti] >= 0.0)].push(u);
        }
    }

    let mut truth = GroundTruth {
        topics: spec.topics.clone(),
        ..Default::default()
    };
    let mut tweets: BTreeMap<Topic, Vec<Tweet>> =
        spec.topics.iter().map(|t| (t.clone(), Vec::new())).collect();

    for (u, uid) in user_ids.iter().enumerate() {
        let z = &latent[u];
        truth.latent.insert(uid.clone(), z.clone());
        let stances = truth.user_stances.entry(uid.clone()).or_default();
        for (ti, topic) in spec.topics.iter().enumerate() {
            stances.insert(topic.clone(), stance_of(z[ti]));
            let vocab = &spec.vocabulary[topic];
            let p_support = std_normal_cdf(spec.conviction * z[ti]);
            let n = rng.random_range(spec.tweets_per_user_range.0..=spec.tweets_per_user_range.1);
            let out = tweets.get_mut(topic).expect("topic present");
            for j in 0..n {
                let len = rng.random_range(spec.words_per_tweet.0..=spec.words_per_tweet.1);
                let opinionated = rng.random::<f64>() < spec.opinion_rate;
                let (label, mut words) = if opinionated {
                    let label = if rng.random::<f64>() < p_support {
                        StanceLabel::Support
                    } else {
                        StanceLabel::Against
                    };
                    let stance_words = match label {
                        StanceLabel::Support => &vocab.support_words,
                        _ => &vocab.against_words,
                    };
                    let words = sentence(&mut rng, len, spec.word_signal, stance_words, &vocab.neutral_words);
                    (label, words)
                } else {
                    let words = sentence(&mut rng, len, 0.0, &vocab.neutral_words, &vocab.neutral_words);
                    (StanceLabel::NonOpinionated, words)
                };
                if opinionated && rng.random::<f64>() < spec.hashtag_emission_rate {
                    let tags = match label {
                        StanceLabel::Support => &vocab.support_tags,
                        _ => &vocab.against_tags,
                    };
                    words.push(format!("#{}", tags.choose(&mut rng).expect("non-empty")));
                }
                if rng.random::<f64>() < 0.1 {
                    words.push(format!("https://t.co/{}{j}", uid));
                }
                let text = words.join(" ");
                let tweet_id = format!("{}-{uid}-{j:04}", topic.as_str());
                truth.tweet_labels.insert(tweet_id.clone(), label);
                out.push(Tweet {
                    tweet_id,
                    user_id: uid.clone(),
                    topic: topic.clone(),
                    hashtags: super::extract_hashtags(&text),
                    text,
                    created_at: base + Duration::minutes((u * 97 + j * 13) as i64 % 43_200),
                    is_retweet: false,
                    retweeted_user_id: None,
                });
            }

            let n_rt = rng.random_range(spec.retweets_per_user_range.0..=spec.retweets_per_user_range.1);
            let own = usize::from(z[ti] >= 0.0);
            for j in 0..n_rt {
                let side = if rng.random::<f64>() < spec.retweet_homophily { own } else { 1 - own };
                let pool = &pools[ti][side];
                let Some(&target) = pool.choose(&mut rng) else { continue };
                if target == u {
                    continue;
                }
                let text = format!("RT @{} {}", user_ids[target], vocab.neutral_words.choose(&mut rng).expect("non-empty"));
                out.push(Tweet {
                    tweet_id: format!("{}-{uid}-rt{j:03}", topic.as_str()),
                    user_id: uid.clone(),
                    topic: topic.clone(),
                    hashtags: super::extract_hashtags(&text),
                    text,
                    created_at: base + Duration::minutes((u * 31 + j * 7) as i64 % 43_200),
                    is_retweet: true,
                    retweeted_user_id: Some(user_ids[target].clone()),
                });
            }
        }
    }

    // History and profiles lean with the first topic's latent.
    let history_topic = Topic::from(HISTORY_TOPIC);
    let lean_left: Vec<String> = (0..20).map(|i| format!("histleft{i:02}")).collect();
    let lean_right: Vec<String> = (0..20).map(|i| format!("histright{i:02}")).collect();
    let general: Vec<String> = (0..60).map(|i| format!("general{i:02}")).collect();
    let mut history = Vec::new();
    let mut users = Vec::with_capacity(spec.n_users);
    let followers: LogNormal<f64> = LogNormal::new(5.0, 1.5).expect("valid lognormal");
    for (u, uid) in user_ids.iter().enumerate() {
        let lean = if latent[u][0] >= 0.0 { &lean_right } else { &lean_left };
        let n = rng.random_range(spec.history_tweets_range.0..=spec.history_tweets_range.1);
        for j in 0..n {
            let len = rng.random_range(spec.words_per_tweet.0..=spec.words_per_tweet.1);
            let words = sentence(&mut rng, len, spec.history_signal, lean, &general);
            history.push(Tweet {
                tweet_id: format!("{HISTORY_TOPIC}-{uid}-{j:04}"),
                user_id: uid.clone(),
                topic: history_topic.clone(),
                hashtags: Vec::new(),
                text: words.join(" "),
                created_at: base - Duration::days(1 + (u as i64 * 3 + j as i64) % 300),
                is_retweet: false,
                retweeted_user_id: None,
            });
        }

        let mut desc: Vec<String> = (0..rng.random_range(2..=5))
            .map(|_| PROFILE_WORDS.choose(&mut rng).expect("non-empty").to_string())
            .collect();
        if rng.random::<f64>() < spec.profile_signal {
            let first = &spec.vocabulary[&spec.topics[0]];
            let words = if latent[u][0] >= 0.0 { &first.support_words } else { &first.against_words };
            desc.push(words.choose(&mut rng).expect("non-empty").clone());
        }
        let stats = TwitterStats {
            followers: followers.sample(&mut rng).round() as u64,
            followings: followers.sample(&mut rng).round() as u64,
            tweets_posted: (followers.sample(&mut rng) * 10.0).round() as u64,
            listed: rng.random_range(0..50),
            account_age_days: rng.random_range(30..5000),
            protected: rng.random::<f64>() < 0.05,
            verified: rng.random::<f64>() < 0.02,
        };
        users.push(UserRecord {
            user_id: uid.clone(),
            stats,
            description: desc.join(" "),
            url: format!("https://example.org/{}", PROFILE_WORDS.choose(&mut rng).expect("non-empty")),
        });
    }

    Ok(SyntheticCorpus {
        tweets,
        history,
        users,
        truth,
    })
}
