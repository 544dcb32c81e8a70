use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Topic identifier, e.g. `trump`, `mask`, `racial`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Topic(pub String);

impl Topic {
    pub fn new(name: impl Into<String>) -> Self {
        Topic(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Topic {
    fn from(s: &str) -> Self {
        Topic(s.to_string())
    }
}

/// Three-way stance of a single tweet.
///
/// The declaration order is the fixed class order used everywhere: confusion
/// matrices, score vectors and argmax tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StanceLabel {
    Against,
    NonOpinionated,
    Support,
}

impl StanceLabel {
    pub const ALL: [StanceLabel; 3] = [
        StanceLabel::Against,
        StanceLabel::NonOpinionated,
        StanceLabel::Support,
    ];

    pub fn index(self) -> usize {
        match self {
            StanceLabel::Against => 0,
            StanceLabel::NonOpinionated => 1,
            StanceLabel::Support => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Label implied by the sign of a hashtag score.
    pub fn from_score(score: i64) -> Self {
        match score.cmp(&0) {
            std::cmp::Ordering::Greater => StanceLabel::Support,
            std::cmp::Ordering::Equal => StanceLabel::NonOpinionated,
            std::cmp::Ordering::Less => StanceLabel::Against,
        }
    }

    /// Support <-> Against, NonOpinionated fixed.
    pub fn flipped(self) -> Self {
        match self {
            StanceLabel::Against => StanceLabel::Support,
            StanceLabel::Support => StanceLabel::Against,
            StanceLabel::NonOpinionated => StanceLabel::NonOpinionated,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Against => "against",
            StanceLabel::NonOpinionated => "non_opinionated",
            StanceLabel::Support => "support",
        }
    }
}

impl fmt::Display for StanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StanceLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "against" | "a" => Ok(StanceLabel::Against),
            "non_opinionated" | "nonopinionated" | "non-opinionated" | "neutral" | "n" => {
                Ok(StanceLabel::NonOpinionated)
            }
            "support" | "s" => Ok(StanceLabel::Support),
            other => Err(Error::Parse(format!("unknown stance label `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_sign_maps_to_label() {
        assert_eq!(StanceLabel::from_score(3), StanceLabel::Support);
        assert_eq!(StanceLabel::from_score(0), StanceLabel::NonOpinionated);
        assert_eq!(StanceLabel::from_score(-5), StanceLabel::Against);
    }

    #[test]
    fn class_order_is_fixed() {
        assert!(StanceLabel::Against < StanceLabel::NonOpinionated);
        assert!(StanceLabel::NonOpinionated < StanceLabel::Support);
        for (i, l) in StanceLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(StanceLabel::from_index(i), Some(*l));
        }
    }

    #[test]
    fn parse_round_trips() {
        for l in StanceLabel::ALL {
            assert_eq!(l.as_str().parse::<StanceLabel>().unwrap(), l);
        }
        assert!("maybe".parse::<StanceLabel>().is_err());
    }
}
