//! Connected-behavior prediction: per-user feature assembly, boosted trees
//! and logistic regression, and the feature ablation harness.

mod ablation;
mod features;
mod gbt;
mod logreg;

pub use ablation::{
    binary_eval, default_ablation_specs, majority_baseline, random_baseline, run_ablation, AblationConfig, AblationReport, AblationRow, NamedSpec, PredictorKind,
};
pub use features::{
    assemble_features, hash_text, standardize, ContentSource, FeatureSet, FeatureSpec, PredictData, Standardizer,
    UserFeatureSet, STATS_DIM,
};
pub use gbt::{train_gbt, GBTModel, GBTParams};
pub use logreg::{train_logreg, LogRegConfig, LogRegModel};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Account-level counters. Counts are unsigned by construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwitterStats {
    pub followers: u64,
    pub followings: u64,
    pub tweets_posted: u64,
    pub listed: u64,
    pub account_age_days: u64,
    pub protected: bool,
    pub verified: bool,
}

impl TwitterStats {
    /// Numeric counters followed by the two flags as 0/1.
    pub fn to_vec(&self) -> [f64; STATS_DIM] {
        [
            self.followers as f64,
            self.followings as f64,
            self.tweets_posted as f64,
            self.listed as f64,
            self.account_age_days as f64,
            f64::from(u8::from(self.protected)),
            f64::from(u8::from(self.verified)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub stats: TwitterStats,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub url: String,
}

pub fn write_users(path: &Path, users: &[UserRecord]) -> Result<()> {
    crate::corpus::write_jsonl(path, users)
}

pub fn read_users(path: &Path) -> Result<Vec<UserRecord>> {
    crate::corpus::read_jsonl(path)
}

/// Binary log loss, clamped away from 0 and 1.
pub(crate) fn log_loss(y: f64, p: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
