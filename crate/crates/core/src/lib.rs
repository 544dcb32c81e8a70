//! Distantly supervised stance detection and connected-behavior analysis.
//!
//! The crate is organized as a pipeline of independent stages:
//!
//! * [`corpus`]: tweet ingest, cleaning, summary statistics and a seeded
//!   synthetic population generator.
//! * [`weaklabel`]: hashtag lexicons, the hashtag stance scorer and masking.
//! * [`textmodel`]: tokenization, sparse features, sampling, Naive Bayes and
//!   linear max-margin classifiers, evaluation.
//! * [`profile`]: per-user stance aggregation and categorization.
//! * [`behavior`]: Spearman correlations, conditional probability tables.
//! * [`network`]: retweet graphs and stance assortativity.
//! * [`predict`]: user features, gradient-boosted trees and ablations.
//! * [`pipeline`]: configuration and end-to-end orchestration.

pub mod behavior;
pub mod corpus;
pub mod error;
pub mod network;
pub mod pipeline;
pub mod predict;
pub mod profile;
pub mod report;
pub mod seed;
pub mod stance;
pub mod textmodel;
pub mod weaklabel;

pub use error::{Error, Result};
pub use stance::{StanceLabel, Topic};
