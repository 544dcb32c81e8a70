use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::stance::StanceLabel;
use crate::weaklabel::WeakLabeledTweet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Random,
    Stratified,
}

impl SamplingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingMethod::Random => "random",
            SamplingMethod::Stratified => "stratified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub method: SamplingMethod,
    pub total: usize,
    pub seed: u64,
}

/// Anything carrying a three-way stance label.
pub trait Labeled {
    fn stance(&self) -> StanceLabel;
}

impl Labeled for WeakLabeledTweet {
    fn stance(&self) -> StanceLabel {
        self.label
    }
}

impl<T> Labeled for (T, StanceLabel) {
    fn stance(&self) -> StanceLabel {
        self.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome<T> {
    pub items: Vec<T>,
    /// Classes that could not supply their quota, with the missing count.
    pub shortfalls: BTreeMap<StanceLabel, usize>,
}

/// Draws `floor(total / 3)` items per class without replacement. A class with
/// fewer items is exhausted and its shortfall reported.
pub fn stratified_sample<T: Labeled + Clone>(items: &[T], plan: &SamplingPlan) -> Result<SampleOutcome<T>> {
    if plan.method != SamplingMethod::Stratified {
        return Err(Error::InvalidConfig("stratified_sample needs a stratified plan".into()));
    }
    if plan.total < 3 {
        return Err(Error::InvalidConfig("stratified total must be at least 3".into()));
    }
    let mut by_class: BTreeMap<StanceLabel, Vec<usize>> = BTreeMap::new();
    for (i, it) in items.iter().enumerate() {
        by_class.entry(it.stance()).or_default().push(i);
    }
    for l in StanceLabel::ALL {
        if by_class.get(&l).is_none_or(Vec::is_empty) {
            return Err(Error::MissingClass(l.to_string()));
        }
    }
    let quota = plan.total / 3;
    let mut rng = seed::rng(plan.seed);
    let mut picked = Vec::with_capacity(quota * 3);
    let mut shortfalls = BTreeMap::new();
    for (label, pool) in &by_class {
        if pool.len() < quota {
            shortfalls.insert(*label, quota - pool.len());
            picked.extend(pool.iter().copied());
        } else {
            picked.extend(index::sample(&mut rng, pool.len(), quota).into_iter().map(|j| pool[j]));
        }
    }
    picked.shuffle(&mut rng);
    Ok(SampleOutcome {
        items: picked.into_iter().map(|i| items[i].clone()).collect(),
        shortfalls,
    })
}

/// Uniform sample without replacement.
pub fn random_sample<T: Clone>(items: &[T], plan: &SamplingPlan) -> Result<Vec<T>> {
    if plan.total > items.len() {
        return Err(Error::SampleTooLarge {
            requested: plan.total,
            available: items.len(),
        });
    }
    let mut rng = seed::rng(plan.seed);
    Ok(index::sample(&mut rng, items.len(), plan.total)
        .into_iter()
        .map(|i| items[i].clone())
        .collect())
}

/// Seeded shuffle split into `floor(fraction * n)` train and the rest test.
pub fn split_train_test<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = items.len();
    let n_train = ((train_fraction * n as f64) + 1e-9).floor().min(n as f64) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let train = order[..n_train].iter().map(|&i| items[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| items[i].clone()).collect();
    (train, test)
}
