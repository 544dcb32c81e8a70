//! Gradient-boosted regression trees with logistic loss.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_loss, sigmoid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GBTParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values (added to the hessian sum).
    pub lambda: f64,
    pub max_bins: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GBTParams {
    fn default() -> Self {
        GBTParams {
            rounds: 200,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            max_bins: 64,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl GBTParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!("learning_rate {} outside (0, 1]", self.learning_rate)));
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda {} must be non-negative", self.lambda)));
        }
        if self.max_bins < 2 || self.max_bins > usize::from(u16::MAX) {
            return Err(Error::InvalidConfig(format!("max_bins {} outside [2, 65535]", self.max_bins)));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBTModel {
    pub params: GBTParams,
    pub n_features: usize,
    /// Prior log-odds of the positive class.
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Summed split gain per feature.
    pub importance_gain: Vec<f64>,
    pub importance_splits: Vec<u64>,
    /// Mean training log loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

impl GBTModel {
    pub fn predict_logit(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.predict_logit(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.predict_logit(x) > 0.0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct Binned {
    /// Per feature: ascending cut values; bin b holds x <= cuts[b] (last bin unbounded).
    cuts: Vec<Vec<f64>>,
    /// Column-major bin indices.
    bins: Vec<Vec<u16>>,
}

fn bin_features(x: &[Vec<f64>], n_features: usize, max_bins: usize) -> Binned {
    let n = x.len();
    let (cuts, bins) = (0..n_features)
        .into_par_iter()
        .map(|f| {
            let mut col: Vec<f64> = x.iter().map(|r| r[f]).collect();
            col.sort_by(f64::total_cmp);
            let mut distinct = col.clone();
            distinct.dedup();
            let cuts: Vec<f64> = if distinct.len() <= max_bins {
                distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
            } else {
                let mut c: Vec<f64> = (1..max_bins).map(|i| col[i * n / max_bins]).collect();
                c.dedup();
                if c.last() == col.last() {
                    c.pop();
                }
                c
            };
            let bins = x
                .iter()
                .map(|r| cuts.partition_point(|&c| c < r[f]) as u16)
                .collect();
            (cuts, bins)
        })
        .unzip();
    Binned { cuts, bins }
}

#[derive(Debug, Clone, Copy)]
struct SplitCandidate {
    gain: f64,
    feature: usize,
    bin: usize,
}

fn best_split_for_feature(
    binned: &Binned,
    f: usize,
    rows: &[usize],
    residual: &[f64],
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let nb = binned.cuts[f].len() + 1;
    if nb < 2 {
        return None;
    }
    let mut sum = vec![0.0; nb];
    let mut cnt = vec![0usize; nb];
    let col = &binned.bins[f];
    for &r in rows {
        let b = col[r] as usize;
        sum[b] += residual[r];
        cnt[b] += 1;
    }
    let total: f64 = sum.iter().sum();
    let n = rows.len();
    let parent = total * total / n as f64;
    let (mut sl, mut nl) = (0.0, 0usize);
    let mut best: Option<SplitCandidate> = None;
    for b in 0..nb - 1 {
        sl += sum[b];
        nl += cnt[b];
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let sr = total - sl;
        let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - parent;
        if gain > 1e-12 && best.is_none_or(|c| gain > c.gain) {
            best = Some(SplitCandidate { gain, feature: f, bin: b });
        }
    }
    best
}

struct Builder<'a> {
    binned: &'a Binned,
    params: &'a GBTParams,
    y: &'a [f64],
    logit: &'a mut [f64],
    residual: Vec<f64>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    nodes: Vec<Node>,
    importance_gain: &'a mut [f64],
    importance_splits: &'a mut [u64],
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.params.max_depth && rows.len() >= 2 * self.params.min_samples_leaf {
            let candidates: Vec<Option<SplitCandidate>> = (0..self.binned.cuts.len())
                .into_par_iter()
                .map(|f| best_split_for_feature(self.binned, f, &rows, &self.residual, self.params.min_samples_leaf))
                .collect();
            // Sequential reduction keeps the lowest feature index on ties.
            candidates
                .into_iter()
                .flatten()
                .fold(None::<SplitCandidate>, |best, c| match best {
                    Some(b) if b.gain >= c.gain => Some(b),
                    _ => Some(c),
                })
        } else {
            None
        };
        match split {
            Some(c) => {
                self.importance_gain[c.feature] += c.gain;
                self.importance_splits[c.feature] += 1;
                let col = &self.binned.bins[c.feature];
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&r| (col[r] as usize) <= c.bin);
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: c.feature,
                    threshold: self.binned.cuts[c.feature][c.bin],
                    left,
                    right,
                };
            }
            None => {
                let value = self.leaf_value(&rows);
                for &r in &rows {
                    self.logit[r] += value;
                }
                self.nodes[id] = Node::Leaf { value };
            }
        }
        id
    }

    /// Shrunken Newton step, halved until the leaf's loss does not increase.
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        let denom = h + self.params.lambda;
        if denom <= 0.0 {
            return 0.0;
        }
        let loss_at = |step: f64| -> f64 {
            rows.iter()
                .map(|&r| log_loss(self.y[r], sigmoid(self.logit[r] + step)))
                .sum()
        };
        let before = loss_at(0.0);
        let mut step = -self.params.learning_rate * g / denom;
        for _ in 0..40 {
            if !step.is_finite() {
                return 0.0;
            }
            if loss_at(step) <= before {
                return step;
            }
            step /= 2.0;
        }
        0.0
    }
}

fn mean_loss(y: &[f64], logit: &[f64]) -> f64 {
    y.iter().zip(logit).map(|(&y, &f)| log_loss(y, sigmoid(f))).sum::<f64>() / y.len() as f64
}

/// Fits `params.rounds` trees to the logistic-loss residuals of `y`
/// (true = positive class).
pub fn train_gbt(x: &[Vec<f64>], y: &[bool], params: &GBTParams) -> Result<GBTModel> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    let n_pos = y.iter().filter(|&&b| b).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::MissingClass(if n_pos == 0 { "positive" } else { "negative" }.into()));
    }
    let n_features = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != n_features) {
        return Err(Error::DimensionMismatch {
            index: r.len(),
            dim: n_features,
        });
    }
    let yf: Vec<f64> = y.iter().map(|&b| f64::from(u8::from(b))).collect();
    let prior = n_pos as f64 / y.len() as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let binned = bin_features(x, n_features, params.max_bins);
    let mut logit = vec![base_score; y.len()];
    let mut importance_gain = vec![0.0; n_features];
    let mut importance_splits = vec![0u64; n_features];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut train_loss = vec![mean_loss(&yf, &logit)];
    for _ in 0..params.rounds {
        let p: Vec<f64> = logit.iter().map(|&f| sigmoid(f)).collect();
        let grad: Vec<f64> = p.iter().zip(&yf).map(|(p, y)| p - y).collect();
        let hess: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let residual: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut b = Builder {
            binned: &binned,
            params,
            y: &yf,
            logit: &mut logit,
            residual,
            grad,
            hess,
            nodes: Vec::new(),
            importance_gain: &mut importance_gain,
            importance_splits: &mut importance_splits,
        };
        b.build((0..y.len()).collect(), 0);
        trees.push(Tree { nodes: b.nodes });
        train_loss.push(mean_loss(&yf, &logit));
    }
    Ok(GBTModel {
        params: params.clone(),
        n_features,
        base_score,
        trees,
        importance_gain,
        importance_splits,
        train_loss,
    })
}
