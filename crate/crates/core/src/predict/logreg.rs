//! L2-regularized binary logistic regression trained by SGD.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2: 1e-4,
            epochs: 30,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    /// Unregularized intercept.
    pub bias: f64,
}

impl LogRegModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.logit(x) > 0.0
    }
}

pub fn train_logreg(x: &[Vec<f64>], y: &[bool], cfg: &LogRegConfig) -> Result<LogRegModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) || !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidConfig("l2 must be >= 0 and learning_rate > 0".into()));
    }
    let n_pos = y.iter().filter(|&&b| b).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::MissingClass(if n_pos == 0 { "positive" } else { "negative" }.into()));
    }
    let dim = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { index: r.len(), dim });
    }
    let mut rng = seed::rng(cfg.seed);
    let mut w = vec![0.0; dim];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = cfg.learning_rate
                / (1.0 + cfg.learning_rate * cfg.l2 * t as f64)
                / (1.0 + t as f64 / x.len() as f64).sqrt();
            t += 1;
            let p = sigmoid(bias + w.iter().zip(&x[i]).map(|(a, b)| a * b).sum::<f64>());
            let err = p - f64::from(u8::from(y[i]));
            let decay = (1.0 - eta * cfg.l2).max(0.0);
            for (wj, xj) in w.iter_mut().zip(&x[i]) {
                *wj = *wj * decay - eta * err * xj;
            }
            bias -= eta * err;
        }
    }
    Ok(LogRegModel { weights: w, bias })
}
