//! One-vs-rest linear max-margin classifier trained with Pegasos-style
//! stochastic subgradient descent on the L2-regularized hinge loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Prediction, SparseVector, StanceClassifier, Vocabulary};
use crate::error::{Error, Result};
use crate::seed;
use crate::stance::StanceLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearConfig {
    pub epochs: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Return the mean of the end-of-epoch iterates instead of the last one.
    pub average: bool,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            epochs: 10,
            lambda: 1e-3,
            seed: 0,
            average: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub config: LinearConfig,
    pub classes: Vec<StanceLabel>,
    /// `[class]` weight vectors of length `vocab + 1`; the last entry is the
    /// bias (a constant feature, regularized with the rest).
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    params: LinearParams,
    vocab: Vocabulary,
}

impl LinearModel {
    pub fn from_params(params: LinearParams, vocab: Vocabulary) -> Result<Self> {
        if params.classes.is_empty() {
            return Err(Error::UntrainedModel);
        }
        if params.weights.len() != 3 || params.weights.iter().any(|w| w.len() != vocab.len() + 1) {
            return Err(Error::Parse("linear weights do not match the vocabulary".into()));
        }
        if params.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::Parse("non-finite linear weight".into()));
        }
        Ok(LinearModel { params, vocab })
    }

    pub fn params(&self) -> &LinearParams {
        &self.params
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn weights(&self, class: StanceLabel) -> &[f64] {
        &self.params.weights[class.index()]
    }

    pub fn bias(&self, class: StanceLabel) -> f64 {
        *self.params.weights[class.index()].last().expect("bias entry")
    }

    pub fn margins(&self, x: &SparseVector) -> Result<[f64; 3]> {
        if let Some(max) = x.max_index() {
            if max >= self.vocab.len() {
                return Err(Error::DimensionMismatch {
                    index: max,
                    dim: self.vocab.len(),
                });
            }
        }
        let mut out = [f64::NEG_INFINITY; 3];
        for c in &self.params.classes {
            let w = &self.params.weights[c.index()];
            out[c.index()] = x.dot(w) + w[self.vocab.len()];
        }
        Ok(out)
    }
}

impl StanceClassifier for LinearModel {
    fn classify(&self, x: &SparseVector) -> Result<Prediction> {
        let scores = self.margins(x)?;
        Ok(Prediction {
            label: super::argmax_label(&scores),
            scores,
        })
    }
}

/// Weight vector stored as `scale * v` so the shrink step is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    sq_norm: f64,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            v: vec![0.0; dim],
            scale: 1.0,
            sq_norm: 0.0,
        }
    }

    /// `<w, x>` including the constant bias feature at index `dim - 1`.
    fn dot(&self, x: &SparseVector) -> f64 {
        let bias = self.v[self.v.len() - 1];
        self.scale * (x.dot(&self.v) + bias)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|x| *x = 0.0);
            self.scale = 1.0;
            self.sq_norm = 0.0;
            return;
        }
        self.scale *= factor;
        self.sq_norm *= factor * factor;
        if self.scale < 1e-9 {
            self.v.iter_mut().for_each(|x| *x *= self.scale);
            self.scale = 1.0;
        }
    }

    /// `w += step * x` (plus `step` on the bias feature).
    fn add(&mut self, x: &SparseVector, step: f64) {
        let bias_idx = self.v.len() - 1;
        let s = step / self.scale;
        let entries = x.iter().chain(std::iter::once((bias_idx, 1.0)));
        for (i, xv) in entries {
            let old = self.v[i];
            let new = old + s * xv;
            self.v[i] = new;
            self.sq_norm += self.scale * self.scale * (new * new - old * old);
        }
        self.sq_norm = self.sq_norm.max(0.0);
    }

    fn into_dense(self) -> Vec<f64> {
        self.v.into_iter().map(|x| x * self.scale).collect()
    }
}

pub fn train_linear(
    train: &[(SparseVector, StanceLabel)],
    vocab: &Vocabulary,
    cfg: &LinearConfig,
) -> Result<LinearModel> {
    train_linear_with_classes(train, vocab, &StanceLabel::ALL, cfg)
}

pub fn train_linear_with_classes(
    train: &[(SparseVector, StanceLabel)],
    vocab: &Vocabulary,
    classes: &[StanceLabel],
    cfg: &LinearConfig,
) -> Result<LinearModel> {
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", cfg.lambda)));
    }
    for c in classes {
        if !train.iter().any(|(_, l)| l == c) {
            return Err(Error::MissingClass(c.to_string()));
        }
    }
    for (x, l) in train {
        if !classes.contains(l) {
            return Err(Error::InvalidConfig(format!("label {l} not among the model classes")));
        }
        if let Some(max) = x.max_index() {
            if max >= vocab.len() {
                return Err(Error::DimensionMismatch { index: max, dim: vocab.len() });
            }
        }
    }
    let mut classes = classes.to_vec();
    classes.sort();
    classes.dedup();

    let dim = vocab.len() + 1;
    let radius_sq = 1.0 / cfg.lambda;
    let mut rng = seed::rng(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut schedule = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        schedule.push(order.clone());
    }

    let mut weights = vec![vec![0.0; dim]; 3];
    for &class in &classes {
        let mut w = ScaledWeights::new(dim);
        let mut sum = vec![0.0; dim];
        let mut t = 0usize;
        for epoch in &schedule {
            for &i in epoch {
                t += 1;
                let (x, label) = &train[i];
                let y = if *label == class { 1.0 } else { -1.0 };
                let eta = 1.0 / (cfg.lambda * t as f64);
                let margin = y * w.dot(x);
                w.shrink(1.0 - eta * cfg.lambda);
                if margin < 1.0 {
                    w.add(x, eta * y);
                }
                if w.sq_norm > radius_sq {
                    w.shrink((radius_sq / w.sq_norm).sqrt());
                }
            }
            if cfg.average {
                sum.iter_mut().zip(&w.v).for_each(|(s, v)| *s += w.scale * v);
            }
        }
        weights[class.index()] = if cfg.average && !schedule.is_empty() {
            let n = schedule.len() as f64;
            sum.into_iter().map(|s| s / n).collect()
        } else {
            w.into_dense()
        };
    }
    LinearModel::from_params(
        LinearParams {
            config: cfg.clone(),
            classes,
            weights,
        },
        vocab.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::vectorize;
    use StanceLabel::*;

    fn separable() -> (Vocabulary, Vec<(SparseVector, StanceLabel)>) {
        let vocab = Vocabulary::from_tokens(vec!["yes".into(), "no".into(), "meh".into()]);
        let mut data = Vec::new();
        for i in 0..30 {
            let (tok, l) = match i % 3 {
                0 => ("no", Against),
                1 => ("meh", NonOpinionated),
                _ => ("yes", Support),
            };
            data.push((vectorize(&[tok, tok], &vocab), l));
        }
        (vocab, data)
    }

    #[test]
    fn separable_corpus_fits_perfectly() {
        let (vocab, data) = separable();
        let cfg = LinearConfig { epochs: 50, lambda: 1e-3, seed: 3, ..Default::default() };
        let m = train_linear(&data, &vocab, &cfg).unwrap();
        for (x, l) in &data {
            assert_eq!(m.classify(x).unwrap().label, *l);
        }
    }

    #[test]
    fn two_word_binary_corpus() {
        let vocab = Vocabulary::from_tokens(vec!["good".into(), "bad".into()]);
        let data = vec![
            (vectorize(&["good"], &vocab), Support),
            (vectorize(&["bad"], &vocab), Against),
            (vectorize(&["good", "good"], &vocab), Support),
            (vectorize(&["bad", "bad"], &vocab), Against),
        ];
        let cfg = LinearConfig { epochs: 50, lambda: 1e-2, seed: 1, ..Default::default() };
        let m = train_linear_with_classes(&data, &vocab, &[Against, Support], &cfg).unwrap();
        for (x, l) in &data {
            assert_eq!(m.classify(x).unwrap().label, *l);
        }
        assert_eq!(m.margins(&data[0].0).unwrap()[1], f64::NEG_INFINITY);
    }

    #[test]
    fn heavy_regularization_shrinks_weights() {
        let (vocab, data) = separable();
        let cfg = LinearConfig { epochs: 5, lambda: 1e6, seed: 3, ..Default::default() };
        let m = train_linear(&data, &vocab, &cfg).unwrap();
        for l in StanceLabel::ALL {
            assert!(m.weights(l).iter().all(|w| w.abs() < 1e-4));
        }
        let empty = m.classify(&SparseVector::default()).unwrap();
        let biases = [m.bias(Against), m.bias(NonOpinionated), m.bias(Support)];
        assert_eq!(empty.label, crate::textmodel::argmax_label(&biases));
    }

    #[test]
    fn deterministic_per_seed() {
        let (vocab, data) = separable();
        let cfg = LinearConfig { epochs: 5, lambda: 1e-3, seed: 9, ..Default::default() };
        let a = train_linear(&data, &vocab, &cfg).unwrap();
        let b = train_linear(&data, &vocab, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_class_rejected() {
        let (vocab, mut data) = separable();
        data.retain(|(_, l)| *l != Support);
        assert!(matches!(
            train_linear(&data, &vocab, &LinearConfig::default()),
            Err(Error::MissingClass(_))
        ));
    }
}
