//! Multinomial Naive Bayes with Laplace smoothing.

use serde::{Deserialize, Serialize};

use super::{Prediction, SparseVector, StanceClassifier, Vocabulary};
use crate::error::{Error, Result};
use crate::stance::StanceLabel;

/// Raw sufficient statistics; log-probabilities are derived from them so a
/// saved model reloads to bit-identical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBParams {
    pub alpha: f64,
    pub classes: Vec<StanceLabel>,
    pub class_doc_counts: [u64; 3],
    /// `[class][token]` summed counts.
    pub token_counts: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NBModel {
    params: NBParams,
    vocab: Vocabulary,
    active: [bool; 3],
    log_priors: [f64; 3],
    log_likelihoods: Vec<Vec<f64>>,
}

impl NBModel {
    pub fn from_params(params: NBParams, vocab: Vocabulary) -> Result<Self> {
        if params.classes.is_empty() {
            return Err(Error::UntrainedModel);
        }
        if params.token_counts.len() != 3 || params.token_counts.iter().any(|r| r.len() != vocab.len()) {
            return Err(Error::Parse("naive bayes counts do not match the vocabulary".into()));
        }
        let mut active = [false; 3];
        for c in &params.classes {
            active[c.index()] = true;
        }
        let total_docs: u64 = (0..3).filter(|&c| active[c]).map(|c| params.class_doc_counts[c]).sum();
        let v = vocab.len() as f64;
        let mut log_priors = [f64::NEG_INFINITY; 3];
        let mut log_likelihoods = vec![vec![f64::NEG_INFINITY; vocab.len()]; 3];
        for c in 0..3 {
            if !active[c] {
                continue;
            }
            log_priors[c] = (params.class_doc_counts[c] as f64 / total_docs as f64).ln();
            let total: f64 = params.token_counts[c].iter().sum();
            let denom = total + params.alpha * v;
            if denom <= 0.0 {
                continue;
            }
            for (t, &n) in params.token_counts[c].iter().enumerate() {
                log_likelihoods[c][t] = ((n + params.alpha) / denom).ln();
            }
        }
        Ok(NBModel {
            params,
            vocab,
            active,
            log_priors,
            log_likelihoods,
        })
    }

    pub fn params(&self) -> &NBParams {
        &self.params
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn prior(&self, class: StanceLabel) -> f64 {
        self.log_priors[class.index()].exp()
    }

    pub fn likelihood(&self, class: StanceLabel, token: &str) -> Option<f64> {
        let id = self.vocab.get(token)?;
        Some(self.log_likelihoods[class.index()][id].exp())
    }

    /// Unnormalized log joint per class; inactive classes are `-inf`.
    pub fn log_joint(&self, x: &SparseVector) -> Result<[f64; 3]> {
        if let Some(max) = x.max_index() {
            if max >= self.vocab.len() {
                return Err(Error::DimensionMismatch {
                    index: max,
                    dim: self.vocab.len(),
                });
            }
        }
        let mut out = self.log_priors;
        for c in 0..3 {
            if !self.active[c] {
                continue;
            }
            for (i, n) in x.iter() {
                out[c] += n * self.log_likelihoods[c][i];
            }
        }
        Ok(out)
    }
}

impl StanceClassifier for NBModel {
    fn classify(&self, x: &SparseVector) -> Result<Prediction> {
        let joint = self.log_joint(x)?;
        let max = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::ZeroProbability);
        }
        let mut scores = [0.0; 3];
        let mut z = 0.0;
        for c in 0..3 {
            if joint[c].is_finite() {
                scores[c] = (joint[c] - max).exp();
                z += scores[c];
            }
        }
        for s in &mut scores {
            *s /= z;
        }
        Ok(Prediction {
            label: super::argmax_label(&joint),
            scores,
        })
    }
}

/// Trains over all three classes; each must be present.
pub fn train_nb(train: &[(SparseVector, StanceLabel)], vocab: &Vocabulary, alpha: f64) -> Result<NBModel> {
    train_nb_with_classes(train, vocab, &StanceLabel::ALL, alpha)
}

/// Trains over the listed classes only; each must be present and every
/// training label must be one of them.
pub fn train_nb_with_classes(
    train: &[(SparseVector, StanceLabel)],
    vocab: &Vocabulary,
    classes: &[StanceLabel],
    alpha: f64,
) -> Result<NBModel> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }
    let mut class_doc_counts = [0u64; 3];
    let mut token_counts = vec![vec![0.0; vocab.len()]; 3];
    for (x, label) in train {
        if !classes.contains(label) {
            return Err(Error::InvalidConfig(format!("label {label} not among the model classes")));
        }
        class_doc_counts[label.index()] += 1;
        for (i, n) in x.iter() {
            if i >= vocab.len() {
                return Err(Error::DimensionMismatch { index: i, dim: vocab.len() });
            }
            token_counts[label.index()][i] += n;
        }
    }
    for c in classes {
        if class_doc_counts[c.index()] == 0 {
            return Err(Error::MissingClass(c.to_string()));
        }
    }
    let mut classes = classes.to_vec();
    classes.sort();
    classes.dedup();
    NBModel::from_params(
        NBParams {
            alpha,
            classes,
            class_doc_counts,
            token_counts,
        },
        vocab.clone(),
    )
}
