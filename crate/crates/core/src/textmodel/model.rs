use std::path::Path;

use serde::{Deserialize, Serialize};

use super::linear::LinearParams;
use super::nb::NBParams;
use super::{tokenize, vectorize, LinearModel, NBModel, SparseVector, StanceClassifier, TokenizerConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::stance::StanceLabel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: StanceLabel,
    /// One score per class in fixed order: posteriors for Naive Bayes,
    /// margins for the linear model.
    pub scores: [f64; 3],
}

/// A trained text classifier together with the tokenizer it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    NaiveBayes(NBModel),
    Linear(LinearModel),
}

impl Classifier {
    pub fn kind(&self) -> &'static str {
        match self {
            Classifier::NaiveBayes(_) => "naive_bayes",
            Classifier::Linear(_) => "linear",
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        match self {
            Classifier::NaiveBayes(m) => m.vocab(),
            Classifier::Linear(m) => m.vocab(),
        }
    }

    pub fn classify_text(&self, text: &str, tokenizer: &TokenizerConfig) -> Result<Prediction> {
        let tokens = tokenize(text, tokenizer);
        self.classify(&vectorize(&tokens, self.vocab()))
    }
}

impl StanceClassifier for Classifier {
    fn classify(&self, x: &SparseVector) -> Result<Prediction> {
        match self {
            Classifier::NaiveBayes(m) => m.classify(x),
            Classifier::Linear(m) => m.classify(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Params {
    NaiveBayes(NBParams),
    Linear(LinearParams),
}

/// Versioned on-disk form of a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub seed: u64,
    pub train_masked: bool,
    pub tokenizer: TokenizerConfig,
    pub vocab: Vec<String>,
    params: Params,
}

impl ModelFile {
    pub fn new(model: &Classifier, tokenizer: &TokenizerConfig, seed: u64, train_masked: bool) -> Self {
        let params = match model {
            Classifier::NaiveBayes(m) => Params::NaiveBayes(m.params().clone()),
            Classifier::Linear(m) => Params::Linear(m.params().clone()),
        };
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            train_masked,
            tokenizer: tokenizer.clone(),
            vocab: model.vocab().tokens().to_vec(),
            params,
        }
    }

    pub fn classifier(&self) -> Result<Classifier> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.format_version));
        }
        let vocab = Vocabulary::from_tokens(self.vocab.clone());
        Ok(match &self.params {
            Params::NaiveBayes(p) => Classifier::NaiveBayes(NBModel::from_params(p.clone(), vocab)?),
            Params::Linear(p) => Classifier::Linear(LinearModel::from_params(p.clone(), vocab)?),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::report::write_text(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::{train_linear, train_nb, LinearConfig};
    use StanceLabel::*;

    fn data() -> (Vocabulary, Vec<(SparseVector, StanceLabel)>) {
        let vocab = Vocabulary::from_tokens(["aa", "bb", "cc", "dd"].iter().map(|s| s.to_string()).collect());
        let docs = [
            (vec!["aa", "bb"], Against),
            (vec!["bb", "cc"], NonOpinionated),
            (vec!["cc", "dd", "dd"], Support),
            (vec!["aa"], Against),
        ];
        let data = docs.iter().map(|(t, l)| (vectorize(t, &vocab), *l)).collect();
        (vocab, data)
    }

    #[test]
    fn round_trip_preserves_classifications() {
        let (vocab, data) = data();
        let tok = TokenizerConfig::default();
        let nb = Classifier::NaiveBayes(train_nb(&data, &vocab, 0.5).unwrap());
        let lin = Classifier::Linear(
            train_linear(&data, &vocab, &LinearConfig { epochs: 7, lambda: 0.01, seed: 4, ..Default::default() }).unwrap(),
        );
        for model in [nb, lin] {
            let file = ModelFile::new(&model, &tok, 4, true);
            let back = ModelFile::from_json(&file.to_json().unwrap()).unwrap();
            assert_eq!(back, file);
            let reloaded = back.classifier().unwrap();
            assert_eq!(reloaded, model);
            for (x, _) in &data {
                let a = model.classify(x).unwrap();
                let b = reloaded.classify(x).unwrap();
                assert_eq!(a.label, b.label);
                assert_eq!(a.scores.map(f64::to_bits), b.scores.map(f64::to_bits));
            }
        }
    }

    #[test]
    fn rejects_unknown_version() {
        let (vocab, data) = data();
        let nb = Classifier::NaiveBayes(train_nb(&data, &vocab, 1.0).unwrap());
        let mut file = ModelFile::new(&nb, &TokenizerConfig::default(), 0, false);
        file.format_version = 99;
        assert!(matches!(file.classifier(), Err(Error::UnsupportedVersion(99))));
    }
}
