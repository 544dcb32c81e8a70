//! Text classification: tokenizer, sparse unigram features, sampling,
//! Naive Bayes and linear max-margin classifiers, evaluation.

mod eval;
mod experiment;
mod features;
mod linear;
mod model;
mod nb;
mod sampling;
mod tokenize;

pub use eval::{evaluate, evaluate_with_classes, EvalReport};
pub use experiment::{
    classify_texts, draw_sample, run_experiment_matrix, train_text_classifier, ExperimentCell, ExperimentConfig,
    ExperimentMatrix, ModelKind,
};
pub use features::{vectorize, SparseVector, Vocabulary};
pub use linear::{train_linear, train_linear_with_classes, LinearConfig, LinearModel, LinearParams};
pub use model::{Classifier, ModelFile, Prediction, MODEL_FORMAT_VERSION};
pub use nb::{train_nb, train_nb_with_classes, NBModel, NBParams};
pub use sampling::{
    random_sample, split_train_test, stratified_sample, Labeled, SampleOutcome, SamplingMethod, SamplingPlan,
};
pub use tokenize::{tokenize, TokenizerConfig};

use crate::stance::StanceLabel;

/// Inference contract shared by every text classifier backend.
pub trait StanceClassifier {
    /// Predicted label and one score per class in [`StanceLabel::ALL`] order.
    fn classify(&self, x: &SparseVector) -> crate::Result<Prediction>;
}

/// Argmax with ties going to the earliest class in the fixed order.
pub(crate) fn argmax_label(scores: &[f64; 3]) -> StanceLabel {
    let mut best = 0;
    for i in 1..3 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    StanceLabel::ALL[best]
}
