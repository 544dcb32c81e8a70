//! The sampling x masking experiment grid over weakly labeled tweets.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, random_sample, split_train_test, stratified_sample, tokenize, train_linear, train_nb, vectorize,
    Classifier, EvalReport, LinearConfig, SamplingMethod, SamplingPlan, StanceClassifier, TokenizerConfig, Vocabulary,
};
use crate::error::{Error, Result};
use crate::report::{fmt_f64, KvReport};
use crate::seed;
use crate::stance::StanceLabel;
use crate::weaklabel::WeakLabeledTweet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    #[default]
    Linear,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Requested training sample size per cell.
    pub total: usize,
    pub train_fraction: f64,
    pub nb_alpha: f64,
    pub linear: LinearConfig,
    pub methods: Vec<SamplingMethod>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            total: 3000,
            train_fraction: 0.8,
            nb_alpha: 1.0,
            linear: LinearConfig::default(),
            methods: vec![SamplingMethod::Random, SamplingMethod::Stratified],
        }
    }
}

/// Tokenizes `(text, label)` pairs, builds the vocabulary on them and trains.
pub fn train_text_classifier(
    docs: &[(&str, StanceLabel)],
    kind: ModelKind,
    tokenizer: &TokenizerConfig,
    nb_alpha: f64,
    linear: &LinearConfig,
) -> Result<Classifier> {
    let tokens: Vec<Vec<String>> = docs.iter().map(|(t, _)| tokenize(t, tokenizer)).collect();
    let vocab = Vocabulary::from_documents(tokens.iter());
    let train: Vec<_> = tokens
        .iter()
        .zip(docs)
        .map(|(t, (_, l))| (vectorize(t, &vocab), *l))
        .collect();
    Ok(match kind {
        ModelKind::NaiveBayes => Classifier::NaiveBayes(train_nb(&train, &vocab, nb_alpha)?),
        ModelKind::Linear => Classifier::Linear(train_linear(&train, &vocab, linear)?),
    })
}

pub fn classify_texts(model: &Classifier, texts: &[&str], tokenizer: &TokenizerConfig) -> Result<Vec<StanceLabel>> {
    texts
        .iter()
        .map(|t| {
            let x = vectorize(&tokenize(t, tokenizer), model.vocab());
            model.classify(&x).map(|p| p.label)
        })
        .collect()
}

fn text_of(t: &WeakLabeledTweet, masked: bool) -> std::borrow::Cow<'_, str> {
    if masked {
        t.masked()
    } else {
        std::borrow::Cow::Borrowed(t.tweet.text.as_str())
    }
}

/// Draws the training sample for one sampling method. Random draws are capped
/// at the pool size.
pub fn draw_sample(
    pool: &[WeakLabeledTweet],
    method: SamplingMethod,
    total: usize,
    seed_: u64,
) -> Result<(Vec<WeakLabeledTweet>, BTreeMap<StanceLabel, usize>)> {
    let plan = SamplingPlan {
        method,
        total: total.min(pool.len()),
        seed: seed_,
    };
    match method {
        SamplingMethod::Random => Ok((random_sample(pool, &plan)?, BTreeMap::new())),
        SamplingMethod::Stratified => {
            let out = stratified_sample(
                pool,
                &SamplingPlan {
                    total,
                    ..plan
                },
            )?;
            Ok((out.items, out.shortfalls))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub method: SamplingMethod,
    pub train_masked: bool,
    pub test_masked: bool,
    /// `naive_bayes`, `linear` or `random`.
    pub model: String,
    pub n_train: usize,
    pub eval: EvalReport,
}

impl ExperimentCell {
    pub fn key(&self) -> String {
        format!(
            "{}.{}.{}.{}",
            self.method.as_str(),
            if self.train_masked { "train_masked" } else { "train_raw" },
            if self.test_masked { "test_masked" } else { "test_raw" },
            self.model
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentMatrix {
    pub pool_size: usize,
    pub test_size: usize,
    pub shortfalls: BTreeMap<SamplingMethod, BTreeMap<StanceLabel, usize>>,
    pub cells: Vec<ExperimentCell>,
}

impl ExperimentMatrix {
    pub fn cell(&self, method: SamplingMethod, train_masked: bool, test_masked: bool, model: &str) -> Option<&ExperimentCell> {
        self.cells.iter().find(|c| {
            c.method == method && c.train_masked == train_masked && c.test_masked == test_masked && c.model == model
        })
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::from("method,train,test,model,n_train,macro_f1,accuracy,f1_against,f1_non_opinionated,f1_support\n");
        for c in &self.cells {
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                c.method.as_str(),
                if c.train_masked { "masked" } else { "raw" },
                if c.test_masked { "masked" } else { "raw" },
                c.model,
                c.n_train,
                fmt_f64(c.eval.macro_f1),
                fmt_f64(c.eval.accuracy),
                fmt_f64(c.eval.per_class_f1[0]),
                fmt_f64(c.eval.per_class_f1[1]),
                fmt_f64(c.eval.per_class_f1[2]),
            ));
        }
        text
    }

    pub fn to_report(&self, title: &str) -> KvReport {
        let mut r = KvReport::new(title);
        r.push("pool_size", self.pool_size).push("test_size", self.test_size);
        for (m, s) in &self.shortfalls {
            for (l, n) in s {
                r.push(format!("shortfall.{}.{l}", m.as_str()), n);
            }
        }
        for c in &self.cells {
            r.push_f64(format!("macro_f1.{}", c.key()), c.eval.macro_f1);
        }
        r.block("table", self.to_csv());
        r
    }
}

/// Splits `labeled` into a training pool and a held-out test set, then for
/// every sampling method x train masking x model trains on a sample of the
/// pool and evaluates on the test set with and without hashtags. A uniform
/// random predictor is scored alongside.
pub fn run_experiment_matrix(
    labeled: &[WeakLabeledTweet],
    cfg: &ExperimentConfig,
    tokenizer: &TokenizerConfig,
    seed_: u64,
) -> Result<ExperimentMatrix> {
    if labeled.is_empty() {
        return Err(Error::EmptyInput("no labeled tweets for the experiment matrix".into()));
    }
    let (pool, test) = split_train_test(labeled, cfg.train_fraction, seed::derive_seed(seed_, "split"));
    if test.is_empty() {
        return Err(Error::EmptyInput("experiment test split is empty".into()));
    }
    let gold: Vec<StanceLabel> = test.iter().map(|t| t.label).collect();
    let test_raw: Vec<&str> = test.iter().map(|t| t.tweet.text.as_str()).collect();
    let masked_owned: Vec<String> = test.iter().map(|t| t.masked().into_owned()).collect();
    let test_masked: Vec<&str> = masked_owned.iter().map(String::as_str).collect();

    let mut cells = Vec::new();
    let mut shortfalls = BTreeMap::new();
    for &method in &cfg.methods {
        let (sample, short) = draw_sample(&pool, method, cfg.total, seed::derive_seed(seed_, method.as_str()))?;
        if !short.is_empty() {
            shortfalls.insert(method, short);
        }
        for train_masked in [false, true] {
            let texts: Vec<String> = sample.iter().map(|t| text_of(t, train_masked).into_owned()).collect();
            let docs: Vec<(&str, StanceLabel)> = texts.iter().map(String::as_str).zip(sample.iter().map(|t| t.label)).collect();
            for kind in [ModelKind::NaiveBayes, ModelKind::Linear] {
                let linear = LinearConfig {
                    seed: seed::derive_seed(seed_, &format!("linear.{}.{train_masked}", method.as_str())),
                    ..cfg.linear.clone()
                };
                let model = train_text_classifier(&docs, kind, tokenizer, cfg.nb_alpha, &linear)?;
                for test_is_masked in [false, true] {
                    let texts = if test_is_masked { &test_masked } else { &test_raw };
                    let predicted = classify_texts(&model, texts, tokenizer)?;
                    cells.push(ExperimentCell {
                        method,
                        train_masked,
                        test_masked: test_is_masked,
                        model: kind.as_str().to_string(),
                        n_train: sample.len(),
                        eval: evaluate(&gold, &predicted)?,
                    });
                }
            }
        }
        let mut rng = seed::rng(seed::derive_seed(seed_, &format!("random.{}", method.as_str())));
        let predicted: Vec<StanceLabel> = gold.iter().map(|_| StanceLabel::ALL[rng.random_range(0..3)]).collect();
        let eval = evaluate(&gold, &predicted)?;
        for test_is_masked in [false, true] {
            cells.push(ExperimentCell {
                method,
                train_masked: false,
                test_masked: test_is_masked,
                model: "random".into(),
                n_train: 0,
                eval: eval.clone(),
            });
        }
    }
    Ok(ExperimentMatrix {
        pool_size: pool.len(),
        test_size: test.len(),
        shortfalls,
        cells,
    })
}
