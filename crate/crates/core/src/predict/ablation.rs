use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{assemble_features, ContentSource, FeatureSpec, PredictData, Standardizer};
use super::{train_gbt, train_logreg, GBTParams, LogRegConfig};
use crate::error::{Error, Result};
use crate::profile::StanceCategory;
use crate::report::{fmt_f64, KvReport};
use crate::seed;
use crate::stance::{StanceLabel, Topic};
use crate::textmodel::{evaluate_with_classes, split_train_test, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    #[default]
    Gbt,
    Logreg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSpec {
    pub name: String,
    #[serde(flatten)]
    pub spec: FeatureSpec,
}

impl NamedSpec {
    pub fn new(name: impl Into<String>, spec: FeatureSpec) -> Self {
        NamedSpec { name: name.into(), spec }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub predictor: PredictorKind,
    pub gbt: GBTParams,
    pub logreg: LogRegConfig,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            predictor: PredictorKind::Gbt,
            gbt: GBTParams::default(),
            logreg: LogRegConfig::default(),
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// The standard ablation rows for predicting `target` from `related` topics.
pub fn default_ablation_specs(related: &[Topic], content_dim: usize) -> Vec<NamedSpec> {
    let content = |sources: Vec<ContentSource>| FeatureSpec {
        include_content: sources,
        content_dim,
        ..Default::default()
    };
    let mut specs = vec![
        NamedSpec::new("statistics", FeatureSpec::stats()),
        NamedSpec::new(
            "profile",
            FeatureSpec {
                include_profile_text: true,
                content_dim,
                ..Default::default()
            },
        ),
    ];
    for t in related {
        specs.push(NamedSpec::new(format!("stance.{t}"), FeatureSpec::stance(std::slice::from_ref(t))));
    }
    specs.push(NamedSpec::new("stance.all", FeatureSpec::stance(related)));
    for t in related {
        specs.push(NamedSpec::new(format!("content.{t}"), content(vec![ContentSource::Topic(t.clone())])));
    }
    specs.push(NamedSpec::new("content.history", content(vec![ContentSource::Historical])));
    let all_sources: Vec<ContentSource> = related
        .iter()
        .cloned()
        .map(ContentSource::Topic)
        .chain([ContentSource::Historical])
        .collect();
    specs.push(NamedSpec::new("content.all", content(all_sources.clone())));
    specs.push(NamedSpec::new(
        "stance+content+stats",
        FeatureSpec {
            include_stance: related.to_vec(),
            include_content: all_sources.clone(),
            include_stats: true,
            include_profile_text: false,
            content_dim,
        },
    ));
    specs.push(NamedSpec::new(
        "all",
        FeatureSpec {
            include_stance: related.to_vec(),
            include_content: all_sources,
            include_stats: true,
            include_profile_text: true,
            content_dim,
        },
    ));
    specs
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub name: String,
    pub dimension: usize,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub dropped: usize,
    pub constant_columns: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub predictor: PredictorKind,
    pub eligible_users: usize,
    pub train_users: usize,
    pub test_users: usize,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, name: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::from("name,dimension,macro_f1,accuracy,n_train,n_test,dropped\n");
        for r in &self.rows {
            text.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.name,
                r.dimension,
                fmt_f64(r.macro_f1),
                fmt_f64(r.accuracy),
                r.n_train,
                r.n_test,
                r.dropped
            ));
        }
        text
    }

    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new("ablation");
        r.push(
            "predictor",
            match self.predictor {
                PredictorKind::Gbt => "gbt",
                PredictorKind::Logreg => "logreg",
            },
        )
        .push("eligible_users", self.eligible_users)
        .push("train_users", self.train_users)
        .push("test_users", self.test_users);
        for row in &self.rows {
            r.push(format!("dimension.{}", row.name), row.dimension)
                .push_f64(format!("macro_f1.{}", row.name), row.macro_f1)
                .push_f64(format!("accuracy.{}", row.name), row.accuracy);
        }
        r.block("table", self.to_csv());
        r
    }
}

fn to_label(c: StanceCategory) -> StanceLabel {
    if c == StanceCategory::Support {
        StanceLabel::Support
    } else {
        StanceLabel::Against
    }
}

/// Macro F1 over {Against, Support}.
pub fn binary_eval(gold: &[StanceCategory], predicted: &[StanceCategory]) -> Result<EvalReport> {
    let g: Vec<StanceLabel> = gold.iter().map(|&c| to_label(c)).collect();
    let p: Vec<StanceLabel> = predicted.iter().map(|&c| to_label(c)).collect();
    evaluate_with_classes(&g, &p, &[StanceLabel::Against, StanceLabel::Support])
}

/// Predicts the training majority (Support on a tie) for every test user.
pub fn majority_baseline(train: &[StanceCategory], test: &[StanceCategory]) -> Result<EvalReport> {
    let support = train.iter().filter(|&&c| c == StanceCategory::Support).count();
    let guess = if 2 * support >= train.len() {
        StanceCategory::Support
    } else {
        StanceCategory::Against
    };
    binary_eval(test, &vec![guess; test.len()])
}

/// Uniform coin flip per test user.
pub fn random_baseline(test: &[StanceCategory], seed_: u64) -> Result<EvalReport> {
    let mut rng = seed::rng(seed_);
    let predicted: Vec<StanceCategory> = test
        .iter()
        .map(|_| {
            if rng.random_bool(0.5) {
                StanceCategory::Support
            } else {
                StanceCategory::Against
            }
        })
        .collect();
    binary_eval(test, &predicted)
}

/// Trains and scores one predictor per spec on a single shared user split,
/// preceded by random and majority baselines on the same test users.
pub fn run_ablation(data: &PredictData, specs: &[NamedSpec], cfg: &AblationConfig) -> Result<AblationReport> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no ablation specs".into()));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("train_fraction {} outside (0, 1)", cfg.train_fraction)));
    }
    let eligible = data.eligible_users();
    if eligible.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: eligible.len(),
        });
    }
    let (train, test) = split_train_test(&eligible, cfg.train_fraction, seed::derive_seed(cfg.seed, "ablation.split"));
    let train_ids: BTreeSet<&str> = train.iter().map(|(u, _)| u.as_str()).collect();
    let train_labels: Vec<StanceCategory> = train.iter().map(|(_, c)| *c).collect();
    let test_labels: Vec<StanceCategory> = test.iter().map(|(_, c)| *c).collect();

    let mut rows = Vec::new();
    let baseline = |name: &str, e: EvalReport| AblationRow {
        name: name.to_string(),
        dimension: 0,
        macro_f1: e.macro_f1,
        accuracy: e.accuracy,
        n_train: train.len(),
        n_test: test.len(),
        dropped: 0,
        constant_columns: 0,
    };
    rows.push(baseline(
        "random",
        random_baseline(&test_labels, seed::derive_seed(cfg.seed, "ablation.random"))?,
    ));
    rows.push(baseline("majority", majority_baseline(&train_labels, &test_labels)?));

    for named in specs {
        let fs = assemble_features(data, &named.spec).map_err(|e| e.in_stage(&format!("ablation spec {}", named.name)))?;
        let (tr, te): (Vec<_>, Vec<_>) = fs.users.iter().partition(|u| train_ids.contains(u.user_id.as_str()));
        if tr.is_empty() || te.is_empty() {
            return Err(Error::EmptyInput(format!("spec {} leaves an empty train or test split", named.name)));
        }
        let mut x_tr: Vec<Vec<f64>> = tr.iter().map(|u| u.values.clone()).collect();
        let mut x_te: Vec<Vec<f64>> = te.iter().map(|u| u.values.clone()).collect();
        let standardizer = Standardizer::fit(&x_tr, &fs.numeric_columns);
        x_tr.iter_mut().chain(x_te.iter_mut()).for_each(|r| standardizer.apply(r));
        let y_tr: Vec<bool> = tr.iter().map(|u| u.label == StanceCategory::Support).collect();
        let predicted: Vec<bool> = match cfg.predictor {
            PredictorKind::Gbt => {
                let params = GBTParams {
                    seed: seed::derive_seed(cfg.seed, &format!("ablation.gbt.{}", named.name)),
                    ..cfg.gbt.clone()
                };
                let m = train_gbt(&x_tr, &y_tr, &params).map_err(|e| e.in_stage(&format!("ablation spec {}", named.name)))?;
                x_te.iter().map(|r| m.predict(r)).collect()
            }
            PredictorKind::Logreg => {
                let c = LogRegConfig {
                    seed: seed::derive_seed(cfg.seed, &format!("ablation.logreg.{}", named.name)),
                    ..cfg.logreg.clone()
                };
                let m = train_logreg(&x_tr, &y_tr, &c).map_err(|e| e.in_stage(&format!("ablation spec {}", named.name)))?;
                x_te.iter().map(|r| m.predict(r)).collect()
            }
        };
        let pred: Vec<StanceCategory> = predicted
            .into_iter()
            .map(|b| if b { StanceCategory::Support } else { StanceCategory::Against })
            .collect();
        let gold: Vec<StanceCategory> = te.iter().map(|u| u.label).collect();
        let e = binary_eval(&gold, &pred)?;
        rows.push(AblationRow {
            name: named.name.clone(),
            dimension: fs.dimension,
            macro_f1: e.macro_f1,
            accuracy: e.accuracy,
            n_train: tr.len(),
            n_test: te.len(),
            dropped: fs.dropped.values().sum(),
            constant_columns: standardizer.constant_columns().len(),
        });
    }
    Ok(AblationReport {
        predictor: cfg.predictor,
        eligible_users: eligible.len(),
        train_users: train.len(),
        test_users: test.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use StanceCategory::*;

    #[test]
    fn majority_arithmetic() {
        let test: Vec<StanceCategory> = (0..100).map(|i| if i < 73 { Support } else { Against }).collect();
        let e = majority_baseline(&test, &test).unwrap();
        assert!((e.accuracy - 0.73).abs() < 1e-12);
        assert!((e.macro_f1 - 0.4219653).abs() < 1e-6);
    }

    #[test]
    fn random_baseline_near_half() {
        let test: Vec<StanceCategory> = (0..2000).map(|i| if i % 2 == 0 { Support } else { Against }).collect();
        let e = random_baseline(&test, 11).unwrap();
        assert!((e.accuracy - 0.5).abs() < 0.03);
    }

    #[test]
    fn default_specs_are_named_uniquely() {
        let specs = default_ablation_specs(&[Topic::from("mask"), Topic::from("racial")], 16);
        let names: BTreeSet<&str> = specs.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names.len(), specs.len());
        assert_eq!(specs.iter().find(|s| s.name == "stance.all").unwrap().spec.dimension(), 2);
        assert_eq!(specs[0].spec.dimension(), 7);
    }
}
