//! End-to-end orchestration: load, clean, label, experiment grid, classify,
//! aggregate, behavior statistics, network ratios and ablations.
//!
//! A run is a pure function of its input files and configuration; every
//! stage writes its reports under `output_dir` before the next one starts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::behavior::{conditional_probability_table, pairwise_correlations, quadrant_export, write_correlations_csv};
use crate::corpus::{
    clean_corpus, load_corpus, read_jsonl, write_corpus, write_jsonl, CleaningConfig, SyntheticCorpus, SyntheticSpec,
    Tweet,
};
use crate::error::{Error, Result};
use crate::network::{build_retweet_graph, prune_isolated, stance_edge_ratio, RetweetRecord};
use crate::predict::{default_ablation_specs, run_ablation, AblationConfig, NamedSpec, PredictData, UserRecord};
use crate::profile::{
    aggregate_user_stances, aggregate_weak_labels, opinionated_user_join, Provenance, ProfileTable, StanceCategory,
    ThresholdConfig,
};
use crate::report::{write_text, KvReport};
use crate::seed;
use crate::stance::{StanceLabel, Topic};
use crate::textmodel::{
    classify_texts, draw_sample, run_experiment_matrix, train_text_classifier, ExperimentConfig, ModelFile, ModelKind,
    SamplingMethod, TokenizerConfig,
};
use crate::weaklabel::{bundled_lexicon, distribution_report, label_corpus, label_distribution, StanceLexicon, WeakLabeledTweet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FinalModelConfig {
    pub model: ModelKind,
    pub method: SamplingMethod,
    /// Train on, and classify, text with hashtags removed.
    pub masked: bool,
}

impl Default for FinalModelConfig {
    fn default() -> Self {
        FinalModelConfig {
            model: ModelKind::NaiveBayes,
            method: SamplingMethod::Stratified,
            masked: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub enabled: bool,
    pub weighted: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            enabled: true,
            weighted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationSection {
    pub enabled: bool,
    pub content_dim: usize,
    /// Empty means the standard list for the configured topics.
    pub specs: Vec<NamedSpec>,
    #[serde(flatten)]
    pub config: AblationConfig,
}

impl Default for AblationSection {
    fn default() -> Self {
        AblationSection {
            enabled: true,
            content_dim: 512,
            specs: Vec::new(),
            config: AblationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Global seed; every stage derives its own from it. Required to run.
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    /// The first topic is the prediction target and conditional-table target.
    pub topics: Vec<Topic>,
    pub corpora: BTreeMap<Topic, PathBuf>,
    /// Topics without an entry use the bundled lexicon.
    pub lexicons: BTreeMap<Topic, PathBuf>,
    pub history: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub cleaning: CleaningConfig,
    pub tokenizer: TokenizerConfig,
    pub experiment: ExperimentConfig,
    pub final_model: FinalModelConfig,
    pub thresholds: ThresholdConfig,
    pub network: NetworkConfig,
    pub ablation: AblationSection,
    /// Also write cleaned and labeled corpora and trained models.
    pub write_intermediate: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            output_dir: PathBuf::from("out"),
            topics: Vec::new(),
            corpora: BTreeMap::new(),
            lexicons: BTreeMap::new(),
            history: None,
            users: None,
            cleaning: CleaningConfig::default(),
            tokenizer: TokenizerConfig::default(),
            experiment: ExperimentConfig::default(),
            final_model: FinalModelConfig::default(),
            thresholds: ThresholdConfig::default(),
            network: NetworkConfig::default(),
            ablation: AblationSection::default(),
            write_intermediate: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("pipeline config: {e}")))
    }

    /// Reads a TOML config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let mut plain = self.clone();
        // The default stopword list is long; leave it implicit when unchanged.
        let default_tok = TokenizerConfig::default();
        let tok = std::mem::take(&mut plain.tokenizer);
        let mut text = toml::to_string(&plain).map_err(|e| Error::Parse(e.to_string()))?;
        if tok != default_tok {
            let t = toml::to_string(&tok).map_err(|e| Error::Parse(e.to_string()))?;
            text.push_str(&format!("\n[tokenizer]\n{t}"));
        } else {
            text = strip_section(&text, "tokenizer");
        }
        Ok(text)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        self.corpora.values_mut().for_each(fix);
        self.lexicons.values_mut().for_each(fix);
        if let Some(p) = self.history.as_mut() {
            fix(p);
        }
        if let Some(p) = self.users.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<u64> {
        let seed = self
            .seed
            .ok_or_else(|| Error::InvalidConfig("a seed is required for pipeline runs".into()))?;
        if self.topics.is_empty() {
            return Err(Error::InvalidConfig("no topics configured".into()));
        }
        let unique: BTreeSet<&Topic> = self.topics.iter().collect();
        if unique.len() != self.topics.len() {
            return Err(Error::InvalidConfig("duplicate topic".into()));
        }
        for t in &self.topics {
            let p = self
                .corpora
                .get(t)
                .ok_or_else(|| Error::InvalidConfig(format!("no corpus path for topic {t}")))?;
            require_file(p)?;
            match self.lexicons.get(t) {
                Some(p) => require_file(p)?,
                None if bundled_lexicon(t).is_none() => {
                    return Err(Error::InvalidConfig(format!("no lexicon for topic {t}")));
                }
                None => {}
            }
        }
        for p in self.history.iter().chain(self.users.iter()) {
            require_file(p)?;
        }
        self.cleaning.validate()?;
        self.thresholds.validate()?;
        Ok(seed)
    }
}

fn strip_section(text: &str, name: &str) -> String {
    let header = format!("[{name}]");
    let mut out = String::new();
    let mut skipping = false;
    for line in text.lines() {
        if line.starts_with('[') {
            skipping = line.trim() == header;
        }
        if !skipping {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn require_file(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ))
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub output_dir: PathBuf,
    pub written: Vec<PathBuf>,
    pub summary: KvReport,
}

struct Writer {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn report(&mut self, name: &str, r: &KvReport) -> Result<()> {
        self.text(&format!("reports/{name}.txt"), &r.render())
    }

    fn text(&mut self, rel: &str, text: &str) -> Result<()> {
        let p = self.root.join(rel);
        write_text(&p, text)?;
        self.written.push(p);
        Ok(())
    }

    fn path(&mut self, rel: &str) -> PathBuf {
        let p = self.root.join(rel);
        self.written.push(p.clone());
        p
    }
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| e.in_stage(name))
}

fn category_map(table: &ProfileTable, topic: &Topic) -> BTreeMap<String, StanceCategory> {
    table
        .topics
        .get(topic)
        .map(|m| m.iter().map(|(u, s)| (u.clone(), s.category)).collect())
        .unwrap_or_default()
}

fn profile_report(table: &ProfileTable, topics: &[Topic]) -> KvReport {
    let mut r = KvReport::new(format!("profiles.{}", table.provenance.as_str()));
    for t in topics {
        let m = table.topics.get(t);
        let count = |c: StanceCategory| m.map_or(0, |m| m.values().filter(|s| s.category == c).count());
        r.push(format!("{t}.users"), m.map_or(0, |m| m.len()));
        for c in [StanceCategory::Support, StanceCategory::Weak, StanceCategory::Against] {
            r.push(format!("{t}.{c}"), count(c));
        }
    }
    r
}

/// Runs every stage in order. Errors carry the name of the failing stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let global = stage("config", || cfg.validate())?;
    let mut w = Writer {
        root: cfg.output_dir.clone(),
        written: Vec::new(),
    };
    let mut summary = KvReport::new("pipeline");
    summary.push("seed", global).push(
        "topics",
        cfg.topics.iter().map(Topic::as_str).collect::<Vec<_>>().join(","),
    );

    // load
    let mut raw: BTreeMap<Topic, Vec<Tweet>> = BTreeMap::new();
    stage("load", || {
        for t in &cfg.topics {
            let loaded = load_corpus(&cfg.corpora[t], t)?;
            w.report(&format!("load.{t}"), &loaded.report(&cfg.corpora[t]))?;
            raw.insert(t.clone(), loaded.tweets);
        }
        Ok(())
    })?;
    summary.push("stage.load", "done");

    // Retweet edges come from the raw corpora, before retweets are cleaned away.
    let records: Vec<RetweetRecord> = raw
        .values()
        .flatten()
        .filter(|t| t.is_retweet)
        .filter_map(|t| t.retweeted_user_id.as_ref().map(|r| RetweetRecord::new(t.user_id.clone(), r.clone())))
        .collect();

    // clean
    let mut cleaned: BTreeMap<Topic, Vec<Tweet>> = BTreeMap::new();
    stage("clean", || {
        for (t, tweets) in std::mem::take(&mut raw) {
            let (kept, report) = clean_corpus(tweets, &cfg.cleaning)?;
            w.report(&format!("clean.{t}"), &report.to_report())?;
            if cfg.write_intermediate {
                let p = w.path(&format!("data/clean.{t}.jsonl"));
                write_corpus(&p, &kept)?;
            }
            cleaned.insert(t, kept);
        }
        Ok(())
    })?;
    summary.push("stage.clean", "done");

    // weak labels
    let mut labeled: BTreeMap<Topic, Vec<WeakLabeledTweet>> = BTreeMap::new();
    stage("label", || {
        for t in &cfg.topics {
            let lex = match cfg.lexicons.get(t) {
                Some(p) => StanceLexicon::load(p)?,
                None => bundled_lexicon(t).ok_or_else(|| Error::InvalidConfig(format!("no lexicon for topic {t}")))?,
            };
            let l = label_corpus(&cleaned[t], &lex)?;
            w.report(&format!("labels.{t}"), &distribution_report(t, &label_distribution(&l)))?;
            if cfg.write_intermediate {
                let p = w.path(&format!("data/labeled.{t}.jsonl"));
                write_jsonl(&p, &l)?;
            }
            labeled.insert(t.clone(), l);
        }
        Ok(())
    })?;
    summary.push("stage.label", "done");

    stage("experiment", || {
        for t in &cfg.topics {
            let m = run_experiment_matrix(
                &labeled[t],
                &cfg.experiment,
                &cfg.tokenizer,
                seed::derive_seed(global, &format!("experiment.{t}")),
            )?;
            w.report(&format!("experiment.{t}"), &m.to_report(&format!("experiment.{t}")))?;
        }
        Ok(())
    })?;
    summary.push("stage.experiment", "done");

    // classify every cleaned tweet with the final model
    let mut predicted: BTreeMap<Topic, Vec<(String, StanceLabel)>> = BTreeMap::new();
    stage("classify", || {
        let fm = &cfg.final_model;
        for t in &cfg.topics {
            let s = seed::derive_seed(global, &format!("classify.{t}"));
            let (sample, shortfalls) = draw_sample(&labeled[t], fm.method, cfg.experiment.total, s)?;
            let texts: Vec<String> = sample
                .iter()
                .map(|x| if fm.masked { x.masked().into_owned() } else { x.tweet.text.clone() })
                .collect();
            let docs: Vec<(&str, StanceLabel)> = texts.iter().map(String::as_str).zip(sample.iter().map(|x| x.label)).collect();
            let linear = crate::textmodel::LinearConfig {
                seed: seed::derive_seed(s, "linear"),
                ..cfg.experiment.linear.clone()
            };
            let model = train_text_classifier(&docs, fm.model, &cfg.tokenizer, cfg.experiment.nb_alpha, &linear)?;
            let all_texts: Vec<String> = labeled[t]
                .iter()
                .map(|x| if fm.masked { x.masked().into_owned() } else { x.tweet.text.clone() })
                .collect();
            let refs: Vec<&str> = all_texts.iter().map(String::as_str).collect();
            let labels = classify_texts(&model, &refs, &cfg.tokenizer)?;
            let mut r = KvReport::new(format!("classify.{t}"));
            r.push("model", fm.model.as_str())
                .push("sampling", fm.method.as_str())
                .push("masked", fm.masked)
                .push("n_train", sample.len())
                .push("vocab_size", model.vocab().len())
                .push("n_classified", labels.len());
            for (l, n) in shortfalls {
                r.push(format!("shortfall.{l}"), n);
            }
            for l in StanceLabel::ALL {
                r.push(format!("predicted.{l}"), labels.iter().filter(|&&x| x == l).count());
            }
            let agree = labels
                .iter()
                .zip(&labeled[t])
                .filter(|(p, x)| x.label != StanceLabel::NonOpinionated && **p == x.label)
                .count();
            let opinionated = labeled[t].iter().filter(|x| x.label != StanceLabel::NonOpinionated).count();
            r.push_f64(
                "agreement_with_hashtag_labels",
                if opinionated == 0 { 0.0 } else { agree as f64 / opinionated as f64 },
            );
            w.report(&format!("classify.{t}"), &r)?;
            if cfg.write_intermediate {
                let p = w.path(&format!("models/{t}.json"));
                ModelFile::new(&model, &cfg.tokenizer, s, fm.masked).save(&p)?;
            }
            predicted.insert(
                t.clone(),
                labeled[t].iter().map(|x| x.tweet.user_id.clone()).zip(labels).collect(),
            );
        }
        Ok(())
    })?;
    summary.push("stage.classify", "done");

    // per-user profiles
    let mut profiles = ProfileTable::new(Provenance::Classifier);
    let mut hashtag_profiles = ProfileTable::new(Provenance::Hashtag);
    stage("aggregate", || {
        for t in &cfg.topics {
            let counts = aggregate_user_stances(predicted[t].iter().map(|(u, l)| (u.as_str(), *l)));
            profiles.insert_topic(t.clone(), &counts, &cfg.thresholds);
            hashtag_profiles.insert_topic(t.clone(), &aggregate_weak_labels(&labeled[t]), &cfg.thresholds);
        }
        let p = w.path("profiles.csv");
        profiles.write_csv(&p)?;
        let p = w.path("profiles_hashtag.csv");
        hashtag_profiles.write_csv(&p)?;
        w.report("profiles", &profile_report(&profiles, &cfg.topics))?;
        w.report("profiles_hashtag", &profile_report(&hashtag_profiles, &cfg.topics))
    })?;
    summary.push("stage.aggregate", "done");

    if cfg.topics.len() >= 2 {
        stage("behavior", || {
            let joined = opinionated_user_join(&profiles, &cfg.topics)?;
            let corr = pairwise_correlations(&joined, &cfg.topics)?;
            let p = w.path("correlations.csv");
            write_correlations_csv(&p, &corr)?;
            let mut r = KvReport::new("correlations");
            r.push("joined_users", joined.len());
            for c in &corr {
                r.push_f64(format!("rho.{}.{}", c.topic_a, c.topic_b), c.rho)
                    .push(format!("p_value.{}.{}", c.topic_a, c.topic_b), format!("{:.6e}", c.p_value));
            }
            w.report("correlations", &r)?;
            if cfg.topics.len() >= 3 {
                let table =
                    conditional_probability_table(&joined, &cfg.topics, &cfg.topics[0], (&cfg.topics[1], &cfg.topics[2]))?;
                w.report("condtable", &table.to_report())?;
            }
            for other in &cfg.topics[1..] {
                let q = quadrant_export(&joined, &cfg.topics, (&cfg.topics[0], other))?;
                w.text(&format!("quadrants.{}.{other}.csv", cfg.topics[0]), &q.to_csv())?;
                w.report(&format!("quadrants.{}.{other}", cfg.topics[0]), &q.counts_report())?;
            }
            Ok(())
        })?;
        summary.push("stage.behavior", "done");
    }

    if cfg.network.enabled && !records.is_empty() {
        stage("network", || {
            let active: BTreeSet<String> = cleaned.values().flatten().map(|t| t.user_id.clone()).collect();
            let graph = prune_isolated(build_retweet_graph(&records, Some(&active))?);
            let mut r = graph.report();
            r.push("retweet_records", records.len());
            for t in &cfg.topics {
                let a = stance_edge_ratio(&graph, &category_map(&profiles, t), t, cfg.network.weighted);
                w.report(&format!("network.{t}"), &a.to_report())?;
            }
            w.report("network", &r)?;
            let target = category_map(&profiles, &cfg.topics[0]);
            let p = w.path("network/nodes.csv");
            write_text(&p, &graph.nodes_csv(&target))?;
            let p = w.path("network/edges.csv");
            write_text(&p, &graph.edges_csv())
        })?;
        summary.push("stage.network", "done");
    } else {
        summary.push("stage.network", "skipped");
    }

    if cfg.ablation.enabled && cfg.users.is_some() && cfg.topics.len() >= 2 {
        stage("ablation", || {
            let users: Vec<UserRecord> = read_jsonl(cfg.users.as_deref().expect("checked"))?;
            let history: Vec<Tweet> = match &cfg.history {
                Some(p) => read_jsonl(p)?,
                None => Vec::new(),
            };
            let related = &cfg.topics[1..];
            let specs = if cfg.ablation.specs.is_empty() {
                let mut s = default_ablation_specs(related, cfg.ablation.content_dim);
                if history.is_empty() {
                    s.retain(|n| {
                        !n.spec
                            .include_content
                            .contains(&crate::predict::ContentSource::Historical)
                    });
                }
                s
            } else {
                cfg.ablation.specs.clone()
            };
            let data = PredictData {
                target: cfg.topics[0].clone(),
                profiles: profiles.clone(),
                topic_tweets: cleaned.clone(),
                history,
                users,
            };
            let ac = AblationConfig {
                seed: seed::derive_seed(global, "ablation"),
                ..cfg.ablation.config.clone()
            };
            let report = run_ablation(&data, &specs, &ac)?;
            w.text("ablation.csv", &report.to_csv())?;
            w.report("ablation", &report.to_report())
        })?;
        summary.push("stage.ablation", "done");
    } else {
        summary.push("stage.ablation", "skipped");
    }

    w.report("summary", &summary)?;
    Ok(PipelineOutcome {
        output_dir: cfg.output_dir.clone(),
        written: w.written,
        summary,
    })
}

/// Writes a generated population as pipeline inputs (per-topic corpora,
/// lexicons, history, user records, ground truth) and returns a config that
/// points at them with paths relative to `dir`.
pub fn write_synthetic_bundle(corpus: &SyntheticCorpus, spec: &SyntheticSpec, dir: &Path) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig {
        seed: Some(spec.seed),
        topics: spec.topics.clone(),
        output_dir: PathBuf::from("out"),
        ..Default::default()
    };
    for (t, lex) in spec.topics.iter().zip(corpus.lexicons(spec)?) {
        let rel = PathBuf::from(format!("corpora/{t}.jsonl"));
        write_corpus(&dir.join(&rel), &corpus.tweets[t])?;
        cfg.corpora.insert(t.clone(), rel);
        let rel = PathBuf::from(format!("lexicons/{t}.toml"));
        write_text(&dir.join(&rel), &lex.to_toml_string())?;
        cfg.lexicons.insert(t.clone(), rel);
    }
    write_corpus(&dir.join("history.jsonl"), &corpus.history)?;
    cfg.history = Some(PathBuf::from("history.jsonl"));
    write_jsonl(&dir.join("users.jsonl"), &corpus.users)?;
    cfg.users = Some(PathBuf::from("users.jsonl"));
    write_text(&dir.join("truth.json"), &serde_json::to_string(&corpus.truth)?)?;
    write_text(&dir.join("pipeline.toml"), &cfg.to_toml_string()?)?;
    Ok(cfg)
}
