use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stancekit::behavior::{conditional_probability_table, pairwise_correlations, write_correlations_csv};
use stancekit::corpus::{
    clean_corpus, generate_synthetic_corpus, load_corpus, read_jsonl, write_corpus, write_jsonl, CleaningConfig,
    SyntheticSpec, Tweet,
};
use stancekit::network::{build_retweet_graph, prune_isolated, stance_edge_ratio, RetweetRecord};
use stancekit::pipeline::{run_pipeline, write_synthetic_bundle, PipelineConfig};
use stancekit::predict::{
    default_ablation_specs, read_users, run_ablation, AblationConfig, ContentSource, PredictData, PredictorKind,
};
use stancekit::profile::{
    aggregate_user_stances, opinionated_user_join, ProfileTable, Provenance, StanceCategory, ThresholdConfig,
};
use stancekit::report::{write_text, KvReport};
use stancekit::textmodel::{
    classify_texts, draw_sample, evaluate, train_text_classifier, EvalReport, LinearConfig, ModelFile, ModelKind,
    SamplingMethod, TokenizerConfig,
};
use stancekit::weaklabel::{
    bundled_lexicon, distribution_report, label_corpus, label_distribution, mask_hashtags, StanceLexicon,
    WeakLabeledTweet,
};
use stancekit::{StanceLabel, Topic};

mod overrides;

#[derive(Parser)]
#[command(name = "stancekit", version, about = "Hashtag-supervised stance detection and cross-topic behavior analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic population and a ready-to-run pipeline bundle.
    Synth(SynthArgs),
    /// Drop retweets, bot-like users and low-activity users from a corpus.
    Clean(CleanArgs),
    /// Weak-label tweets with a hashtag lexicon.
    Label(LabelArgs),
    /// Strip hashtags from labeled tweets (or from a single string).
    Mask(MaskArgs),
    /// Draw a random or stratified training sample from labeled tweets.
    Sample(SampleArgs),
    /// Train a text classifier on weak labels and save it.
    Train(TrainArgs),
    /// Score a saved classifier against weak labels.
    Eval(EvalArgs),
    /// Recompute the reference evaluation from the embedded confusion matrices.
    EvalGolden(EvalGoldenArgs),
    /// Build per-user stance profiles from labeled tweets.
    Aggregate(AggregateArgs),
    /// Pairwise Spearman correlations of support percentages.
    Correlate(CorrelateArgs),
    /// Conditional probability of target support given two other stances.
    Condtable(CondtableArgs),
    /// Retweet graph export and intra/inter-stance edge ratio.
    Network(NetworkArgs),
    /// Feature ablations for predicting a user's target stance.
    Ablate(AblateArgs),
    /// Run every stage from a config file.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Nb,
    Linear,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Nb => ModelKind::NaiveBayes,
            ModelArg::Linear => ModelKind::Linear,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Random,
    Stratified,
}

impl From<MethodArg> for SamplingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Random => SamplingMethod::Random,
            MethodArg::Stratified => SamplingMethod::Stratified,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictorArg {
    Gbt,
    Logreg,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for corpora, lexicons, users, ground truth and pipeline.toml.
    #[arg(long)]
    out: PathBuf,
    /// TOML file with generator settings; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override any generator field, e.g. `--set hashtag_emission_rate=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CleanArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    topic: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    bot_percentile: Option<f64>,
    #[arg(long)]
    min_posts: Option<usize>,
    #[arg(long)]
    keep_retweets: bool,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    topic: String,
    /// Lexicon TOML; the bundled lexicon for the topic is used when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MaskArgs {
    /// Labeled JSONL; each record gets its `masked_text` filled in.
    #[arg(long, required_unless_present = "text")]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    out: Option<PathBuf>,
    /// Mask one string and print it.
    #[arg(long, conflicts_with = "input")]
    text: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "stratified")]
    method: MethodArg,
    #[arg(long, default_value_t = 3000)]
    total: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled JSONL, used whole unless --total is given.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "nb")]
    model: ModelArg,
    /// Train on hashtag-masked text.
    #[arg(long)]
    masked: bool,
    /// Subsample before training.
    #[arg(long)]
    total: Option<usize>,
    #[arg(long, value_enum, default_value = "stratified")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Evaluate on masked text (default: whatever the model was trained on).
    #[arg(long, conflicts_with = "raw")]
    masked: bool,
    /// Evaluate on raw text.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct EvalGoldenArgs {
    /// Score an extra 3x3 matrix given as `a,b,c;d,e,f;g,h,i` (rows = gold).
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Args)]
struct AggregateArgs {
    /// `topic=labeled.jsonl`, repeatable.
    #[arg(long = "labeled", value_name = "TOPIC=PATH", required = true)]
    labeled: Vec<String>,
    /// `topic=model.json`: relabel that topic's tweets with a classifier.
    #[arg(long = "model", value_name = "TOPIC=PATH")]
    models: Vec<String>,
    #[arg(long)]
    upper: Option<f64>,
    #[arg(long)]
    lower: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long)]
    profiles: PathBuf,
    /// Comma-separated topic list.
    #[arg(long, value_delimiter = ',', required = true)]
    topics: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CondtableArgs {
    #[arg(long)]
    profiles: PathBuf,
    /// `target,first,second`.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    topics: Vec<String>,
}

#[derive(Args)]
struct NetworkArgs {
    /// Raw corpora holding retweet records, `topic=path`, repeatable.
    #[arg(long = "corpus", value_name = "TOPIC=PATH", required = true)]
    corpora: Vec<String>,
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    topic: String,
    /// Count each connected pair once instead of by retweet weight.
    #[arg(long)]
    unweighted: bool,
    /// Write nodes.csv and edges.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    target: String,
    /// Cleaned corpora, `topic=path`, repeatable; every non-target topic is a related topic.
    #[arg(long = "corpus", value_name = "TOPIC=PATH", required = true)]
    corpora: Vec<String>,
    #[arg(long)]
    users: PathBuf,
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gbt")]
    predictor: PredictorArg,
    #[arg(long, default_value_t = 512)]
    content_dim: usize,
    /// Restrict to the named specs (e.g. `stance.all`); repeatable.
    #[arg(long = "spec")]
    specs: Vec<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML pipeline config; relative paths resolve against its directory.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Output directory, relative to the working directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override any config field, e.g. `--set experiment.total=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    no_network: bool,
    #[arg(long)]
    no_ablation: bool,
    #[arg(long)]
    write_intermediate: bool,
}

fn topic_path(s: &str) -> Result<(Topic, PathBuf)> {
    let (t, p) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected TOPIC=PATH, got `{s}`"))?;
    Ok((Topic::new(t.trim()), PathBuf::from(p.trim())))
}

fn topics(list: &[String]) -> Vec<Topic> {
    list.iter().map(|t| Topic::new(t.trim())).collect()
}

fn read_labeled(path: &Path) -> Result<Vec<WeakLabeledTweet>> {
    read_jsonl(path).with_context(|| format!("reading labeled tweets from {}", path.display()))
}

fn read_profiles(path: &Path) -> Result<ProfileTable> {
    ProfileTable::read_csv(path, Provenance::Classifier).with_context(|| format!("reading {}", path.display()))
}

fn print(r: &KvReport) {
    print!("{}", r.render());
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let mut doc = match &a.config {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .parse::<toml::Table>()?,
        None => toml::Table::new(),
    };
    overrides::apply_all(&mut doc, &a.set)?;
    let mut spec: SyntheticSpec = doc.try_into().context("synthetic spec")?;
    if let Some(n) = a.users {
        spec.n_users = n;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let corpus = generate_synthetic_corpus(&spec)?;
    write_synthetic_bundle(&corpus, &spec, &a.out)?;
    let mut r = KvReport::new("synth");
    r.push("out", a.out.display()).push("users", spec.n_users).push("seed", spec.seed);
    for (t, tweets) in &corpus.tweets {
        r.push(format!("tweets.{t}"), tweets.len());
    }
    r.push("history_tweets", corpus.history.len());
    print(&r);
    Ok(())
}

fn cmd_clean(a: CleanArgs) -> Result<()> {
    let topic = Topic::new(&a.topic);
    let loaded = load_corpus(&a.input, &topic)?;
    print(&loaded.report(&a.input));
    let mut cfg = CleaningConfig::default();
    if let Some(p) = a.bot_percentile {
        cfg.bot_percentile = p;
    }
    if let Some(m) = a.min_posts {
        cfg.min_posts_per_topic = m;
    }
    cfg.drop_retweets = !a.keep_retweets;
    let (kept, report) = clean_corpus(loaded.tweets, &cfg)?;
    write_corpus(&a.out, &kept)?;
    print(&report.to_report());
    Ok(())
}

fn cmd_label(a: LabelArgs) -> Result<()> {
    let topic = Topic::new(&a.topic);
    let lex = match &a.lexicon {
        Some(p) => StanceLexicon::load(p)?,
        None => bundled_lexicon(&topic).ok_or_else(|| anyhow!("no bundled lexicon for `{topic}`; pass --lexicon"))?,
    };
    let loaded = load_corpus(&a.input, &topic)?;
    let labeled = label_corpus(&loaded.tweets, &lex)?;
    write_jsonl(&a.out, &labeled)?;
    print(&distribution_report(&topic, &label_distribution(&labeled)));
    Ok(())
}

fn cmd_mask(a: MaskArgs) -> Result<()> {
    if let Some(text) = a.text {
        println!("{}", mask_hashtags(&text));
        return Ok(());
    }
    let input = a.input.expect("clap enforces input");
    let mut labeled = read_labeled(&input)?;
    for t in &mut labeled {
        t.masked_text = Some(mask_hashtags(&t.tweet.text));
    }
    let out = a.out.unwrap_or(input);
    write_jsonl(&out, &labeled)?;
    let mut r = KvReport::new("mask");
    r.push("tweets", labeled.len()).push("out", out.display());
    print(&r);
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let pool = read_labeled(&a.input)?;
    let method = SamplingMethod::from(a.method);
    let (items, shortfalls) = draw_sample(&pool, method, a.total, a.seed)?;
    write_jsonl(&a.out, &items)?;
    let mut r = KvReport::new("sample");
    r.push("method", method.as_str())
        .push("requested", a.total)
        .push("drawn", items.len())
        .push("pool", pool.len());
    for l in StanceLabel::ALL {
        r.push(format!("drawn.{l}"), items.iter().filter(|x| x.label == l).count());
    }
    for (l, n) in shortfalls {
        r.push(format!("shortfall.{l}"), n);
    }
    print(&r);
    Ok(())
}

fn texts(items: &[WeakLabeledTweet], masked: bool) -> Vec<String> {
    items
        .iter()
        .map(|x| if masked { x.masked().into_owned() } else { x.tweet.text.clone() })
        .collect()
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let pool = read_labeled(&a.input)?;
    let items = match a.total {
        Some(total) => draw_sample(&pool, a.method.into(), total, a.seed)?.0,
        None => pool,
    };
    let text = texts(&items, a.masked);
    let docs: Vec<(&str, StanceLabel)> = text.iter().map(String::as_str).zip(items.iter().map(|x| x.label)).collect();
    let mut linear = LinearConfig {
        seed: a.seed,
        ..LinearConfig::default()
    };
    if let Some(l) = a.lambda {
        linear.lambda = l;
    }
    if let Some(e) = a.epochs {
        linear.epochs = e;
    }
    let tok = TokenizerConfig::default();
    let model = train_text_classifier(&docs, a.model.into(), &tok, a.alpha, &linear)?;
    ModelFile::new(&model, &tok, a.seed, a.masked).save(&a.out)?;
    let mut r = KvReport::new("train");
    r.push("model", model.kind())
        .push("masked", a.masked)
        .push("n_train", docs.len())
        .push("vocab_size", model.vocab().len())
        .push("out", a.out.display());
    print(&r);
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let model = file.classifier()?;
    let items = read_labeled(&a.input)?;
    let masked = if a.masked || a.raw { a.masked } else { file.train_masked };
    let text = texts(&items, masked);
    let refs: Vec<&str> = text.iter().map(String::as_str).collect();
    let predicted = classify_texts(&model, &refs, &file.tokenizer)?;
    let gold: Vec<StanceLabel> = items.iter().map(|x| x.label).collect();
    let mut r = evaluate(&gold, &predicted)?.to_report("eval");
    r.push("model", model.kind()).push("test_masked", masked);
    print(&r);
    Ok(())
}

const GOLDEN_HASHTAG: [[u64; 3]; 3] = [[12, 21, 0], [2, 51, 2], [0, 9, 3]];
const GOLDEN_TRANSFORMER: [[u64; 3]; 3] = [[22, 9, 2], [8, 45, 2], [1, 3, 8]];

fn from_matrix(m: Vec<Vec<u64>>) -> Result<EvalReport> {
    Ok(EvalReport::from_confusion(StanceLabel::ALL.to_vec(), m)?)
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<u64>>> {
    let rows: Vec<Vec<u64>> = s
        .split(';')
        .map(|row| row.split(',').map(|v| v.trim().parse::<u64>()).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()
        .context("matrix entries must be non-negative integers")?;
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        bail!("matrix must be 3x3");
    }
    Ok(rows)
}

fn cmd_eval_golden(a: EvalGoldenArgs) -> Result<()> {
    let to_vec = |m: [[u64; 3]; 3]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    print(&from_matrix(to_vec(GOLDEN_HASHTAG))?.to_report("golden.hashtag"));
    print(&from_matrix(to_vec(GOLDEN_TRANSFORMER))?.to_report("golden.transformer"));
    if let Some(m) = a.matrix {
        print(&from_matrix(parse_matrix(&m)?)?.to_report("matrix"));
    }
    Ok(())
}

fn cmd_aggregate(a: AggregateArgs) -> Result<()> {
    let labeled: Vec<(Topic, PathBuf)> = a.labeled.iter().map(|s| topic_path(s)).collect::<Result<_>>()?;
    let models: BTreeMap<Topic, PathBuf> = a.models.iter().map(|s| topic_path(s)).collect::<Result<_>>()?;
    if !models.is_empty() && models.len() != labeled.len() {
        bail!("give a --model for every topic or for none");
    }
    let mut th = ThresholdConfig::default();
    if let Some(u) = a.upper {
        th.upper = u;
    }
    if let Some(l) = a.lower {
        th.lower = l;
    }
    th.validate()?;
    let provenance = if models.is_empty() { Provenance::Hashtag } else { Provenance::Classifier };
    let mut table = ProfileTable::new(provenance);
    let mut r = KvReport::new("aggregate");
    r.push("provenance", provenance.as_str());
    for (t, p) in &labeled {
        let items = read_labeled(p)?;
        let labels: Vec<StanceLabel> = match models.get(t) {
            Some(mp) => {
                let file = ModelFile::load(mp)?;
                let text = texts(&items, file.train_masked);
                let refs: Vec<&str> = text.iter().map(String::as_str).collect();
                classify_texts(&file.classifier()?, &refs, &file.tokenizer)?
            }
            None => items.iter().map(|x| x.label).collect(),
        };
        let counts = aggregate_user_stances(items.iter().map(|x| x.tweet.user_id.as_str()).zip(labels));
        table.insert_topic(t.clone(), &counts, &th);
        let m = &table.topics[t];
        r.push(format!("{t}.users"), m.len());
        for c in [StanceCategory::Support, StanceCategory::Weak, StanceCategory::Against] {
            r.push(format!("{t}.{c}"), m.values().filter(|s| s.category == c).count());
        }
    }
    table.write_csv(&a.out)?;
    print(&r);
    Ok(())
}

fn cmd_correlate(a: CorrelateArgs) -> Result<()> {
    let table = read_profiles(&a.profiles)?;
    let ts = topics(&a.topics);
    let joined = opinionated_user_join(&table, &ts)?;
    let corr = pairwise_correlations(&joined, &ts)?;
    if let Some(out) = &a.out {
        write_correlations_csv(out, &corr)?;
    }
    let mut r = KvReport::new("correlations");
    r.push("joined_users", joined.len());
    for c in &corr {
        r.push_f64(format!("rho.{}.{}", c.topic_a, c.topic_b), c.rho)
            .push(format!("p_value.{}.{}", c.topic_a, c.topic_b), format!("{:.6e}", c.p_value));
    }
    print(&r);
    Ok(())
}

fn cmd_condtable(a: CondtableArgs) -> Result<()> {
    let ts = topics(&a.topics);
    if ts.len() != 3 {
        bail!("--topics takes exactly three topics: target,first,second");
    }
    let table = read_profiles(&a.profiles)?;
    let joined = opinionated_user_join(&table, &ts)?;
    let ct = conditional_probability_table(&joined, &ts, &ts[0], (&ts[1], &ts[2]))?;
    print(&ct.to_report());
    Ok(())
}

fn retweet_records(tweets: &[Tweet]) -> impl Iterator<Item = RetweetRecord> + '_ {
    tweets.iter().filter(|t| t.is_retweet).filter_map(|t| {
        t.retweeted_user_id
            .as_ref()
            .map(|r| RetweetRecord::new(t.user_id.clone(), r.clone()))
    })
}

fn cmd_network(a: NetworkArgs) -> Result<()> {
    let mut records = Vec::new();
    for s in &a.corpora {
        let (t, p) = topic_path(s)?;
        records.extend(retweet_records(&load_corpus(&p, &t)?.tweets));
    }
    let graph = prune_isolated(build_retweet_graph(&records, None)?);
    let table = read_profiles(&a.profiles)?;
    let topic = Topic::new(&a.topic);
    let stances: BTreeMap<String, StanceCategory> = table
        .topics
        .get(&topic)
        .ok_or_else(|| anyhow!("profiles have no topic `{topic}`"))?
        .iter()
        .map(|(u, s)| (u.clone(), s.category))
        .collect();
    if let Some(dir) = &a.out {
        graph.export(dir, &stances)?;
    }
    print(&graph.report());
    print(&stance_edge_ratio(&graph, &stances, &topic, !a.unweighted).to_report());
    Ok(())
}

fn cmd_ablate(a: AblateArgs) -> Result<()> {
    let target = Topic::new(&a.target);
    let mut topic_tweets = BTreeMap::new();
    for s in &a.corpora {
        let (t, p) = topic_path(s)?;
        let tweets = load_corpus(&p, &t)?.tweets;
        topic_tweets.insert(t, tweets);
    }
    let related: Vec<Topic> = topic_tweets.keys().filter(|t| **t != target).cloned().collect();
    let history: Vec<Tweet> = match &a.history {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let mut specs = default_ablation_specs(&related, a.content_dim);
    if history.is_empty() {
        specs.retain(|s| !s.spec.include_content.contains(&ContentSource::Historical));
    }
    if !a.specs.is_empty() {
        for name in &a.specs {
            if !specs.iter().any(|s| &s.name == name) {
                bail!("unknown spec `{name}`");
            }
        }
        specs.retain(|s| a.specs.contains(&s.name));
    }
    let data = PredictData {
        target,
        profiles: read_profiles(&a.profiles)?,
        topic_tweets,
        history,
        users: read_users(&a.users)?,
    };
    let cfg = AblationConfig {
        predictor: match a.predictor {
            PredictorArg::Gbt => PredictorKind::Gbt,
            PredictorArg::Logreg => PredictorKind::Logreg,
        },
        seed: a.seed,
        ..AblationConfig::default()
    };
    let report = run_ablation(&data, &specs, &cfg)?;
    if let Some(out) = &a.out {
        write_text(out, &report.to_csv())?;
    }
    print(&report.to_report());
    Ok(())
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut doc: toml::Table = text.parse().with_context(|| format!("parsing {}", a.config.display()))?;
    overrides::apply_all(&mut doc, &a.set)?;
    let mut cfg = PipelineConfig::from_toml_str(&toml::to_string(&doc)?)?;
    if let Some(base) = a.config.parent() {
        cfg.resolve_paths(base);
    }
    cfg.seed = Some(a.seed);
    if let Some(d) = a.output_dir {
        cfg.output_dir = d;
    }
    if a.no_network {
        cfg.network.enabled = false;
    }
    if a.no_ablation {
        cfg.ablation.enabled = false;
    }
    if a.write_intermediate {
        cfg.write_intermediate = true;
    }
    let outcome = run_pipeline(&cfg)?;
    print(&outcome.summary);
    println!("reports written to {}", outcome.output_dir.join("reports").display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Clean(a) => cmd_clean(a),
        Command::Label(a) => cmd_label(a),
        Command::Mask(a) => cmd_mask(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::EvalGolden(a) => cmd_eval_golden(a),
        Command::Aggregate(a) => cmd_aggregate(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Condtable(a) => cmd_condtable(a),
        Command::Network(a) => cmd_network(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
