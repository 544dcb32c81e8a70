//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout; the
//! process exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;

use stancekit::behavior::{spearman_pvalue, spearman_rho};
use stancekit::corpus::{extract_hashtags, generate_synthetic_corpus, SyntheticSpec, Tweet, DEFAULT_COUPLING};
use stancekit::network::{build_retweet_graph, planted_partition, stance_edge_ratio, RetweetRecord};
use stancekit::pipeline::{run_pipeline, write_synthetic_bundle, PipelineConfig};
use stancekit::predict::{default_ablation_specs, majority_baseline};
use stancekit::profile::StanceCategory;
use stancekit::report::parse_kv;
use stancekit::seed;
use stancekit::textmodel::{
    evaluate, run_experiment_matrix, train_text_classifier, EvalReport, ExperimentConfig, LinearConfig, ModelFile,
    ModelKind, SamplingMethod, TokenizerConfig,
};
use stancekit::weaklabel::{bundled_lexicon, detect_stance, label_corpus, StanceLexicon};
use stancekit::{StanceLabel, Topic};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- 1

fn expand(m: [[u64; 3]; 3]) -> (Vec<StanceLabel>, Vec<StanceLabel>) {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (g, row) in m.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                gold.push(StanceLabel::ALL[g]);
                pred.push(StanceLabel::ALL[p]);
            }
        }
    }
    (gold, pred)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let hashtag = [[12, 21, 0], [2, 51, 2], [0, 9, 3]];
    let transformer = [[22, 9, 2], [8, 45, 2], [1, 3, 8]];
    let (g, p) = expand(hashtag);
    let h = evaluate(&g, &p).map_err(|e| e.to_string())?;
    let (g, p) = expand(transformer);
    let t = evaluate(&g, &p).map_err(|e| e.to_string())?;
    let direct = EvalReport::from_confusion(
        StanceLabel::ALL.to_vec(),
        transformer.iter().map(|r| r.to_vec()).collect(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check((h.macro_f1 - 0.54).abs() <= 0.005, format!("hashtag macro F1 {:.4}", h.macro_f1))?;
    check((t.macro_f1 - 0.72).abs() <= 0.005, format!("transformer macro F1 {:.4}", t.macro_f1))?;
    check((t.accuracy - 0.75).abs() <= 0.005, format!("transformer accuracy {:.4}", t.accuracy))?;
    check(direct == t, "confusion-matrix and label-list paths disagree")?;
    within_time(elapsed, 1.0)?;
    Ok(format!(
        "hashtag F1 {:.4}, transformer F1 {:.4}, accuracy {:.4}, {:.3}s",
        h.macro_f1,
        t.macro_f1,
        t.accuracy,
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

/// Hashtags found by scanning whitespace-separated chunks: a chunk starting
/// with `#` contributes the run of word characters that follows.
fn oracle_tags(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut chars = chunk.chars();
        if chars.next() != Some('#') {
            continue;
        }
        let tag: String = chars.take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        if !tag.is_empty() {
            out.push(tag.to_lowercase());
        }
    }
    out
}

/// Lexicon-driven scoring: walk the lexicon, add one per support tag that
/// occurs in the tweet and subtract one per against tag that occurs.
fn oracle_score(text: &str, support: &[String], against: &[String]) -> i64 {
    let tags = oracle_tags(text);
    let occurs = |t: &String| tags.iter().any(|x| x == t);
    support.iter().filter(|t| occurs(t)).count() as i64 - against.iter().filter(|t| occurs(t)).count() as i64
}

fn oracle_label(score: i64) -> StanceLabel {
    match score {
        s if s > 0 => StanceLabel::Support,
        s if s < 0 => StanceLabel::Against,
        _ => StanceLabel::NonOpinionated,
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(2);
    let pool: Vec<String> = (0..14).map(|i| format!("tag{i}")).collect();
    let words = ["vote", "today", "a#b", "go!", "news", "#", "##x", "ok.", "x_y"];
    let mut mismatches = 0;
    let mut ties = 0;
    for case in 0..10_000 {
        let mut shuffled = pool.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let ns = rng.random_range(0..5);
        let na = rng.random_range(0..5);
        let support: Vec<String> = shuffled[..ns].to_vec();
        let against: Vec<String> = shuffled[ns..ns + na].to_vec();
        let lex = StanceLexicon::new(Topic::from("t"), &support, &against).map_err(|e| e.to_string())?;

        let mut parts: Vec<String> = Vec::new();
        for _ in 0..rng.random_range(0..12) {
            if rng.random_bool(0.5) {
                let tag = pool.choose(&mut rng).unwrap();
                let cased = if rng.random_bool(0.3) { tag.to_uppercase() } else { tag.clone() };
                let suffix = ["", "!", ",", "", "..."][rng.random_range(0..5)];
                parts.push(format!("#{cased}{suffix}"));
            } else {
                parts.push(words.choose(&mut rng).unwrap().to_string());
            }
        }
        let text = parts.join(if rng.random_bool(0.2) { "  " } else { " " });
        let tweet = Tweet {
            tweet_id: case.to_string(),
            user_id: "u".into(),
            topic: Topic::from("t"),
            hashtags: extract_hashtags(&text),
            text: text.clone(),
            created_at: Default::default(),
            is_retweet: false,
            retweeted_user_id: None,
        };
        let expected = oracle_score(&text, &support, &against);
        let (label, score) = detect_stance(&tweet, &lex);
        let (swapped_label, swapped_score) = detect_stance(&tweet, &lex.swapped());
        if expected == 0 && !oracle_tags(&text).is_empty() {
            ties += 1;
        }
        if score != expected
            || label != oracle_label(expected)
            || swapped_score != -score
            || swapped_label != label.flipped()
        {
            mismatches += 1;
            if mismatches == 1 {
                eprintln!("first mismatch: {text:?} S={support:?} A={against:?} got {score} want {expected}");
            }
        }
    }
    let elapsed = start.elapsed();
    check(mismatches == 0, format!("{mismatches} of 10000 cases disagree with the oracle"))?;
    within_time(elapsed, 10.0)?;
    Ok(format!(
        "10000 cases agree (incl. {ties} tagged ties and S/A swap), {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 3

fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

/// Two-sided t-test p-value by quadrature. With x = sqrt(df) tan(theta) the
/// t density integrates as cos^(df-1), so p = 1 - I(atan(|t|/sqrt(df))) / I(pi/2).
fn oracle_pvalue(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = rho.abs() * (df / (1.0 - rho * rho)).sqrt();
    let integrate = |upper: f64| {
        let steps = 20_000;
        let h = upper / steps as f64;
        let f = |th: f64| th.cos().powf(df - 1.0);
        let mut s = f(0.0) + f(upper);
        for i in 1..steps {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let theta = (t / df.sqrt()).atan();
    (1.0 - integrate(theta) / integrate(std::f64::consts::FRAC_PI_2)).max(0.0)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(3);
    let mut worst_rho = 0.0f64;
    let mut compared = 0;
    for _ in 0..1000 {
        let n = rng.random_range(3..=200);
        let levels = rng.random_range(2..=n.max(3));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| if rng.random_bool(0.5) { x[i] * 2.0 + rng.random_range(0..3) as f64 } else { rng.random_range(0..levels) as f64 })
            .collect();
        let expected = oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y));
        match (spearman_rho(&x, &y), expected) {
            (Ok(r), Some(e)) => {
                worst_rho = worst_rho.max((r - e).abs());
                compared += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("n={n}: got {got:?}, oracle {want:?}")),
        }
    }
    check(worst_rho <= 1e-9, format!("rho deviates by {worst_rho:e}"))?;
    let mut worst_p = 0.0f64;
    for n in [10usize, 50, 100] {
        for k in 0..40 {
            let rho = -0.95 + k as f64 * 0.0475;
            let got = spearman_pvalue(rho, n).map_err(|e| e.to_string())?;
            worst_p = worst_p.max((got - oracle_pvalue(rho, n)).abs());
        }
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let y: Vec<f64> = x.iter().map(|v| v + rng.random::<f64>()).collect();
            let rho = spearman_rho(&x, &y).map_err(|e| e.to_string())?;
            let got = spearman_pvalue(rho, n).map_err(|e| e.to_string())?;
            worst_p = worst_p.max((got - oracle_pvalue(rho, n)).abs());
        }
    }
    let elapsed = start.elapsed();
    check(worst_p <= 1e-6, format!("p-value deviates by {worst_p:e}"))?;
    within_time(elapsed, 10.0)?;
    Ok(format!(
        "{compared} vectors, max |drho| {worst_rho:.1e}, max |dp| {worst_p:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Outcome {
    let labels: Vec<StanceCategory> = (0..100)
        .map(|i| if i < 73 { StanceCategory::Support } else { StanceCategory::Against })
        .collect();
    let e = majority_baseline(&labels, &labels).map_err(|e| e.to_string())?;
    check((e.macro_f1 - 0.42).abs() <= 0.01, format!("macro F1 {:.4}", e.macro_f1))?;
    check((e.accuracy - 0.73).abs() <= 0.01, format!("accuracy {:.4}", e.accuracy))?;
    Ok(format!(
        "macro F1 {:.4} (majority F1 {:.4}, minority {:.4}), accuracy {:.4}",
        e.macro_f1, e.per_class_f1[1], e.per_class_f1[0], e.accuracy
    ))
}

// ---------------------------------------------------------------- 5 and 8

struct EndToEnd {
    elapsed: Duration,
    reports: BTreeMap<String, BTreeMap<String, String>>,
}

fn read_report(dir: &Path, name: &str) -> Result<BTreeMap<String, String>, String> {
    let p = dir.join("reports").join(format!("{name}.txt"));
    std::fs::read_to_string(&p)
        .map(|t| parse_kv(&t))
        .map_err(|e| format!("{}: {e}", p.display()))
}

fn end_to_end() -> Result<EndToEnd, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let spec = SyntheticSpec::three_topic(5000, 42);
    let corpus = generate_synthetic_corpus(&spec).map_err(|e| e.to_string())?;
    let mut cfg = write_synthetic_bundle(&corpus, &spec, dir.path()).map_err(|e| e.to_string())?;
    cfg.resolve_paths(dir.path());
    let related = [Topic::from("mask"), Topic::from("racial")];
    cfg.ablation.specs = default_ablation_specs(&related, cfg.ablation.content_dim)
        .into_iter()
        .filter(|s| ["statistics", "stance.all", "stance+content+stats"].contains(&s.name.as_str()))
        .collect();
    let out = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut reports = BTreeMap::new();
    for name in ["correlations", "condtable", "ablation"] {
        reports.insert(name.to_string(), read_report(&out.output_dir, name)?);
    }
    Ok(EndToEnd { elapsed, reports })
}

fn num(map: &BTreeMap<String, String>, key: &str) -> Result<f64, String> {
    map.get(key)
        .ok_or_else(|| format!("missing {key}"))?
        .parse()
        .map_err(|e| format!("{key}: {e}"))
}

fn criterion_5(run: &Result<EndToEnd, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let corr = &run.reports["correlations"];
    let cond = &run.reports["condtable"];
    let pairs = [("trump", "mask", 0, 1), ("trump", "racial", 0, 2), ("mask", "racial", 1, 2)];
    let mut detail = Vec::new();
    for (a, b, i, j) in pairs {
        let rho = num(corr, &format!("rho.{a}.{b}"))?;
        let planted = DEFAULT_COUPLING[i][j];
        check(rho.signum() == planted.signum(), format!("rho.{a}.{b} = {rho:.3} has the wrong sign"))?;
        check(
            (rho.abs() - planted.abs()).abs() <= 0.1,
            format!("|rho.{a}.{b}| = {:.3} vs planted {:.2}", rho.abs(), planted.abs()),
        )?;
        detail.push(format!("{a}-{b} {rho:+.3} (planted {planted:+.2})"));
    }
    let paa = num(cond, "p.against.against")?;
    let pss = num(cond, "p.support.support")?;
    check(paa - pss > 0.4, format!("P(S|A,A) - P(S|S,S) = {:.3}", paa - pss))?;
    within_time(run.elapsed, 120.0)?;
    Ok(format!(
        "{}; P(S|A,A) {paa:.3} vs P(S|S,S) {pss:.3}; pipeline {:.1}s",
        detail.join(", "),
        run.elapsed.as_secs_f64()
    ))
}

fn criterion_8(run: &Result<EndToEnd, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let ab = &run.reports["ablation"];
    let stance = num(ab, "macro_f1.stance.all")?;
    let stats = num(ab, "macro_f1.statistics")?;
    let combined = num(ab, "macro_f1.stance+content+stats")?;
    check(stance >= 0.9, format!("stance-only F1 {stance:.3} < 0.9"))?;
    check(stats <= 0.6, format!("stats-only F1 {stats:.3} > 0.6"))?;
    check(combined >= stance, format!("combined F1 {combined:.3} < stance-only {stance:.3}"))?;
    within_time(run.elapsed, 120.0)?;
    Ok(format!(
        "stance {stance:.3}, stats {stats:.3}, stance+content+stats {combined:.3}; pipeline {:.1}s",
        run.elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 6

fn labeled_trump(spec: &SyntheticSpec) -> Result<Vec<stancekit::weaklabel::WeakLabeledTweet>, String> {
    let corpus = generate_synthetic_corpus(spec).map_err(|e| e.to_string())?;
    let t = Topic::from("trump");
    let lex = bundled_lexicon(&t).ok_or("no bundled lexicon")?;
    label_corpus(&corpus.tweets[&t], &lex).map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let mut spec = SyntheticSpec::three_topic(1000, 6);
    spec.word_signal = 0.08;
    spec.hashtag_emission_rate = 0.95;
    spec.retweets_per_user_range = (0, 0);
    let labeled = labeled_trump(&spec)?;
    let cfg = ExperimentConfig {
        total: 3000,
        methods: vec![SamplingMethod::Random],
        ..Default::default()
    };
    let m = run_experiment_matrix(&labeled, &cfg, &TokenizerConfig::default(), 6).map_err(|e| e.to_string())?;
    let f1 = |train_masked: bool, model: &str| -> Result<f64, String> {
        m.cell(SamplingMethod::Random, train_masked, true, model)
            .map(|c| c.eval.macro_f1)
            .ok_or_else(|| format!("missing cell {model}"))
    };
    let (lin_raw, lin_masked) = (f1(false, "linear")?, f1(true, "linear")?);
    let (nb_raw, nb_masked) = (f1(false, "naive_bayes")?, f1(true, "naive_bayes")?);
    check(
        lin_masked - lin_raw >= 0.1,
        format!("linear gap {:.3} (raw-train {lin_raw:.3}, masked-train {lin_masked:.3})", lin_masked - lin_raw),
    )?;
    check(nb_raw < nb_masked, format!("naive bayes raw-train {nb_raw:.3} not below masked-train {nb_masked:.3}"))?;
    Ok(format!(
        "masked test set: linear {lin_raw:.3} -> {lin_masked:.3} (gap {:.3}); naive bayes {nb_raw:.3} -> {nb_masked:.3}",
        lin_masked - lin_raw
    ))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut spec = SyntheticSpec::three_topic(1000, 7);
    spec.opinion_rate = 0.2;
    spec.hashtag_emission_rate = 1.0;
    spec.word_signal = 0.25;
    spec.retweets_per_user_range = (0, 0);
    let labeled = labeled_trump(&spec)?;
    let n = labeled.len() as f64;
    let share = |l: StanceLabel| labeled.iter().filter(|t| t.label == l).count() as f64 / n;
    let (a, o, s) = (share(StanceLabel::Against), share(StanceLabel::NonOpinionated), share(StanceLabel::Support));
    check((o - 0.8).abs() < 0.03, format!("pool is {a:.2}/{o:.2}/{s:.2}, not 80/10/10"))?;
    let cfg = ExperimentConfig {
        total: 1500,
        ..Default::default()
    };
    let m = run_experiment_matrix(&labeled, &cfg, &TokenizerConfig::default(), 7).map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for model in ["naive_bayes", "linear"] {
        let minority = |method| -> Result<f64, String> {
            let c = m.cell(method, true, true, model).ok_or("missing cell")?;
            check(c.n_train == 1500, format!("{model} trained on {} items", c.n_train))?;
            let e = &c.eval;
            Ok((e.f1(StanceLabel::Against).unwrap() + e.f1(StanceLabel::Support).unwrap()) / 2.0)
        };
        let (r, st) = (minority(SamplingMethod::Random)?, minority(SamplingMethod::Stratified)?);
        check(st > r, format!("{model}: stratified minority F1 {st:.3} <= random {r:.3}"))?;
        detail.push(format!("{model} {r:.3} -> {st:.3}"));
    }
    Ok(format!(
        "pool {:.0}/{:.0}/{:.0}, minority F1 random -> stratified: {}",
        a * 100.0,
        o * 100.0,
        s * 100.0,
        detail.join(", ")
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let t = Topic::from("t");
    let mut ratios = Vec::new();
    for (k, h) in [0.5, 0.7, 0.9].into_iter().enumerate() {
        let (records, stances) = planted_partition(1000, 20_000, h, 90 + k as u64).map_err(|e| e.to_string())?;
        let g = build_retweet_graph(&records, None).map_err(|e| e.to_string())?;
        let r = stance_edge_ratio(&g, &stances, &t, true);
        check(
            r.intra_edges + r.inter_edges + r.skipped_edges == g.total_weight(),
            "weighted buckets do not sum to the total",
        )?;
        let u = stance_edge_ratio(&g, &stances, &t, false);
        check(
            u.intra_edges + u.inter_edges + u.skipped_edges == g.edge_count() as u64,
            "unweighted buckets do not sum to the edge count",
        )?;
        ratios.push(r.ratio.ok_or("ratio undefined")?);
    }
    check(
        ratios.windows(2).all(|w| w[0] < w[1]),
        format!("ratios not strictly increasing: {ratios:?}"),
    )?;

    let (records, stances) = planted_partition(200, 2000, 0.7, 5).map_err(|e| e.to_string())?;
    let g = build_retweet_graph(&records, None).map_err(|e| e.to_string())?;
    let same: BTreeMap<String, StanceCategory> = stances.keys().map(|u| (u.clone(), StanceCategory::Support)).collect();
    let r = stance_edge_ratio(&g, &same, &t, true);
    check(r.undefined && r.ratio.is_none() && r.inter_edges == 0, "all-same-stance graph did not flag undefined")?;

    // Mixed fixture with unstanced endpoints and self-retweets.
    let mut rng = seed::rng(9);
    let records: Vec<RetweetRecord> = (0..5000)
        .map(|_| RetweetRecord::new(format!("n{}", rng.random_range(0..60)), format!("n{}", rng.random_range(0..60))))
        .collect();
    let g = build_retweet_graph(&records, None).map_err(|e| e.to_string())?;
    let cats = [StanceCategory::Support, StanceCategory::Against, StanceCategory::Weak];
    let mixed: BTreeMap<String, StanceCategory> = (0..50)
        .map(|i| (format!("n{i}"), cats[rng.random_range(0..3)]))
        .collect();
    let r = stance_edge_ratio(&g, &mixed, &t, true);
    check(
        r.intra_edges + r.inter_edges + r.skipped_edges == g.total_weight() && r.total_edges == g.total_weight(),
        "mixed fixture buckets do not sum to the total",
    )?;
    check(r.skipped_edges > 0, "mixed fixture skipped nothing")?;
    Ok(format!(
        "ratios {:.3} < {:.3} < {:.3}; undefined flag set; intra+inter+skipped exact ({} + {} + {} = {})",
        ratios[0],
        ratios[1],
        ratios[2],
        r.intra_edges,
        r.inter_edges,
        r.skipped_edges,
        g.total_weight()
    ))
}

// ---------------------------------------------------------------- 10

fn numeric_outputs(root: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let p = entry.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = SyntheticSpec::three_topic(400, 10);
    let corpus = generate_synthetic_corpus(&spec).map_err(|e| e.to_string())?;
    write_synthetic_bundle(&corpus, &spec, dir.path()).map_err(|e| e.to_string())?;
    let mut cfg = PipelineConfig::load(&dir.path().join("pipeline.toml")).map_err(|e| e.to_string())?;
    cfg.write_intermediate = true;
    cfg.ablation.content_dim = 64;
    cfg.ablation.config.gbt.rounds = 50;
    cfg.output_dir = dir.path().join("run_a");
    run_pipeline(&cfg).map_err(|e| e.to_string())?;
    cfg.output_dir = dir.path().join("run_b");
    run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let a = numeric_outputs(&dir.path().join("run_a"))?;
    let b = numeric_outputs(&dir.path().join("run_b"))?;
    check(!a.is_empty(), "no outputs")?;
    let keys_a: BTreeSet<&String> = a.keys().collect();
    let keys_b: BTreeSet<&String> = b.keys().collect();
    check(keys_a == keys_b, "runs produced different file sets")?;
    let differing: Vec<&String> = a.iter().filter(|(k, v)| b[*k] != **v).map(|(k, _)| k).collect();
    check(differing.is_empty(), format!("files differ: {differing:?}"))?;

    // Save/load round trip on 1,000 random inputs for both classifier kinds.
    let t = Topic::from("trump");
    let lex = bundled_lexicon(&t).ok_or("no lexicon")?;
    let labeled = label_corpus(&corpus.tweets[&t], &lex).map_err(|e| e.to_string())?;
    let docs: Vec<(&str, StanceLabel)> = labeled.iter().take(3000).map(|w| (w.tweet.text.as_str(), w.label)).collect();
    let tok = TokenizerConfig::default();
    let mut rng = seed::rng(1010);
    for kind in [ModelKind::NaiveBayes, ModelKind::Linear] {
        let model = train_text_classifier(&docs, kind, &tok, 1.0, &LinearConfig::default()).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("model.{}.json", kind.as_str()));
        ModelFile::new(&model, &tok, 10, false).save(&path).map_err(|e| e.to_string())?;
        let loaded = ModelFile::load(&path)
            .and_then(|f| f.classifier())
            .map_err(|e| e.to_string())?;
        let vocab: Vec<String> = model.vocab().tokens().to_vec();
        for i in 0..1000 {
            let len = rng.random_range(0..15);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.85) {
                        vocab.choose(&mut rng).unwrap().clone()
                    } else {
                        format!("oov{}", rng.random_range(0..100))
                    }
                })
                .collect();
            let text = words.join(" ");
            let p1 = model.classify_text(&text, &tok).map_err(|e| e.to_string())?;
            let p2 = loaded.classify_text(&text, &tok).map_err(|e| e.to_string())?;
            let same_bits = p1.scores.iter().zip(&p2.scores).all(|(x, y)| x.to_bits() == y.to_bits());
            check(p1.label == p2.label && same_bits, format!("{} input {i} differs after reload", kind.as_str()))?;
        }
    }
    Ok(format!(
        "{} output files byte-identical across runs; 2 x 1000 reloaded classifications bit-identical",
        a.len()
    ))
}

fn main() {
    let names = [
        "golden evaluation values",
        "hashtag scoring oracle",
        "spearman oracle",
        "majority baseline",
        "end-to-end sign reproduction",
        "masking generalization",
        "stratified vs random",
        "ablation ordering",
        "network homophily",
        "determinism",
    ];
    let guard = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        })
    };
    let e2e = catch_unwind(end_to_end).unwrap_or_else(|_| Err("end-to-end run panicked".into()));
    let results: Vec<Outcome> = vec![
        guard(&criterion_1),
        guard(&criterion_2),
        guard(&criterion_3),
        guard(&criterion_4),
        guard(&|| criterion_5(&e2e)),
        guard(&criterion_6),
        guard(&criterion_7),
        guard(&|| criterion_8(&e2e)),
        guard(&criterion_9),
        guard(&criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, r)) in names.iter().zip(&results).enumerate() {
        match r {
            Ok(d) => println!("criterion {:>2} [{name}]: PASS ({d})", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} [{name}]: FAIL ({e})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
