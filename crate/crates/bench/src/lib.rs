//! Fixtures shared by the benchmarks.

use stancekit::corpus::{generate_synthetic_corpus, SyntheticCorpus, SyntheticSpec};
use stancekit::weaklabel::{bundled_lexicon, label_corpus, WeakLabeledTweet};
use stancekit::Topic;

pub fn corpus(n_users: usize, seed: u64) -> (SyntheticSpec, SyntheticCorpus) {
    let spec = SyntheticSpec::three_topic(n_users, seed);
    let corpus = generate_synthetic_corpus(&spec).expect("valid default spec");
    (spec, corpus)
}

/// Weak-labeled tweets of the target topic.
pub fn labeled(corpus: &SyntheticCorpus) -> Vec<WeakLabeledTweet> {
    let t = Topic::new("trump");
    let lex = bundled_lexicon(&t).expect("bundled lexicon");
    label_corpus(&corpus.tweets[&t], &lex).expect("non-empty corpus")
}

/// Dense rows with a noisy linear decision boundary, deterministic in `seed`.
pub fn tabular(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    use rand::Rng;
    let mut rng = stancekit::seed::rng(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y = x
        .iter()
        .map(|r| r.iter().take(3).sum::<f64>() + rng.random_range(-0.5..0.5) > 0.0)
        .collect();
    (x, y)
}
