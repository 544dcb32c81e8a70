//! Retweet graphs and stance assortativity.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::profile::StanceCategory;
use crate::report::{fmt_f64, KvReport};
use crate::seed;
use crate::stance::Topic;

/// A retweet event: `retweeter` reposted content by `retweeted`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RetweetRecord {
    pub retweeter: String,
    pub retweeted: String,
}

impl RetweetRecord {
    pub fn new(retweeter: impl Into<String>, retweeted: impl Into<String>) -> Self {
        RetweetRecord {
            retweeter: retweeter.into(),
            retweeted: retweeted.into(),
        }
    }
}

/// Undirected weighted simple graph; edge keys are stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetweetGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
    /// Records dropped because an endpoint was outside the user filter.
    pub skipped_records: usize,
    pub self_loops_dropped: usize,
}

impl RetweetGraph {
    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(String, String), u64> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        self.edges.get(&edge_key(a, b)).copied()
    }

    pub fn degree(&self, node: &str) -> usize {
        self.edges.keys().filter(|(a, b)| a == node || b == node).count()
    }

    pub fn add_node(&mut self, node: impl Into<String>) {
        self.nodes.insert(node.into());
    }

    /// Adds `weight` to the edge (a, b), creating endpoints as needed.
    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: u64) {
        if a == b || weight == 0 {
            return;
        }
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        *self.edges.entry(edge_key(a, b)).or_insert(0) += weight;
    }

    pub fn report(&self) -> KvReport {
        let mut r = KvReport::new("retweet_graph");
        r.push("nodes", self.node_count())
            .push("edges", self.edge_count())
            .push("total_weight", self.total_weight())
            .push("skipped_records", self.skipped_records)
            .push("self_loops_dropped", self.self_loops_dropped);
        r
    }

    /// Node list (`Id,Label,stance`) for graph viewers such as Gephi.
    pub fn nodes_csv(&self, stances: &BTreeMap<String, StanceCategory>) -> String {
        let mut text = String::from("Id,Label,stance\n");
        for n in &self.nodes {
            let s = stances.get(n).map(|c| c.as_str()).unwrap_or("none");
            text.push_str(&format!("{n},{n},{s}\n"));
        }
        text
    }

    pub fn edges_csv(&self) -> String {
        let mut text = String::from("Source,Target,Type,Weight\n");
        for ((a, b), w) in &self.edges {
            text.push_str(&format!("{a},{b},Undirected,{w}\n"));
        }
        text
    }

    pub fn export(&self, dir: &Path, stances: &BTreeMap<String, StanceCategory>) -> Result<()> {
        crate::report::write_text(&dir.join("nodes.csv"), &self.nodes_csv(stances))?;
        crate::report::write_text(&dir.join("edges.csv"), &self.edges_csv())
    }
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Collapses retweet records into an undirected weighted graph. With a user
/// filter, every filtered user becomes a node (possibly isolated) and records
/// touching other users are skipped and counted.
pub fn build_retweet_graph(records: &[RetweetRecord], user_filter: Option<&BTreeSet<String>>) -> Result<RetweetGraph> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no retweet records".into()));
    }
    let mut g = RetweetGraph::default();
    if let Some(users) = user_filter {
        g.nodes.extend(users.iter().cloned());
    }
    for r in records {
        if let Some(users) = user_filter {
            if !users.contains(&r.retweeter) || !users.contains(&r.retweeted) {
                g.skipped_records += 1;
                continue;
            }
        }
        if r.retweeter == r.retweeted {
            g.self_loops_dropped += 1;
            continue;
        }
        g.add_edge(&r.retweeter, &r.retweeted, 1);
    }
    Ok(g)
}

/// Drops nodes without edges.
pub fn prune_isolated(mut graph: RetweetGraph) -> RetweetGraph {
    let mut incident = BTreeSet::new();
    for (a, b) in graph.edges.keys() {
        incident.insert(a.clone());
        incident.insert(b.clone());
    }
    graph.nodes = incident;
    graph
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssortativityReport {
    pub topic: Topic,
    pub weighted: bool,
    pub intra_edges: u64,
    pub inter_edges: u64,
    pub skipped_edges: u64,
    pub total_edges: u64,
    /// `None` exactly when `undefined` is set.
    pub ratio: Option<f64>,
    pub undefined: bool,
}

impl AssortativityReport {
    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new(format!("assortativity.{}", self.topic));
        r.push("topic", &self.topic)
            .push("weighted", self.weighted)
            .push("intra_edges", self.intra_edges)
            .push("inter_edges", self.inter_edges)
            .push("skipped_edges", self.skipped_edges)
            .push("total_edges", self.total_edges)
            .push("ratio", self.ratio.map(fmt_f64).unwrap_or_else(|| "undefined".into()))
            .push("ratio_undefined", self.undefined);
        r
    }
}

/// Intra- vs inter-stance edge mass. Only Support/Against endpoints count;
/// any other endpoint puts the edge in `skipped`. In weighted mode an edge
/// contributes its retweet count, otherwise 1.
pub fn stance_edge_ratio(
    graph: &RetweetGraph,
    stances: &BTreeMap<String, StanceCategory>,
    topic: &Topic,
    weighted: bool,
) -> AssortativityReport {
    let (mut intra, mut inter, mut skipped) = (0u64, 0u64, 0u64);
    for ((a, b), &w) in &graph.edges {
        let w = if weighted { w } else { 1 };
        let sa = stances.get(a).copied().filter(|s| s.is_opinionated());
        let sb = stances.get(b).copied().filter(|s| s.is_opinionated());
        match (sa, sb) {
            (Some(x), Some(y)) if x == y => intra += w,
            (Some(_), Some(_)) => inter += w,
            _ => skipped += w,
        }
    }
    let undefined = inter == 0;
    AssortativityReport {
        topic: topic.clone(),
        weighted,
        intra_edges: intra,
        inter_edges: inter,
        skipped_edges: skipped,
        total_edges: intra + inter + skipped,
        ratio: (!undefined).then(|| intra as f64 / inter as f64),
        undefined,
    }
}

/// Two equal stance blocks; each retweet picks a uniform retweeter and, with
/// probability `homophily`, a target from the same block, else from the
/// other. Expected intra/inter ratio is homophily / (1 - homophily).
pub fn planted_partition(
    n_users: usize,
    n_retweets: usize,
    homophily: f64,
    seed: u64,
) -> Result<(Vec<RetweetRecord>, BTreeMap<String, StanceCategory>)> {
    if n_users < 4 {
        return Err(Error::InvalidConfig("planted partition needs at least 4 users".into()));
    }
    if !(0.0..=1.0).contains(&homophily) {
        return Err(Error::InvalidConfig(format!("homophily {homophily} outside [0, 1]")));
    }
    let mut rng = seed::rng(seed);
    let half = n_users / 2;
    let id = |i: usize| format!("p{i:06}");
    let stances: BTreeMap<String, StanceCategory> = (0..n_users)
        .map(|i| {
            let s = if i < half {
                StanceCategory::Support
            } else {
                StanceCategory::Against
            };
            (id(i), s)
        })
        .collect();
    let block = |i: usize| if i < half { (0, half) } else { (half, n_users) };
    let mut records = Vec::with_capacity(n_retweets);
    while records.len() < n_retweets {
        let u = rng.random_range(0..n_users);
        let (lo, hi) = block(u);
        let same = rng.random_bool(homophily);
        let v = if same {
            rng.random_range(lo..hi)
        } else if lo == 0 {
            rng.random_range(half..n_users)
        } else {
            rng.random_range(0..half)
        };
        if u != v {
            records.push(RetweetRecord::new(id(u), id(v)));
        }
    }
    Ok((records, stances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recs(pairs: &[(&str, &str)]) -> Vec<RetweetRecord> {
        pairs.iter().map(|(a, b)| RetweetRecord::new(*a, *b)).collect()
    }

    #[test]
    fn collapse_rule() {
        let g = build_retweet_graph(&recs(&[("a", "b"), ("a", "b"), ("b", "a")]), None).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight("a", "b"), Some(3));
        assert_eq!(g.weight("b", "a"), Some(3));
    }

    #[test]
    fn self_loop_dropped() {
        let g = build_retweet_graph(&recs(&[("a", "a")]), None).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.self_loops_dropped, 1);
        assert!(build_retweet_graph(&[], None).is_err());
    }

    #[test]
    fn ten_record_fixture() {
        let records = recs(&[
            ("a", "b"),
            ("b", "a"),
            ("a", "c"),
            ("c", "d"),
            ("d", "c"),
            ("d", "d"),
            ("e", "a"),
            ("x", "a"),
            ("b", "c"),
            ("c", "b"),
        ]);
        let users: BTreeSet<String> = ["a", "b", "c", "d", "e", "f"].iter().map(|s| s.to_string()).collect();
        let g = build_retweet_graph(&records, Some(&users)).unwrap();
        // edges: ab(2) ac(1) cd(2) ae(1) bc(2); x skipped; dd dropped; f isolated
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.total_weight(), 8);
        assert_eq!(g.skipped_records, 1);
        assert_eq!(g.self_loops_dropped, 1);
        assert_eq!(g.node_count(), 6);
        let pruned = prune_isolated(g.clone());
        assert_eq!(pruned.node_count(), 5);
        assert_eq!(prune_isolated(pruned.clone()), pruned);
    }

    fn stances(pairs: &[(&str, StanceCategory)]) -> BTreeMap<String, StanceCategory> {
        pairs.iter().map(|(u, s)| (u.to_string(), *s)).collect()
    }

    #[test]
    fn ratio_counting_and_degenerate() {
        use StanceCategory::*;
        let g = build_retweet_graph(&recs(&[("a", "b"), ("a", "b"), ("b", "a"), ("a", "c"), ("c", "d")]), None).unwrap();
        let s = stances(&[("a", Support), ("b", Support), ("c", Against), ("d", Weak)]);
        let t = Topic::from("t");
        let r = stance_edge_ratio(&g, &s, &t, true);
        assert_eq!((r.intra_edges, r.inter_edges, r.skipped_edges), (3, 1, 1));
        assert_eq!(r.ratio, Some(3.0));
        let u = stance_edge_ratio(&g, &s, &t, false);
        assert_eq!((u.intra_edges, u.inter_edges, u.skipped_edges), (1, 1, 1));

        let same = stances(&[("a", Support), ("b", Support), ("c", Support), ("d", Support)]);
        let r = stance_edge_ratio(&g, &same, &t, true);
        assert!(r.undefined);
        assert_eq!(r.ratio, None);
        assert!(r.to_report().render().contains("ratio = undefined"));
    }

    #[test]
    fn export_formats() {
        let g = build_retweet_graph(&recs(&[("a", "b")]), None).unwrap();
        let s = stances(&[("a", StanceCategory::Support)]);
        assert_eq!(g.nodes_csv(&s), "Id,Label,stance\na,a,support\nb,b,none\n");
        assert_eq!(g.edges_csv(), "Source,Target,Type,Weight\na,b,Undirected,1\n");
    }

    #[test]
    fn planted_ratio_increases() {
        let t = Topic::from("t");
        let mut last = 0.0;
        for h in [0.5, 0.7, 0.9] {
            let (records, s) = planted_partition(400, 20_000, h, 7).unwrap();
            let g = build_retweet_graph(&records, None).unwrap();
            let r = stance_edge_ratio(&g, &s, &t, true).ratio.unwrap();
            assert!(r > last, "h={h} ratio={r}");
            last = r;
        }
    }

    fn arb_graph() -> impl Strategy<Value = (Vec<RetweetRecord>, BTreeMap<String, StanceCategory>, u64)> {
        let cat = prop_oneof![
            Just(StanceCategory::Support),
            Just(StanceCategory::Against),
            Just(StanceCategory::Weak)
        ];
        (
            prop::collection::vec((0u8..12, 0u8..12), 1..60),
            prop::collection::vec(prop::option::of(cat), 12),
            1u64..5,
        )
            .prop_map(|(pairs, cats, k)| {
                let records = pairs
                    .into_iter()
                    .map(|(a, b)| RetweetRecord::new(format!("u{a}"), format!("u{b}")))
                    .collect();
                let stances = cats
                    .into_iter()
                    .enumerate()
                    .filter_map(|(i, c)| c.map(|c| (format!("u{i}"), c)))
                    .collect();
                (records, stances, k)
            })
    }

    fn swap(s: &BTreeMap<String, StanceCategory>) -> BTreeMap<String, StanceCategory> {
        s.iter()
            .map(|(u, c)| {
                let c = match c {
                    StanceCategory::Support => StanceCategory::Against,
                    StanceCategory::Against => StanceCategory::Support,
                    StanceCategory::Weak => StanceCategory::Weak,
                };
                (u.clone(), c)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn invariants((records, s, k) in arb_graph()) {
            let g = build_retweet_graph(&records, None).unwrap();
            let t = Topic::from("t");
            let r = stance_edge_ratio(&g, &s, &t, true);
            prop_assert_eq!(r.intra_edges + r.inter_edges + r.skipped_edges, g.total_weight());
            prop_assert_eq!(r.undefined, r.ratio.is_none());

            let sw = stance_edge_ratio(&g, &swap(&s), &t, true);
            prop_assert_eq!((sw.intra_edges, sw.inter_edges, sw.skipped_edges), (r.intra_edges, r.inter_edges, r.skipped_edges));

            let mut scaled = RetweetGraph::default();
            for ((a, b), w) in g.edges() {
                scaled.add_edge(a, b, w * k);
            }
            let rs = stance_edge_ratio(&scaled, &s, &t, true);
            match (r.ratio, rs.ratio) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false),
            }

            let pruned = prune_isolated(g.clone());
            for n in pruned.nodes() {
                prop_assert!(pruned.degree(n) >= 1);
            }
            prop_assert_eq!(pruned.edges(), g.edges());
        }
    }
}
