//! Connected-behavior statistics over joined user profiles.

use std::collections::BTreeMap;
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::profile::{JoinedUser, StanceCategory};
use crate::report::{fmt_f64, KvReport};
use crate::stance::Topic;

/// Fractional ranks (1-based); tied values share the mean of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::ConstantInput("spearman_rho needs non-constant inputs".into()))
}

/// Two-tailed p-value of rho under the Student-t approximation with n - 2
/// degrees of freedom; |rho| = 1 gives 0.
pub fn spearman_pvalue(rho: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidConfig(format!("rho {rho} outside [-1, 1]")));
    }
    if rho.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho.abs() * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok((2.0 * dist.sf(t)).clamp(0.0, 1.0))
}

/// Exact two-tailed permutation p-value: the share of all orderings of `y`
/// whose |rho| reaches the observed one. Limited to n <= 10.
pub fn spearman_exact_pvalue(x: &[f64], y: &[f64]) -> Result<f64> {
    let observed = spearman_rho(x, y)?.abs();
    let n = x.len();
    if n > 10 {
        return Err(Error::InvalidConfig(format!("exact permutation test limited to n <= 10, got {n}")));
    }
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut visit = |perm: &[f64]| {
        total += 1;
        if pearson(&rx, perm).is_some_and(|r| r.abs() >= observed - 1e-12) {
            hits += 1;
        }
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    visit(&ry);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                ry.swap(0, i);
            } else {
                ry.swap(c[i], i);
            }
            visit(&ry);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub topic_a: Topic,
    pub topic_b: Topic,
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Spearman correlation of support shares for every unordered topic pair.
pub fn pairwise_correlations(joined: &[JoinedUser], topics: &[Topic]) -> Result<Vec<CorrelationResult>> {
    if joined.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: joined.len(),
        });
    }
    let column = |i: usize| -> Vec<f64> { joined.iter().map(|u| u.stances[i].support_pct).collect() };
    let mut out = Vec::new();
    for i in 0..topics.len() {
        for j in i + 1..topics.len() {
            let rho = spearman_rho(&column(i), &column(j))?;
            out.push(CorrelationResult {
                topic_a: topics[i].clone(),
                topic_b: topics[j].clone(),
                rho,
                p_value: spearman_pvalue(rho, joined.len())?,
                n: joined.len(),
            });
        }
    }
    Ok(out)
}

pub fn write_correlations_csv(path: &Path, results: &[CorrelationResult]) -> Result<()> {
    let mut text = String::from("topic_a,topic_b,rho,p_value,n\n");
    for r in results {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.topic_a,
            r.topic_b,
            fmt_f64(r.rho),
            format_p(r.p_value),
            r.n
        ));
    }
    crate::report::write_text(path, &text)
}

fn format_p(p: f64) -> String {
    format!("{p:.6e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalCell {
    pub n_users: usize,
    pub n_target_support: usize,
    /// `None` when the cell is empty.
    pub probability: Option<f64>,
}

/// P(target = Support | categories on two conditioning topics).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub target: Topic,
    pub conditioners: (Topic, Topic),
    pub cells: BTreeMap<(StanceCategory, StanceCategory), ConditionalCell>,
}

impl ConditionalTable {
    pub fn probability(&self, first: StanceCategory, second: StanceCategory) -> Option<f64> {
        self.cells.get(&(first, second)).and_then(|c| c.probability)
    }

    pub fn to_report(&self) -> KvReport {
        let mut r = KvReport::new("conditional_table");
        r.push("target", &self.target)
            .push("conditioner_a", &self.conditioners.0)
            .push("conditioner_b", &self.conditioners.1);
        let mut block = format!(
            "{}\t{}\tn_users\tn_target_support\tp_target_support\n",
            self.conditioners.0, self.conditioners.1
        );
        for ((a, b), cell) in &self.cells {
            let p = cell.probability.map(fmt_f64).unwrap_or_else(|| "undefined".into());
            r.push(format!("p.{a}.{b}"), &p);
            r.push(format!("n.{a}.{b}"), cell.n_users);
            block.push_str(&format!("{a}\t{b}\t{}\t{}\t{p}\n", cell.n_users, cell.n_target_support));
        }
        r.block("cells", block);
        r
    }
}

pub fn conditional_probability_table(
    joined: &[JoinedUser],
    topics: &[Topic],
    target: &Topic,
    conditioners: (&Topic, &Topic),
) -> Result<ConditionalTable> {
    if joined.is_empty() {
        return Err(Error::EmptyInput("conditional table over an empty join".into()));
    }
    let idx = |t: &Topic| {
        topics
            .iter()
            .position(|x| x == t)
            .ok_or_else(|| Error::InvalidConfig(format!("topic {t} not in the join")))
    };
    let (ti, ai, bi) = (idx(target)?, idx(conditioners.0)?, idx(conditioners.1)?);
    let opinionated = [StanceCategory::Support, StanceCategory::Against];
    let mut cells: BTreeMap<(StanceCategory, StanceCategory), ConditionalCell> = BTreeMap::new();
    for a in opinionated {
        for b in opinionated {
            cells.insert(
                (a, b),
                ConditionalCell {
                    n_users: 0,
                    n_target_support: 0,
                    probability: None,
                },
            );
        }
    }
    for u in joined {
        let key = (u.stances[ai].category, u.stances[bi].category);
        let cell = cells
            .get_mut(&key)
            .ok_or_else(|| Error::InvalidConfig(format!("user {} has a weak conditioning stance", u.user_id)))?;
        cell.n_users += 1;
        if u.stances[ti].category == StanceCategory::Support {
            cell.n_target_support += 1;
        }
    }
    for cell in cells.values_mut() {
        if cell.n_users > 0 {
            cell.probability = Some(cell.n_target_support as f64 / cell.n_users as f64);
        }
    }
    Ok(ConditionalTable {
        target: target.clone(),
        conditioners: (conditioners.0.clone(), conditioners.1.clone()),
        cells,
    })
}

/// Scatter points of two topics' support shares with quadrant counts.
/// A share of exactly 0.5 counts on the high (Support-leaning) side.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantExport {
    pub topic_a: Topic,
    pub topic_b: Topic,
    pub points: Vec<(String, f64, f64)>,
    /// `[high_a as usize][high_b as usize]`.
    pub counts: [[usize; 2]; 2],
}

impl QuadrantExport {
    pub fn to_csv(&self) -> String {
        let mut text = format!("user_id,{}_support_pct,{}_support_pct\n", self.topic_a, self.topic_b);
        for (u, a, b) in &self.points {
            text.push_str(&format!("{u},{},{}\n", fmt_f64(*a), fmt_f64(*b)));
        }
        text
    }

    pub fn counts_report(&self) -> KvReport {
        let mut r = KvReport::new("quadrants");
        r.push("topic_a", &self.topic_a).push("topic_b", &self.topic_b);
        for (ha, la) in [(1, "high"), (0, "low")] {
            for (hb, lb) in [(1, "high"), (0, "low")] {
                r.push(format!("{la}_a.{lb}_b"), self.counts[ha][hb]);
            }
        }
        r
    }
}

pub fn quadrant_of(a: f64, b: f64) -> (bool, bool) {
    (a >= 0.5, b >= 0.5)
}

pub fn quadrant_export(joined: &[JoinedUser], topics: &[Topic], pair: (&Topic, &Topic)) -> Result<QuadrantExport> {
    let idx = |t: &Topic| {
        topics
            .iter()
            .position(|x| x == t)
            .ok_or_else(|| Error::InvalidConfig(format!("topic {t} not in the join")))
    };
    let (ai, bi) = (idx(pair.0)?, idx(pair.1)?);
    let mut counts = [[0usize; 2]; 2];
    let mut points = Vec::with_capacity(joined.len());
    for u in joined {
        let (a, b) = (u.stances[ai].support_pct, u.stances[bi].support_pct);
        let (ha, hb) = quadrant_of(a, b);
        counts[ha as usize][hb as usize] += 1;
        points.push((u.user_id.clone(), a, b));
    }
    Ok(QuadrantExport {
        topic_a: pair.0.clone(),
        topic_b: pair.1.clone(),
        points,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{StanceCounts, UserTopicStance};
    use proptest::prelude::*;

    #[test]
    fn perfect_monotone_relations() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn rho_errors() {
        assert!(matches!(spearman_rho(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ConstantInput(_))));
        assert!(matches!(spearman_rho(&[1.0], &[2.0]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn pvalue_conventions() {
        assert_eq!(spearman_pvalue(1.0, 10).unwrap(), 0.0);
        assert_eq!(spearman_pvalue(-1.0, 10).unwrap(), 0.0);
        for n in [3, 10, 500] {
            assert!((spearman_pvalue(0.0, n).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(spearman_pvalue(0.5, 2).is_err());
    }

    #[test]
    fn exact_pvalue_small_case() {
        // n = 4, perfectly monotone: only the identity and its reverse reach |rho| = 1.
        let p = spearman_exact_pvalue(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((p - 2.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn t_approximation_tracks_exact_test() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0];
        let rho = spearman_rho(&x, &y).unwrap();
        let exact = spearman_exact_pvalue(&x, &y).unwrap();
        let approx = spearman_pvalue(rho, x.len()).unwrap();
        assert!(exact < 0.05 && approx < 0.05);
        assert!((exact - approx).abs() < 0.02);
    }

    fn user(id: &str, pcts: &[f64]) -> JoinedUser {
        JoinedUser {
            user_id: id.into(),
            stances: pcts
                .iter()
                .map(|&p| UserTopicStance {
                    counts: StanceCounts::default(),
                    support_pct: p,
                    category: crate::profile::categorize_pct(p, &Default::default()),
                })
                .collect(),
        }
    }

    fn topics() -> Vec<Topic> {
        ["t", "m", "r"].iter().map(|s| Topic::from(*s)).collect()
    }

    #[test]
    fn identical_topics_correlate_perfectly() {
        let joined: Vec<_> = (0..10).map(|i| user(&format!("u{i}"), &[i as f64 / 10.0, i as f64 / 10.0, 0.9])).collect();
        let topics = topics();
        let res = pairwise_correlations(&joined[..], &topics[..2]).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].rho, 1.0);
        assert_eq!(res[0].p_value, 0.0);
        assert!(pairwise_correlations(&joined[..2], &topics).is_err());
    }

    #[test]
    fn conditional_table_degenerate() {
        let joined: Vec<_> = (0..5).map(|i| user(&format!("u{i}"), &[1.0, 1.0, 1.0])).collect();
        let t = topics();
        let table = conditional_probability_table(&joined, &t, &t[0], (&t[1], &t[2])).unwrap();
        use StanceCategory::*;
        assert_eq!(table.probability(Support, Support), Some(1.0));
        assert_eq!(table.probability(Against, Against), None);
        assert_eq!(table.cells[&(Against, Support)].n_users, 0);
        assert!(table.to_report().render().contains("p.against.against = undefined"));
        assert!(conditional_probability_table(&[], &t, &t[0], (&t[1], &t[2])).is_err());
    }

    #[test]
    fn quadrants_and_boundary() {
        let joined = vec![user("a", &[0.9, 0.1, 0.0]), user("b", &[0.5, 0.5, 0.0])];
        let t = topics();
        let q = quadrant_export(&joined, &t, (&t[0], &t[1])).unwrap();
        assert_eq!(q.counts[1][0], 1);
        assert_eq!(q.counts[1][1], 1);
        assert_eq!(quadrant_of(0.9, 0.1), (true, false));
        assert_eq!(quadrant_of(0.5, 0.5), (true, true));
        assert!(q.to_csv().starts_with("user_id,t_support_pct,m_support_pct\n"));
    }

    fn pct() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), Just(1.0), (0u32..=20).prop_map(|k| k as f64 / 20.0)]
    }

    proptest! {
        #[test]
        fn rho_invariant_under_monotone_transform(
            pairs in prop::collection::vec((-50i32..50, -50i32..50), 3..40),
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            if let Ok(r) = spearman_rho(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp() + 3.0 * v).collect();
                prop_assert!((spearman_rho(&tx, &y).unwrap() - r).abs() < 1e-12);
                prop_assert!((spearman_rho(&x, &x).unwrap() - 1.0).abs() < 1e-12);
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                prop_assert!((spearman_rho(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn pvalue_monotone(r1 in 0.0f64..0.99, r2 in 0.0f64..0.99, n in 5usize..200) {
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(spearman_pvalue(hi, n).unwrap() <= spearman_pvalue(lo, n).unwrap() + 1e-15);
            prop_assert!(spearman_pvalue(hi, n + 10).unwrap() <= spearman_pvalue(hi, n).unwrap() + 1e-15);
        }

        #[test]
        fn conditional_cells_average_to_marginal(
            rows in prop::collection::vec((pct(), pct(), pct()), 1..60),
        ) {
            let joined: Vec<JoinedUser> = rows
                .iter()
                .enumerate()
                .map(|(i, (a, b, c))| user(&format!("u{i}"), &[*a, *b, *c]))
                .filter(|u| u.stances.iter().all(|s| s.category.is_opinionated()))
                .collect();
            prop_assume!(!joined.is_empty());
            let t = topics();
            let table = conditional_probability_table(&joined, &t, &t[0], (&t[1], &t[2])).unwrap();
            let mut support = 0usize;
            let mut total = 0usize;
            for cell in table.cells.values() {
                if let Some(p) = cell.probability {
                    prop_assert!((0.0..=1.0).contains(&p));
                }
                support += cell.n_target_support;
                total += cell.n_users;
            }
            let marginal = joined.iter().filter(|u| u.stances[0].category == StanceCategory::Support).count();
            prop_assert_eq!(total, joined.len());
            prop_assert_eq!(support, marginal);
        }

        #[test]
        fn quadrant_counts_sum(rows in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 0..50)) {
            let joined: Vec<_> = rows.iter().enumerate().map(|(i, (a, b))| user(&format!("u{i}"), &[*a, *b, 0.0])).collect();
            let t = topics();
            let q = quadrant_export(&joined, &t, (&t[0], &t[1])).unwrap();
            prop_assert_eq!(q.counts.iter().flatten().sum::<usize>(), joined.len());
        }
    }
}
