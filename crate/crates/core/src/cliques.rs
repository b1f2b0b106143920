//! Exact edge-clique-number computation via maximum-clique search on
//! common-neighborhood subgraphs.
//!
//! Two search modes back the public operations:
//! * an exact branch-and-bound maximizer (greedy-coloring upper bound,
//!   degeneracy-order branching, hard node budget) for statistics, and
//! * a decision search that short-circuits on the first witness clique of the
//!   requested size, which is what filtering needs.
//!
//! Both are deterministic: all orderings break ties by lowest vertex id, so
//! identical inputs yield identical cliques across runs and thread counts.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgraph::{bits_to_vec, BitGraph};
use crate::error::{Error, Result};
use crate::graphgen::{EdgeLabel, PerturbedGraph};

/// Default cap on branch-and-bound search nodes per edge.
pub const DEFAULT_CLIQUE_BUDGET: u64 = 10_000_000;

/// A maximum clique of `g`, as a sorted vertex list. Empty graph -> empty
/// clique; otherwise at least one vertex. Errs (never approximates) when the
/// search would exceed `budget` nodes.
pub fn max_clique(g: &BitGraph, budget: u64) -> Result<Vec<u32>> {
    let n = g.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let words = g.words();
    let order = degeneracy_order(g);
    let mut later = vec![!0u64; words];
    // mask off bits beyond n
    let tail = n % 64;
    if tail != 0 {
        later[words - 1] = (1u64 << tail) - 1;
    }
    let mut search = MaxSearch {
        g,
        words,
        best: greedy_clique(g, &later),
        stack: Vec::new(),
        nodes: 0,
        budget,
    };
    for &v in &order {
        clear_bit(&mut later, v);
        let mut p = vec![0u64; words];
        and_into(&mut p, g.row(v), &later);
        if 1 + popcount(&p) <= search.best.len() {
            continue;
        }
        search.stack.push(v);
        search.expand(p)?;
        search.stack.pop();
    }
    let mut best = search.best;
    best.sort_unstable();
    Ok(best)
}

/// Deterministic greedy clique: repeatedly take the candidate with the most
/// remaining candidate neighbors (ties by lowest id). Seeds the search with
/// a strong lower bound, which prunes most of the tree on the dense
/// neighborhoods geometric graphs produce.
fn greedy_clique(g: &BitGraph, all: &[u64]) -> Vec<u32> {
    let words = g.words();
    let mut p = all.to_vec();
    let mut clique = Vec::new();
    while popcount(&p) > 0 {
        let mut best_v = u32::MAX;
        let mut best_deg = 0usize;
        for (w, &word) in p.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let v = (w as u32) * 64 + bits.trailing_zeros();
                bits &= bits - 1;
                let row = g.row(v);
                let mut d = 0usize;
                for x in 0..words {
                    d += (row[x] & p[x]).count_ones() as usize;
                }
                if best_v == u32::MAX || d > best_deg {
                    best_v = v;
                    best_deg = d;
                }
            }
        }
        clique.push(best_v);
        let row = g.row(best_v);
        for x in 0..words {
            p[x] &= row[x];
        }
    }
    clique
}

/// True iff `g` contains a clique of at least `k` vertices. Short-circuits on
/// the first witness.
pub fn clique_at_least(g: &BitGraph, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    let n = g.len();
    if k == 1 {
        return n >= 1;
    }
    if k > n {
        return false;
    }
    let words = g.words();
    let mut all = vec![!0u64; words];
    let tail = n % 64;
    if tail != 0 {
        all[words - 1] = (1u64 << tail) - 1;
    }
    find_clique(g, all, k)
}

/// omega_{u,v}: 2 + maximum clique of the subgraph induced by the common
/// neighborhood of u and v. Rejects non-edges; propagates budget errors.
pub fn edge_clique_number(g: &BitGraph, u: u32, v: u32, budget: u64) -> Result<u32> {
    if !g.has_edge(u, v) {
        return Err(Error::NonEdge { u, v });
    }
    let cn = g.common_neighbors(u, v);
    let induced = g.induced(&cn);
    let clique = max_clique(&induced, budget)?;
    Ok(2 + clique.len() as u32)
}

/// Decision variant of the edge clique number: `omega_{u,v} >= tau`?
/// Searches the common neighborhood for a clique of size tau-2 directly in
/// the ambient graph and stops at the first witness.
pub fn edge_clique_at_least(g: &BitGraph, u: u32, v: u32, tau: u32) -> Result<bool> {
    if tau < 2 {
        return Err(Error::InvalidParameter(format!(
            "tau must be >= 2, got {tau}"
        )));
    }
    if !g.has_edge(u, v) {
        return Err(Error::NonEdge { u, v });
    }
    if tau == 2 {
        return Ok(true); // the edge itself
    }
    let words = g.words();
    let mut p = vec![0u64; words];
    and_into(&mut p, g.row(u), g.row(v));
    Ok(find_clique(g, p, (tau - 2) as usize))
}

/// Exhaustive decision search: does the candidate set `p` contain a clique of
/// `need` vertices? Branches on the lowest-id candidate first; pruning is by
/// candidate count only, which is cheap and effective at the sizes the
/// filter sees.
fn find_clique(g: &BitGraph, mut p: Vec<u64>, need: usize) -> bool {
    if need == 0 {
        return true;
    }
    loop {
        if popcount(&p) < need {
            return false;
        }
        let v = first_bit(&p);
        let mut p_new = vec![0u64; p.len()];
        and_into(&mut p_new, &p, g.row(v));
        if find_clique(g, p_new, need - 1) {
            return true;
        }
        clear_bit(&mut p, v);
    }
}

struct MaxSearch<'a> {
    g: &'a BitGraph,
    words: usize,
    best: Vec<u32>,
    stack: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl MaxSearch<'_> {
    fn expand(&mut self, p: Vec<u64>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                nodes: self.nodes,
                edge: None,
            });
        }
        let verts = bits_to_vec(&p);
        if verts.is_empty() {
            if self.stack.len() > self.best.len() {
                self.best = self.stack.clone();
            }
            return Ok(());
        }
        let (order, colors) = greedy_coloring(self.g, &verts, &p, self.words);
        let mut live = p;
        for i in (0..order.len()).rev() {
            let v = order[i];
            if self.stack.len() + colors[i] as usize <= self.best.len() {
                return Ok(());
            }
            let mut p_new = vec![0u64; self.words];
            and_into(&mut p_new, &live, self.g.row(v));
            self.stack.push(v);
            self.expand(p_new)?;
            self.stack.pop();
            clear_bit(&mut live, v);
        }
        Ok(())
    }
}

/// Greedy coloring of the candidate set, largest-degree-first (degree within
/// the candidate set, ties by lowest id). Returns the vertices sorted by
/// color ascending together with their 1-based colors; the color of a vertex
/// upper-bounds the clique extendable from it among earlier candidates.
fn greedy_coloring(
    g: &BitGraph,
    verts: &[u32],
    p: &[u64],
    words: usize,
) -> (Vec<u32>, Vec<u32>) {
    let mut by_degree: Vec<(u32, u32)> = verts
        .iter()
        .map(|&v| {
            let mut d = 0u32;
            let row = g.row(v);
            for w in 0..words {
                d += (row[w] & p[w]).count_ones();
            }
            (v, d)
        })
        .collect();
    by_degree.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut class_bits: Vec<Vec<u64>> = Vec::new();
    let mut class_members: Vec<Vec<u32>> = Vec::new();
    for &(v, _) in &by_degree {
        let row = g.row(v);
        let mut placed = false;
        for (ci, class) in class_bits.iter_mut().enumerate() {
            if (0..words).all(|w| class[w] & row[w] == 0) {
                set_bit(class, v);
                class_members[ci].push(v);
                placed = true;
                break;
            }
        }
        if !placed {
            let mut class = vec![0u64; words];
            set_bit(&mut class, v);
            class_bits.push(class);
            class_members.push(vec![v]);
        }
    }
    let mut order = Vec::with_capacity(verts.len());
    let mut colors = Vec::with_capacity(verts.len());
    for (ci, members) in class_members.iter().enumerate() {
        for &v in members {
            order.push(v);
            colors.push(ci as u32 + 1);
        }
    }
    (order, colors)
}

/// Degeneracy order: repeatedly remove a minimum-degree vertex, ties broken
/// by lowest id.
fn degeneracy_order(g: &BitGraph) -> Vec<u32> {
    let n = g.len();
    let mut deg: Vec<i64> = (0..n as u32).map(|u| g.degree(u) as i64).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut min_deg = i64::MAX;
        for (i, &a) in alive.iter().enumerate() {
            if a && deg[i] < min_deg {
                min_deg = deg[i];
                u = i;
            }
        }
        alive[u] = false;
        order.push(u as u32);
        for w in g.neighbors(u as u32) {
            if alive[w as usize] {
                deg[w as usize] -= 1;
            }
        }
    }
    order
}

#[inline]
fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for i in 0..dst.len() {
        dst[i] = a[i] & b[i];
    }
}

#[inline]
fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
fn first_bit(bits: &[u64]) -> u32 {
    for (w, &word) in bits.iter().enumerate() {
        if word != 0 {
            return (w as u32) * 64 + word.trailing_zeros();
        }
    }
    unreachable!("first_bit on empty set")
}

#[inline]
fn set_bit(bits: &mut [u64], v: u32) {
    bits[v as usize / 64] |= 1 << (v % 64);
}

#[inline]
fn clear_bit(bits: &mut [u64], v: u32) {
    bits[v as usize / 64] &= !(1 << (v % 64));
}

/// Per-class summary of edge clique numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ClassStats {
    pub min: Option<u32>,
    pub max: Option<u32>,
    pub mean: Option<f64>,
    pub count: usize,
}

impl ClassStats {
    fn from_values(values: impl Iterator<Item = u32>) -> ClassStats {
        let mut min = None;
        let mut max = None;
        let mut sum = 0u64;
        let mut count = 0usize;
        for v in values {
            min = Some(min.map_or(v, |m: u32| m.min(v)));
            max = Some(max.map_or(v, |m: u32| m.max(v)));
            sum += v as u64;
            count += 1;
        }
        ClassStats {
            min,
            max,
            mean: if count > 0 {
                Some(sum as f64 / count as f64)
            } else {
                None
            },
            count,
        }
    }
}

/// Edge clique number of every observed edge plus per-class aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueStats {
    /// `(u, v, label, omega)` in canonical (u, v) order.
    pub per_edge: Vec<(u32, u32, EdgeLabel, u32)>,
    pub good: ClassStats,
    pub bad: ClassStats,
    pub indeterminate: ClassStats,
}

impl CliqueStats {
    pub fn class(&self, label: EdgeLabel) -> &ClassStats {
        match label {
            EdgeLabel::Good => &self.good,
            EdgeLabel::Bad => &self.bad,
            EdgeLabel::Indeterminate => &self.indeterminate,
        }
    }
}

/// Exact omega for every edge of the observed graph, fanned out over edges;
/// results are merged in canonical edge order so output is
/// schedule-independent. A budget error identifies the first offending edge
/// in canonical order.
pub fn all_edge_clique_numbers(
    pg: &PerturbedGraph,
    labels: &[EdgeLabel],
    budget: u64,
) -> Result<CliqueStats> {
    debug_assert_eq!(labels.len(), pg.edges.len());
    let adj = pg.adjacency();
    let omegas: Vec<Result<u32>> = pg
        .edges
        .par_iter()
        .map(|&(u, v, _)| edge_clique_number(adj, u, v, budget))
        .collect();
    let mut per_edge = Vec::with_capacity(omegas.len());
    for ((&(u, v, _), label), omega) in pg.edges.iter().zip(labels).zip(omegas) {
        let omega = omega.map_err(|e| match e {
            Error::BudgetExceeded { nodes, .. } => Error::BudgetExceeded {
                nodes,
                edge: Some((u, v)),
            },
            other => other,
        })?;
        per_edge.push((u, v, *label, omega));
    }
    Ok(stats_from_per_edge(per_edge))
}

pub fn stats_from_per_edge(per_edge: Vec<(u32, u32, EdgeLabel, u32)>) -> CliqueStats {
    let pick = |want: EdgeLabel| {
        ClassStats::from_values(
            per_edge
                .iter()
                .filter(move |&&(_, _, l, _)| l == want)
                .map(|&(_, _, _, w)| w),
        )
    };
    CliqueStats {
        good: pick(EdgeLabel::Good),
        bad: pick(EdgeLabel::Bad),
        indeterminate: pick(EdgeLabel::Indeterminate),
        per_edge,
    }
}

/// CSV `u,v,label,omega` sorted by (u, v).
pub fn write_clique_stats_csv<W: Write>(stats: &CliqueStats, mut w: W) -> Result<()> {
    writeln!(w, "u,v,label,omega")?;
    for &(u, v, label, omega) in &stats.per_edge {
        writeln!(w, "{u},{v},{label},{omega}")?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct StatsSummary {
    good: ClassStats,
    bad: ClassStats,
    indeterminate: ClassStats,
}

pub fn clique_stats_summary_json(stats: &CliqueStats) -> String {
    let summary = StatsSummary {
        good: stats.good,
        bad: stats.bad,
        indeterminate: stats.indeterminate,
    };
    serde_json::to_string_pretty(&summary).expect("stats summary serializes")
}

pub fn write_clique_stats_files(stats: &CliqueStats, csv: &Path, json: &Path) -> Result<()> {
    let f = std::fs::File::create(csv)?;
    write_clique_stats_csv(stats, std::io::BufWriter::new(f))?;
    std::fs::write(json, clique_stats_summary_json(stats))?;
    Ok(())
}

pub fn read_clique_stats_csv<R: std::io::Read>(r: R) -> Result<Vec<(u32, u32, EdgeLabel, u32)>> {
    use std::io::BufRead;
    let reader = std::io::BufReader::new(r);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("stats row {i}: expected 4 fields")));
        }
        let u = fields[0]
            .parse()
            .map_err(|e| Error::Parse(format!("row {i} u: {e}")))?;
        let v = fields[1]
            .parse()
            .map_err(|e| Error::Parse(format!("row {i} v: {e}")))?;
        let label: EdgeLabel = fields[2].parse()?;
        let omega = fields[3]
            .parse()
            .map_err(|e| Error::Parse(format!("row {i} omega: {e}")))?;
        out.push((u, v, label, omega));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::sample_gnp;
    use crate::oracle;

    fn complete(n: usize) -> BitGraph {
        let mut g = BitGraph::new(n);
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                g.add_edge(u, v);
            }
        }
        g
    }

    #[test]
    fn max_clique_trivia() {
        assert_eq!(max_clique(&BitGraph::new(0), 1000).unwrap(), Vec::<u32>::new());
        // empty graph on 5 vertices: a single vertex
        assert_eq!(max_clique(&BitGraph::new(5), 1000).unwrap().len(), 1);
        assert_eq!(
            max_clique(&complete(6), 100_000).unwrap(),
            vec![0, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn max_clique_petersen() {
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 0),
            (5, 7),
            (7, 9),
            (9, 6),
            (6, 8),
            (8, 5),
            (0, 5),
            (1, 6),
            (2, 7),
            (3, 8),
            (4, 9),
        ];
        let g = BitGraph::from_edges(10, &edges);
        assert_eq!(max_clique(&g, 100_000).unwrap().len(), 2);
    }

    #[test]
    fn edge_clique_number_trivia() {
        let c4 = BitGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        for &(u, v) in &c4.edges() {
            assert_eq!(edge_clique_number(&c4, u, v, 1000).unwrap(), 2);
        }
        let k5 = complete(5);
        assert_eq!(edge_clique_number(&k5, 1, 3, 100_000).unwrap(), 5);
        assert!(matches!(
            edge_clique_number(&c4, 0, 2, 1000),
            Err(Error::NonEdge { .. })
        ));
    }

    #[test]
    fn matches_oracle_on_random_graphs() {
        for seed in 0..40u64 {
            let n = 6 + (seed % 9) as usize; // 6..14
            let density = 0.3 + 0.4 * (seed as f64 / 40.0);
            let g = sample_gnp(n, density, 900 + seed);
            for &(u, v) in &g.edges() {
                let fast = edge_clique_number(&g, u, v, 1_000_000).unwrap();
                let slow = oracle::edge_clique_number(&g, u, v) as u32;
                assert_eq!(fast, slow, "seed {seed} edge ({u},{v})");
            }
            let fast_max = max_clique(&g, 1_000_000).unwrap().len();
            assert_eq!(fast_max, oracle::max_clique_size(&g), "seed {seed}");
        }
    }

    #[test]
    fn returned_clique_is_a_clique_and_deterministic() {
        for seed in 0..10u64 {
            let g = sample_gnp(30, 0.4, 50 + seed);
            let a = max_clique(&g, 10_000_000).unwrap();
            let b = max_clique(&g, 10_000_000).unwrap();
            assert_eq!(a, b);
            for i in 0..a.len() {
                for j in (i + 1)..a.len() {
                    assert!(g.has_edge(a[i], a[j]));
                }
            }
        }
    }

    #[test]
    fn decision_agrees_with_exact_value() {
        for seed in 0..25u64 {
            let n = 6 + (seed % 9) as usize;
            let g = sample_gnp(n, 0.5, 400 + seed);
            for &(u, v) in &g.edges() {
                let omega = edge_clique_number(&g, u, v, 1_000_000).unwrap();
                for tau in 2..=(n as u32) {
                    assert_eq!(
                        edge_clique_at_least(&g, u, v, tau).unwrap(),
                        omega >= tau,
                        "seed {seed} edge ({u},{v}) tau {tau}"
                    );
                }
            }
        }
    }

    #[test]
    fn decision_rejects_bad_input() {
        let k5 = complete(5);
        assert!(edge_clique_at_least(&k5, 0, 1, 1).is_err());
        let c4 = BitGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert!(edge_clique_at_least(&c4, 0, 2, 3).is_err());
        // tau = 2 always true on an edge; tau = 3 iff a common neighbor
        assert!(edge_clique_at_least(&c4, 0, 1, 2).unwrap());
        assert!(!edge_clique_at_least(&c4, 0, 1, 3).unwrap());
        let tri = BitGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(edge_clique_at_least(&tri, 0, 1, 3).unwrap());
    }

    #[test]
    fn whole_graph_decision() {
        let g = sample_gnp(60, 0.5, 7);
        let exact = max_clique(&g, 10_000_000).unwrap().len();
        assert!(clique_at_least(&g, exact));
        assert!(!clique_at_least(&g, exact + 1));
        assert!(clique_at_least(&g, 0));
    }

    #[test]
    fn budget_errors_are_loud() {
        let g = sample_gnp(80, 0.6, 3);
        match max_clique(&g, 5) {
            Err(Error::BudgetExceeded { nodes, .. }) => assert!(nodes > 5),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn omega_monotone_under_edge_insertion() {
        for seed in 0..10u64 {
            let mut g = sample_gnp(12, 0.4, 600 + seed);
            let before: Vec<((u32, u32), u32)> = g
                .edges()
                .iter()
                .map(|&(u, v)| ((u, v), edge_clique_number(&g, u, v, 1_000_000).unwrap()))
                .collect();
            // insert the first absent pair
            let mut added = None;
            'outer: for u in 0..12u32 {
                for v in (u + 1)..12 {
                    if !g.has_edge(u, v) {
                        g.add_edge(u, v);
                        added = Some((u, v));
                        break 'outer;
                    }
                }
            }
            if added.is_none() {
                continue;
            }
            for ((u, v), w) in before {
                let after = edge_clique_number(&g, u, v, 1_000_000).unwrap();
                assert!(after >= w, "seed {seed}: omega dropped after insertion");
            }
        }
    }

    #[test]
    fn stats_on_a_triangle() {
        use crate::space::{make_space, SpaceKind};
        let space = make_space(SpaceKind::UnitCube, 1).unwrap();
        let cloud = crate::space::PointCloud {
            space,
            points: vec![vec![0.0], vec![0.05], vec![0.1]],
            seed: 0,
        };
        let g = crate::graphgen::build_rgg(cloud, 0.2).unwrap();
        let pg = crate::graphgen::perturb(g, 0.0, 0.0, 1).unwrap();
        let labels = crate::graphgen::classify_edges(&pg);
        let stats = all_edge_clique_numbers(&pg, &labels, 1000).unwrap();
        assert_eq!(stats.per_edge.len(), 3);
        assert!(stats.per_edge.iter().all(|&(_, _, _, w)| w == 3));
        assert_eq!(stats.good.min, Some(3));
        assert_eq!(stats.good.count, 3);
        assert_eq!(stats.bad.count, 0);
        assert_eq!(stats.bad.min, None);
    }

    #[test]
    fn stats_csv_round_trip() {
        let g = sample_gnp(10, 0.5, 77);
        let edges = g.edges();
        let per_edge: Vec<_> = edges
            .iter()
            .map(|&(u, v)| {
                (
                    u,
                    v,
                    EdgeLabel::Good,
                    edge_clique_number(&g, u, v, 1_000_000).unwrap(),
                )
            })
            .collect();
        let stats = stats_from_per_edge(per_edge.clone());
        let mut buf = Vec::new();
        write_clique_stats_csv(&stats, &mut buf).unwrap();
        let back = read_clique_stats_csv(&buf[..]).unwrap();
        assert_eq!(back, per_edge);
        let json = clique_stats_summary_json(&stats);
        assert!(json.contains("\"good\""));
    }
}
