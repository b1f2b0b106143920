//! Edge filtering strategies. Each filter is a trait object registered by
//! name and selected at runtime from config or the CLI; the two built-in
//! strategies are the clique-threshold filter and the Jaccard-index
//! baseline. Scores and keep decisions are always computed on the observed
//! graph, never on a partially filtered one.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgraph::BitGraph;
use crate::cliques::{edge_clique_at_least, edge_clique_number};
use crate::error::{Error, Result};
use crate::graphgen::PerturbedGraph;

/// One interchangeable filtering strategy: a per-edge keep predicate plus a
/// per-edge score, both pure functions of the observed graph.
pub trait EdgeFilter: Send + Sync {
    fn name(&self) -> &'static str;

    /// Reject thresholds outside the strategy's domain.
    fn validate_threshold(&self, threshold: f64) -> Result<()>;

    /// Does edge (u, v) of `g` survive at `threshold`? May short-circuit.
    fn keep(&self, g: &BitGraph, u: u32, v: u32, threshold: f64) -> Result<bool>;

    /// The edge score the threshold is compared against (exact omega for the
    /// clique strategy, the Jaccard index for the baseline).
    fn score(&self, g: &BitGraph, u: u32, v: u32, budget: u64) -> Result<f64>;
}

pub struct CliqueThresholdFilter;

impl EdgeFilter for CliqueThresholdFilter {
    fn name(&self) -> &'static str {
        "clique"
    }

    fn validate_threshold(&self, threshold: f64) -> Result<()> {
        if threshold.fract() != 0.0 || threshold < 2.0 || threshold > u32::MAX as f64 {
            return Err(Error::InvalidParameter(format!(
                "clique threshold must be an integer >= 2, got {threshold}"
            )));
        }
        Ok(())
    }

    fn keep(&self, g: &BitGraph, u: u32, v: u32, threshold: f64) -> Result<bool> {
        edge_clique_at_least(g, u, v, threshold as u32)
    }

    fn score(&self, g: &BitGraph, u: u32, v: u32, budget: u64) -> Result<f64> {
        Ok(edge_clique_number(g, u, v, budget)? as f64)
    }
}

pub struct JaccardFilter;

impl EdgeFilter for JaccardFilter {
    fn name(&self) -> &'static str {
        "jaccard"
    }

    fn validate_threshold(&self, threshold: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidParameter(format!(
                "jaccard threshold must lie in [0, 1], got {threshold}"
            )));
        }
        Ok(())
    }

    fn keep(&self, g: &BitGraph, u: u32, v: u32, threshold: f64) -> Result<bool> {
        Ok(jaccard_index(g, u, v)? >= threshold)
    }

    fn score(&self, g: &BitGraph, u: u32, v: u32, _budget: u64) -> Result<f64> {
        jaccard_index(g, u, v)
    }
}

/// The built-in strategies, in registry order.
pub fn registry() -> &'static [&'static dyn EdgeFilter] {
    static REGISTRY: [&dyn EdgeFilter; 2] = [&CliqueThresholdFilter, &JaccardFilter];
    &REGISTRY
}

pub fn filter_by_name(name: &str) -> Result<&'static dyn EdgeFilter> {
    registry()
        .iter()
        .copied()
        .find(|f| f.name() == name)
        .ok_or_else(|| {
            let known: Vec<_> = registry().iter().map(|f| f.name()).collect();
            Error::InvalidParameter(format!(
                "unknown filter method '{name}' (known: {})",
                known.join(", ")
            ))
        })
}

/// Filter method plus threshold, as configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub method: String,
    pub threshold: f64,
}

impl FilterConfig {
    pub fn resolve(&self) -> Result<&'static dyn EdgeFilter> {
        let f = filter_by_name(&self.method)?;
        f.validate_threshold(self.threshold)?;
        Ok(f)
    }
}

/// Jaccard index of an edge: |N(u) ∩ N(v)| / |N(u) ∪ N(v) \ {u,v}|, and 0
/// when the denominator is 0. An isolated edge scores 0; a fully shared
/// neighborhood scores 1.
pub fn jaccard_index(g: &BitGraph, u: u32, v: u32) -> Result<f64> {
    if !g.has_edge(u, v) {
        return Err(Error::NonEdge { u, v });
    }
    let (ru, rv) = (g.row(u), g.row(v));
    let mut inter = 0u64;
    let mut union = vec![0u64; g.words()];
    for w in 0..g.words() {
        inter += (ru[w] & rv[w]).count_ones() as u64;
        union[w] = ru[w] | rv[w];
    }
    union[u as usize / 64] &= !(1u64 << (u % 64));
    union[v as usize / 64] &= !(1u64 << (v % 64));
    let denom: u64 = union.iter().map(|w| w.count_ones() as u64).sum();
    if denom == 0 {
        Ok(0.0)
    } else {
        Ok(inter as f64 / denom as f64)
    }
}

/// Per-edge outcome of a filtering pass, in observed-edge order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: u32,
    pub v: u32,
    pub kept: bool,
    pub score: Option<f64>,
}

/// The denoised graph: surviving edges of the observed graph on the same
/// vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredGraph {
    pub method: String,
    pub threshold: f64,
    pub records: Vec<EdgeRecord>,
    pub survivors: BitGraph,
    pub seed: u64,
}

impl FilteredGraph {
    pub fn kept_count(&self) -> usize {
        self.records.iter().filter(|r| r.kept).count()
    }
}

/// Apply a keep predicate to every listed edge of `g`, in parallel, merging
/// in the canonical edge order.
pub fn filter_edges(
    g: &BitGraph,
    edges: &[(u32, u32)],
    filter: &dyn EdgeFilter,
    threshold: f64,
    budget: u64,
    with_scores: bool,
) -> Result<Vec<EdgeRecord>> {
    filter.validate_threshold(threshold)?;
    edges
        .par_iter()
        .map(|&(u, v)| {
            let kept = filter.keep(g, u, v, threshold)?;
            let score = if with_scores {
                Some(filter.score(g, u, v, budget)?)
            } else {
                None
            };
            Ok(EdgeRecord { u, v, kept, score })
        })
        .collect()
}

/// Run a filtering strategy over the observed graph of `pg`.
pub fn apply_filter(
    pg: &PerturbedGraph,
    filter: &dyn EdgeFilter,
    threshold: f64,
    budget: u64,
    with_scores: bool,
) -> Result<FilteredGraph> {
    let edges: Vec<(u32, u32)> = pg.edge_pairs().collect();
    let records = filter_edges(pg.adjacency(), &edges, filter, threshold, budget, with_scores)?;
    let mut survivors = BitGraph::new(pg.n());
    for rec in &records {
        if rec.kept {
            survivors.add_edge(rec.u, rec.v);
        }
    }
    Ok(FilteredGraph {
        method: filter.name().to_string(),
        threshold,
        records,
        survivors,
        seed: pg.seed,
    })
}

/// Clique-threshold filtering: an observed edge survives iff its edge clique
/// number in the observed graph is at least tau.
pub fn clique_filter(pg: &PerturbedGraph, tau: u32, budget: u64) -> Result<FilteredGraph> {
    apply_filter(pg, &CliqueThresholdFilter, tau as f64, budget, false)
}

/// Baseline: an edge survives iff its Jaccard index is at least `threshold`.
pub fn jaccard_filter(pg: &PerturbedGraph, threshold: f64) -> Result<FilteredGraph> {
    apply_filter(pg, &JaccardFilter, threshold, 0, false)
}

fn fmt_score(score: &Option<f64>) -> String {
    match score {
        Some(s) => format!("{s}"),
        None => "na".to_string(),
    }
}

/// Edge list `u v kept|removed score` sorted by (u, v); the header records
/// the method, threshold and seed lineage.
pub fn write_filtered_graph<W: Write>(fg: &FilteredGraph, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# method={} threshold={} seed={}",
        fg.method, fg.threshold, fg.seed
    )?;
    for rec in &fg.records {
        writeln!(
            w,
            "{} {} {} {}",
            rec.u,
            rec.v,
            if rec.kept { "kept" } else { "removed" },
            fmt_score(&rec.score)
        )?;
    }
    Ok(())
}

pub fn write_filtered_file(fg: &FilteredGraph, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_filtered_graph(fg, std::io::BufWriter::new(f))
}

impl fmt::Display for FilterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.method, self.threshold)
    }
}
