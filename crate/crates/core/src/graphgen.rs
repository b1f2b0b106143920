//! The hidden r-neighborhood graph, its (p,q) ER-perturbation with per-edge
//! provenance, and good/bad/indeterminate edge classification against the
//! ground truth.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitgraph::BitGraph;
use crate::error::{Error, Result};
use crate::rng::pair_uniform;
use crate::space::PointCloud;

/// The hidden truth graph: vertices are cloud points, edges are pairs at
/// geodesic distance <= r (boundary inclusive).
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub cloud: PointCloud,
    pub r: f64,
    /// Sorted, u < v.
    pub edges: Vec<(u32, u32)>,
    adjacency: BitGraph,
}

pub fn build_rgg(cloud: PointCloud, r: f64) -> Result<GeometricGraph> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    let n = cloud.len();
    let mut edges = Vec::new();
    let mut adjacency = BitGraph::new(n);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if cloud.distance(u, v) <= r {
                edges.push((u, v));
                adjacency.add_edge(u, v);
            }
        }
    }
    Ok(GeometricGraph {
        cloud,
        r,
        edges,
        adjacency,
    })
}

impl GeometricGraph {
    pub fn n(&self) -> usize {
        self.cloud.len()
    }

    pub fn adjacency(&self) -> &BitGraph {
        &self.adjacency
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency.has_edge(u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "kept-original")]
    KeptOriginal,
    #[serde(rename = "inserted")]
    Inserted,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::KeptOriginal => write!(f, "kept-original"),
            Provenance::Inserted => write!(f, "inserted"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kept-original" => Ok(Provenance::KeptOriginal),
            "inserted" => Ok(Provenance::Inserted),
            other => Err(Error::Parse(format!("unknown provenance '{other}'"))),
        }
    }
}

/// Good / bad / indeterminate per the neighborhood criterion: good edges have
/// d(u,v) <= r; bad edges admit no pair x in N*(u), y in N*(v) with
/// d(x,y) <= r; everything else is indeterminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeLabel {
    #[serde(rename = "good")]
    Good,
    #[serde(rename = "bad")]
    Bad,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Good => write!(f, "good"),
            EdgeLabel::Bad => write!(f, "bad"),
            EdgeLabel::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

impl FromStr for EdgeLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "good" => Ok(EdgeLabel::Good),
            "bad" => Ok(EdgeLabel::Bad),
            "indeterminate" => Ok(EdgeLabel::Indeterminate),
            other => Err(Error::Parse(format!("unknown edge label '{other}'"))),
        }
    }
}

/// The observed graph: each truth edge kept independently with probability
/// 1-p, each non-edge inserted independently with probability q. Draws are
/// keyed by (seed, u, v) so the result is independent of evaluation order.
#[derive(Debug, Clone)]
pub struct PerturbedGraph {
    pub truth: GeometricGraph,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    /// Sorted by (u, v), u < v.
    pub edges: Vec<(u32, u32, Provenance)>,
    adjacency: BitGraph,
}

pub fn perturb(truth: GeometricGraph, p: f64, q: f64, seed: u64) -> Result<PerturbedGraph> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(
            "p and q must lie in [0, 1]".into(),
        ));
    }
    let n = truth.n();
    let mut edges = Vec::new();
    let mut adjacency = BitGraph::new(n);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            let draw = pair_uniform(seed, u, v);
            if truth.has_edge(u, v) {
                if draw >= p {
                    edges.push((u, v, Provenance::KeptOriginal));
                    adjacency.add_edge(u, v);
                }
            } else if draw < q {
                edges.push((u, v, Provenance::Inserted));
                adjacency.add_edge(u, v);
            }
        }
    }
    Ok(PerturbedGraph {
        truth,
        p,
        q,
        seed,
        edges,
        adjacency,
    })
}

impl PerturbedGraph {
    pub fn n(&self) -> usize {
        self.truth.n()
    }

    pub fn adjacency(&self) -> &BitGraph {
        &self.adjacency
    }

    pub fn edge_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().map(|&(u, v, _)| (u, v))
    }
}

/// Label every observed edge. The classification consults only the truth
/// graph and the point cloud; neighborhoods exclude the vertex itself.
pub fn classify_edges(pg: &PerturbedGraph) -> Vec<EdgeLabel> {
    let truth_adj = pg.truth.adjacency();
    let words = truth_adj.words();
    pg.edges
        .iter()
        .map(|&(u, v, _)| {
            if pg.truth.cloud.distance(u, v) <= pg.truth.r {
                return EdgeLabel::Good;
            }
            // Bad iff no x in N*(u), y in N*(v) with d(x,y) <= r. Since
            // d(x,y) <= r  <=>  x == y or (x,y) is a truth edge, this is:
            // disjoint neighborhoods and no truth edge across them.
            let ru = truth_adj.row(u);
            let rv = truth_adj.row(v);
            if (0..words).any(|w| ru[w] & rv[w] != 0) {
                return EdgeLabel::Indeterminate; // shared neighbor: x == y
            }
            for x in truth_adj.neighbors(u) {
                let rx = truth_adj.row(x);
                if (0..words).any(|w| rx[w] & rv[w] != 0) {
                    return EdgeLabel::Indeterminate;
                }
            }
            EdgeLabel::Bad
        })
        .collect()
}

/// Sample an Erdos-Renyi graph G(n, p) with pair-keyed draws (equivalently:
/// the q-insertion perturbation of the empty truth graph).
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> BitGraph {
    let mut g = BitGraph::new(n);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if pair_uniform(seed, u, v) < p {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Write the observed edge list: `u v <provenance> <label>` with u < v,
/// sorted by (u, v); header comments carry the generation parameters.
/// Bit-exact across runs with identical inputs.
pub fn write_edge_list<W: Write>(
    pg: &PerturbedGraph,
    labels: &[EdgeLabel],
    mut w: W,
) -> Result<()> {
    debug_assert_eq!(labels.len(), pg.edges.len());
    writeln!(
        w,
        "# n={} r={} p={} q={} seed={}",
        pg.n(),
        pg.truth.r,
        pg.p,
        pg.q,
        pg.seed
    )?;
    for (&(u, v, prov), label) in pg.edges.iter().zip(labels) {
        writeln!(w, "{u} {v} {prov} {label}")?;
    }
    Ok(())
}

pub fn write_edge_list_file(pg: &PerturbedGraph, labels: &[EdgeLabel], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_edge_list(pg, labels, std::io::BufWriter::new(f))
}

/// Parsed form of an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListFile {
    pub n: usize,
    pub r: f64,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    pub edges: Vec<(u32, u32, Provenance, EdgeLabel)>,
}

pub fn read_edge_list<R: std::io::Read>(r: R) -> Result<EdgeListFile> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))??;
    let body = head
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("edge list must start with a '#' header".into()))?;
    let mut n = None;
    let mut rr = None;
    let mut p = None;
    let mut q = None;
    let mut seed = None;
    for tok in body.split_whitespace() {
        if let Some((key, val)) = tok.split_once('=') {
            match key {
                "n" => n = Some(val.parse().map_err(|e| Error::Parse(format!("n: {e}")))?),
                "r" => rr = Some(val.parse().map_err(|e| Error::Parse(format!("r: {e}")))?),
                "p" => p = Some(val.parse().map_err(|e| Error::Parse(format!("p: {e}")))?),
                "q" => q = Some(val.parse().map_err(|e| Error::Parse(format!("q: {e}")))?),
                "seed" => {
                    seed = Some(val.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?)
                }
                _ => {}
            }
        }
    }
    let (n, rr, p, q, seed) = match (n, rr, p, q, seed) {
        (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
        _ => return Err(Error::Parse("edge list header needs n,r,p,q,seed".into())),
    };
    let mut edges = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split_whitespace();
        let err = |what: &str| Error::Parse(format!("edge row {lineno}: {what}"));
        let u: u32 = f
            .next()
            .ok_or_else(|| err("missing u"))?
            .parse()
            .map_err(|_| err("bad u"))?;
        let v: u32 = f
            .next()
            .ok_or_else(|| err("missing v"))?
            .parse()
            .map_err(|_| err("bad v"))?;
        let prov: Provenance = f.next().ok_or_else(|| err("missing provenance"))?.parse()?;
        let label: EdgeLabel = f.next().ok_or_else(|| err("missing label"))?.parse()?;
        edges.push((u, v, prov, label));
    }
    Ok(EdgeListFile {
        n,
        r: rr,
        p,
        q,
        seed,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{make_space, sample_points, MetricSpace, SpaceKind};

    fn cloud_from(points: Vec<Vec<f64>>, space: MetricSpace) -> PointCloud {
        PointCloud {
            space,
            points,
            seed: 0,
        }
    }

    #[test]
    fn rgg_boundary_is_inclusive() {
        let space = make_space(SpaceKind::UnitCube, 2).unwrap();
        let cloud = cloud_from(
            vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.9]],
            space,
        );
        let g = build_rgg(cloud, 0.5).unwrap();
        // AB at distance exactly 0.5 is an edge; AC (0.9) and BC are not.
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn rgg_uses_torus_geodesics() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = cloud_from(vec![vec![0.05, 0.0], vec![0.95, 0.0]], space);
        let g = build_rgg(cloud, 0.2).unwrap();
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn rgg_rejects_nonpositive_r() {
        let space = make_space(SpaceKind::UnitCube, 1).unwrap();
        let cloud = cloud_from(vec![vec![0.1]], space);
        assert!(build_rgg(cloud, 0.0).is_err());
    }

    #[test]
    fn rgg_matches_pairwise_recheck() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 50, 1).unwrap();
        let r = 0.25;
        let g = build_rgg(cloud.clone(), r).unwrap();
        let mut expected = Vec::new();
        for u in 0..50u32 {
            for v in (u + 1)..50 {
                if cloud.distance(u, v) <= r {
                    expected.push((u, v));
                }
            }
        }
        assert_eq!(g.edges, expected);
    }

    #[test]
    fn perturb_identity_and_complement() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 40, 3).unwrap();
        let g = build_rgg(cloud, 0.3).unwrap();
        let truth_edges = g.edges.clone();

        let same = perturb(g.clone(), 0.0, 0.0, 11).unwrap();
        assert_eq!(
            same.edges
                .iter()
                .map(|&(u, v, _)| (u, v))
                .collect::<Vec<_>>(),
            truth_edges
        );
        assert!(same
            .edges
            .iter()
            .all(|&(_, _, p)| p == Provenance::KeptOriginal));

        let flipped = perturb(g, 1.0, 1.0, 11).unwrap();
        let total_pairs = 40 * 39 / 2;
        assert_eq!(flipped.edges.len(), total_pairs - truth_edges.len());
        assert!(flipped
            .edges
            .iter()
            .all(|&(_, _, p)| p == Provenance::Inserted));
    }

    #[test]
    fn provenance_partition_is_exact() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 60, 9).unwrap();
        let g = build_rgg(cloud, 0.3).unwrap();
        let pg = perturb(g, 0.4, 0.05, 5).unwrap();
        for &(u, v, prov) in &pg.edges {
            match prov {
                Provenance::KeptOriginal => assert!(pg.truth.has_edge(u, v)),
                Provenance::Inserted => assert!(!pg.truth.has_edge(u, v)),
            }
        }
    }

    #[test]
    fn perturbation_rates_match_binomial_expectation() {
        // empirical deletion fraction within 3 binomial standard errors
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let (p, q) = (0.3, 0.01);
        let mut kept_total = 0usize;
        let mut truth_total = 0usize;
        let mut inserted_total = 0usize;
        let mut nonedge_total = 0usize;
        for trial in 0..200u64 {
            let cloud = sample_points(&space, 500, 1000 + trial).unwrap();
            let g = build_rgg(cloud, 0.1).unwrap();
            let te = g.edges.len();
            let pg = perturb(g, p, q, 2000 + trial).unwrap();
            truth_total += te;
            nonedge_total += 500 * 499 / 2 - te;
            kept_total += pg
                .edges
                .iter()
                .filter(|&&(_, _, pr)| pr == Provenance::KeptOriginal)
                .count();
            inserted_total += pg
                .edges
                .iter()
                .filter(|&&(_, _, pr)| pr == Provenance::Inserted)
                .count();
        }
        let del_frac = 1.0 - kept_total as f64 / truth_total as f64;
        let se_del = (p * (1.0 - p) / truth_total as f64).sqrt();
        assert!(
            (del_frac - p).abs() <= 3.0 * se_del,
            "deletion {del_frac} vs {p} (se {se_del})"
        );
        let ins_frac = inserted_total as f64 / nonedge_total as f64;
        let se_ins = (q * (1.0 - q) / nonedge_total as f64).sqrt();
        assert!(
            (ins_frac - q).abs() <= 3.0 * se_ins,
            "insertion {ins_frac} vs {q} (se {se_ins})"
        );
    }

    #[test]
    fn classify_good_isolated_and_indeterminate() {
        // 1-d cube, r = 0.1. Points: 0 at 0.0, 1 at 0.05 (good pair),
        // 2 at 0.50 and 3 at 0.55 (another close pair), 4 at 0.98 isolated,
        // 5 at 0.80 isolated.
        let space = make_space(SpaceKind::UnitCube, 1).unwrap();
        let cloud = cloud_from(
            vec![
                vec![0.0],
                vec![0.05],
                vec![0.50],
                vec![0.55],
                vec![0.98],
                vec![0.80],
            ],
            space,
        );
        let g = build_rgg(cloud, 0.1).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (2, 3)]);
        // insert everything, delete nothing
        let pg = perturb(g, 0.0, 1.0, 1).unwrap();
        let labels = classify_edges(&pg);
        let find = |u: u32, v: u32| {
            pg.edges
                .iter()
                .position(|&(a, b, _)| (a, b) == (u, v))
                .unwrap()
        };
        // original close pairs stay good
        assert_eq!(labels[find(0, 1)], EdgeLabel::Good);
        assert_eq!(labels[find(2, 3)], EdgeLabel::Good);
        // edge between two isolated vertices: vacuously bad
        assert_eq!(labels[find(4, 5)], EdgeLabel::Bad);
        // 1 (neighbor: 0) vs 2 (neighbor: 3): d(0, 3) = 0.55 > r -> bad
        assert_eq!(labels[find(1, 2)], EdgeLabel::Bad);
        // 0 vs 2: x = 1 in N(0), y = 3 in N(2): d(1,3) = 0.5 > r; but also
        // x = 1, y = 3 ... all cross pairs exceed r -> bad
        assert_eq!(labels[find(0, 2)], EdgeLabel::Bad);
    }

    #[test]
    fn classify_indeterminate_via_crossing_edge() {
        // chain: 0 at 0.0, 1 at 0.1, 2 at 0.2, 3 at 0.3 with r = 0.1.
        // observed inserted edge (0,3): d = 0.3 = 3r, x=1 in N(0), y=2 in
        // N(3), d(1,2) = 0.1 <= r -> indeterminate.
        let space = make_space(SpaceKind::UnitCube, 1).unwrap();
        let cloud = cloud_from(
            vec![vec![0.0], vec![0.1], vec![0.2], vec![0.3]],
            space,
        );
        let g = build_rgg(cloud, 0.1).unwrap();
        let pg = perturb(g, 0.0, 1.0, 2).unwrap();
        let labels = classify_edges(&pg);
        let idx = pg
            .edges
            .iter()
            .position(|&(a, b, _)| (a, b) == (0, 3))
            .unwrap();
        assert_eq!(labels[idx], EdgeLabel::Indeterminate);
    }

    #[test]
    fn edges_beyond_three_r_are_always_bad() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 120, 77).unwrap();
        let g = build_rgg(cloud, 0.08).unwrap();
        let pg = perturb(g, 0.2, 0.3, 8).unwrap();
        let labels = classify_edges(&pg);
        for (&(u, v, _), label) in pg.edges.iter().zip(&labels) {
            if pg.truth.cloud.distance(u, v) > 3.0 * pg.truth.r {
                assert_eq!(*label, EdgeLabel::Bad, "edge ({u},{v})");
            }
        }
    }

    #[test]
    fn perturb_deterministic_per_seed() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 80, 4).unwrap();
        let g = build_rgg(cloud, 0.2).unwrap();
        let a = perturb(g.clone(), 0.3, 0.02, 42).unwrap();
        let b = perturb(g, 0.3, 0.02, 42).unwrap();
        assert_eq!(a.edges, b.edges);
    }

    #[test]
    fn degree_and_occupancy_claims() {
        // With the density assumption satisfied, in >= 95% of 100 trials:
        // every vertex has >= sn/4 neighbors, and every (r/2)-ball centered
        // at a vertex holds <= 3*rho*s*n points.
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let n = 400usize;
        let s_min = crate::space::assumption_a_s_min(n); // ~0.1947
        let r = crate::space::solve_r_for_sn(&space, n, (s_min * 1.05) * n as f64).unwrap();
        let mb = crate::space::ball_mass_bounds(&space, r).unwrap();
        assert!(crate::space::assumption_a_holds(&mb, n));
        let sn = mb.s * n as f64;
        let mut degree_ok = 0;
        let mut occupancy_ok = 0;
        for trial in 0..100u64 {
            let cloud = sample_points(&space, n, 5000 + trial).unwrap();
            let g = build_rgg(cloud, r).unwrap();
            let min_deg = (0..n as u32)
                .map(|u| g.adjacency().degree(u))
                .min()
                .unwrap();
            if (min_deg as f64) >= sn / 4.0 {
                degree_ok += 1;
            }
            let max_ball = (0..n as u32)
                .map(|u| {
                    (0..n as u32)
                        .filter(|&v| v != u && g.cloud.distance(u, v) <= r / 2.0)
                        .count()
                })
                .max()
                .unwrap();
            if (max_ball as f64) <= 3.0 * mb.rho * sn {
                occupancy_ok += 1;
            }
        }
        assert!(degree_ok >= 95, "degree claim held in {degree_ok}/100");
        assert!(occupancy_ok >= 95, "occupancy claim held in {occupancy_ok}/100");
    }

    #[test]
    fn edge_list_round_trip() {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = sample_points(&space, 30, 21).unwrap();
        let g = build_rgg(cloud, 0.25).unwrap();
        let pg = perturb(g, 0.2, 0.05, 3).unwrap();
        let labels = classify_edges(&pg);
        let mut buf = Vec::new();
        write_edge_list(&pg, &labels, &mut buf).unwrap();
        let parsed = read_edge_list(&buf[..]).unwrap();
        assert_eq!(parsed.n, 30);
        assert_eq!(parsed.seed, 3);
        assert_eq!(parsed.edges.len(), pg.edges.len());
        for ((u, v, prov, label), (&(eu, ev, eprov), elabel)) in
            parsed.edges.iter().zip(pg.edges.iter().zip(&labels))
        {
            assert_eq!((*u, *v, *prov, *label), (eu, ev, eprov, *elabel));
        }
        // identical inputs give identical bytes
        let mut buf2 = Vec::new();
        write_edge_list(&pg, &labels, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }
}
