//! Unweighted shortest-path metrics, alpha-approximation between metrics,
//! and the recovery stretch statistic with its three proof events.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgraph::BitGraph;
use crate::error::{Error, Result};
use crate::filtering::FilteredGraph;
use crate::graphgen::{EdgeLabel, PerturbedGraph, Provenance};

pub const INF: u32 = u32::MAX;

/// Hop-count distance matrix; unreachable pairs hold [`INF`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, i: u32, j: u32) -> u32 {
        self.dist[i as usize * self.n + j as usize]
    }

    #[inline]
    fn set(&mut self, i: u32, j: u32, d: u32) {
        self.dist[i as usize * self.n + j as usize] = d;
    }
}

/// BFS from every source over frontier bitsets; exact hop counts.
pub fn all_pairs_distances(g: &BitGraph) -> DistanceMatrix {
    let n = g.len();
    let words = g.words();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut dist = vec![INF; n];
            dist[s] = 0;
            let mut visited = vec![0u64; words];
            let mut frontier = vec![0u64; words];
            visited[s / 64] |= 1 << (s % 64);
            frontier[s / 64] |= 1 << (s % 64);
            let mut level = 0u32;
            let mut next = vec![0u64; words];
            loop {
                level += 1;
                next.iter_mut().for_each(|w| *w = 0);
                for (w, &word) in frontier.iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let v = (w as u32) * 64 + bits.trailing_zeros();
                        bits &= bits - 1;
                        let row = g.row(v);
                        for x in 0..words {
                            next[x] |= row[x];
                        }
                    }
                }
                let mut any = false;
                for x in 0..words {
                    next[x] &= !visited[x];
                    if next[x] != 0 {
                        any = true;
                        visited[x] |= next[x];
                        let mut bits = next[x];
                        while bits != 0 {
                            let v = (x as u32) * 64 + bits.trailing_zeros();
                            bits &= bits - 1;
                            dist[v as usize] = level;
                        }
                    }
                }
                if !any {
                    break;
                }
                std::mem::swap(&mut frontier, &mut next);
            }
            dist
        })
        .collect();
    let mut dist = Vec::with_capacity(n * n);
    for row in rows {
        dist.extend(row);
    }
    DistanceMatrix { n, dist }
}

/// Multiplicative distortion between two metrics on the same vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    /// max over comparable pairs of max(d1/d2, d2/d1); infinity when the
    /// finiteness patterns differ.
    pub alpha: f64,
    pub worst_pair: Option<(u32, u32)>,
    pub connectivity_mismatch: bool,
}

/// alpha such that (1/alpha) d2 <= d1 <= alpha d2 over pairs finite and
/// positive in both; alpha = 1 iff the matrices agree. A pair finite in one
/// metric and infinite in the other forces alpha = infinity with the
/// mismatch flag set.
pub fn approximation_factor(d1: &DistanceMatrix, d2: &DistanceMatrix) -> Result<ApproxReport> {
    if d1.n != d2.n {
        return Err(Error::DimensionMismatch(format!(
            "metrics on {} vs {} vertices",
            d1.n, d2.n
        )));
    }
    let mut alpha = 1.0f64;
    let mut worst = None;
    for i in 0..d1.n as u32 {
        for j in (i + 1)..d1.n as u32 {
            let (a, b) = (d1.get(i, j), d2.get(i, j));
            match (a == INF, b == INF) {
                (true, true) => {}
                (false, false) => {
                    if a > 0 && b > 0 {
                        let r = (a as f64 / b as f64).max(b as f64 / a as f64);
                        if r > alpha {
                            alpha = r;
                            worst = Some((i, j));
                        }
                    }
                }
                _ => {
                    return Ok(ApproxReport {
                        alpha: f64::INFINITY,
                        worst_pair: Some((i, j)),
                        connectivity_mismatch: true,
                    });
                }
            }
        }
    }
    Ok(ApproxReport {
        alpha,
        worst_pair: worst,
        connectivity_mismatch: false,
    })
}

/// Stretch of the filtered graph against the hidden graph, together with the
/// three events the recovery argument runs on: E1 (deletion distorts the
/// intersection graph's metric by at most 2), E2 (the filter kept every
/// surviving original edge), E3 (no bad edge survived the filter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub approx: ApproxReport,
    pub e1: bool,
    pub e2: bool,
    pub e3: bool,
}

pub fn recovery_stretch(
    pg: &PerturbedGraph,
    labels: &[EdgeLabel],
    filtered: &FilteredGraph,
) -> Result<StretchReport> {
    let n = pg.n();
    if filtered.survivors.len() != n {
        return Err(Error::DimensionMismatch(
            "filtered graph on a different vertex set".into(),
        ));
    }
    let d_truth = all_pairs_distances(pg.truth.adjacency());
    let d_filtered = all_pairs_distances(&filtered.survivors);
    let approx = approximation_factor(&d_filtered, &d_truth)?;

    // E1: d_{observed ∩ truth} <= 2 d_truth (pointwise; infinite truth
    // distances are vacuous since the intersection is a subgraph).
    let mut intersection = BitGraph::new(n);
    for &(u, v, prov) in &pg.edges {
        if prov == Provenance::KeptOriginal {
            intersection.add_edge(u, v);
        }
    }
    let d_int = all_pairs_distances(&intersection);
    let mut e1 = true;
    'e1: for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            let t = d_truth.get(i, j);
            if t != INF {
                let x = d_int.get(i, j);
                if x == INF || x > 2 * t {
                    e1 = false;
                    break 'e1;
                }
            }
        }
    }

    let mut e2 = true;
    let mut e3 = true;
    for (rec, label) in filtered.records.iter().zip(labels) {
        match (rec.kept, pg.truth.has_edge(rec.u, rec.v)) {
            (false, true) => e2 = false,
            (true, _) if *label == EdgeLabel::Bad => e3 = false,
            _ => {}
        }
    }

    Ok(StretchReport { approx, e1, e2, e3 })
}

/// CSV `i,j,dist` for i < j; unreachable printed as `inf`.
pub fn write_distance_csv<W: Write>(d: &DistanceMatrix, mut w: W) -> Result<()> {
    writeln!(w, "i,j,dist")?;
    for i in 0..d.n as u32 {
        for j in (i + 1)..d.n as u32 {
            let v = d.get(i, j);
            if v == INF {
                writeln!(w, "{i},{j},inf")?;
            } else {
                writeln!(w, "{i},{j},{v}")?;
            }
        }
    }
    Ok(())
}

pub fn write_distance_file(d: &DistanceMatrix, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_distance_csv(d, std::io::BufWriter::new(f))
}

pub fn read_distance_csv<R: std::io::Read>(r: R, n: usize) -> Result<DistanceMatrix> {
    use std::io::BufRead;
    let mut out = DistanceMatrix {
        n,
        dist: vec![INF; n * n],
    };
    for i in 0..n as u32 {
        out.set(i, i, 0);
    }
    let reader = std::io::BufReader::new(r);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("distance row {lineno}")));
        }
        let i: u32 = fields[0]
            .parse()
            .map_err(|e| Error::Parse(format!("row {lineno} i: {e}")))?;
        let j: u32 = fields[1]
            .parse()
            .map_err(|e| Error::Parse(format!("row {lineno} j: {e}")))?;
        let d = if fields[2] == "inf" {
            INF
        } else {
            fields[2]
                .parse()
                .map_err(|e| Error::Parse(format!("row {lineno} dist: {e}")))?
        };
        out.set(i, j, d);
        out.set(j, i, d);
    }
    Ok(out)
}
