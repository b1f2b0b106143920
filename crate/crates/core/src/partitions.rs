//! Well-separated clique-partitions families, built by a two-level greedy
//! packing construction. The covering step that the analysis gets from an
//! existence theorem is replaced here by greedy conflict-graph coloring,
//! which yields a valid (possibly larger) family; downstream checks only
//! need validity.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graphgen::GeometricGraph;
use crate::space::PointCloud;

/// A family of delta-packings: each packing is a set of center vertices with
/// pairwise distance > 2*delta (so their delta-balls are disjoint), and every
/// input vertex is a center in exactly one packing.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingFamily {
    pub delta: f64,
    pub packings: Vec<Vec<u32>>,
}

/// Greedy coloring of the conflict graph (u ~ v iff d(u,v) <= 2*delta) in
/// vertex-id order; each color class is a delta-packing.
pub fn packing_cover(cloud: &PointCloud, subset: &[u32], delta: f64) -> PackingFamily {
    assert!(delta > 0.0, "delta must be positive");
    let mut sorted: Vec<u32> = subset.to_vec();
    sorted.sort_unstable();
    let mut packings: Vec<Vec<u32>> = Vec::new();
    for &v in &sorted {
        let mut placed = false;
        for packing in packings.iter_mut() {
            if packing
                .iter()
                .all(|&c| cloud.distance(c, v) > 2.0 * delta)
            {
                packing.push(v);
                placed = true;
                break;
            }
        }
        if !placed {
            packings.push(vec![v]);
        }
    }
    PackingFamily { delta, packings }
}

/// One part of a well-separated family: a set of cliques, each contained in
/// the (r/2)-ball of its center, pairwise more than r apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub centers: Vec<u32>,
    pub cliques: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WspFamily {
    pub parts: Vec<Part>,
}

impl WspFamily {
    /// |Lambda|: number of parts.
    pub fn lambda(&self) -> usize {
        self.parts.len()
    }
}

/// Construction statistics: conflict-graph degrees from both levels, giving
/// the greedy bound |Lambda| <= (1 + max_deg_level1) * (1 + max_deg_level2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WspBuildStats {
    pub level1_classes: usize,
    pub max_level2_classes: usize,
    pub lambda: usize,
    pub max_conflict_degree_level1: usize,
    pub max_conflict_degree_level2: usize,
}

impl WspBuildStats {
    pub fn greedy_bound(&self) -> usize {
        (1 + self.max_conflict_degree_level1) * (1 + self.max_conflict_degree_level2)
    }
}

/// Two-level construction: an (r/2)-packing family of all vertices gives
/// level-1 center sets V_i (pairwise > r within a set); an r-packing family
/// of each V_i gives level-2 center sets (pairwise > 2r within a set). The
/// part of a level-2 set is every vertex within r/2 of one of its centers,
/// each center's ball contributing one clique; a vertex covered by several
/// balls goes to the lowest-indexed clique so cliques within a part stay
/// disjoint.
pub fn build_wsp(cloud: &PointCloud, r: f64) -> (WspFamily, WspBuildStats) {
    assert!(!cloud.is_empty(), "cloud must be nonempty");
    assert!(r > 0.0, "r must be positive");
    let n = cloud.len() as u32;
    let all: Vec<u32> = (0..n).collect();

    let level1 = packing_cover(cloud, &all, r / 2.0);
    let mut parts = Vec::new();
    let mut max_level2 = 0usize;
    let mut max_deg2 = 0usize;
    for centers_i in &level1.packings {
        let level2 = packing_cover(cloud, centers_i, r);
        max_level2 = max_level2.max(level2.packings.len());
        max_deg2 = max_deg2.max(max_conflict_degree(cloud, centers_i, 2.0 * r));
        for centers_j in &level2.packings {
            let mut cliques: Vec<Vec<u32>> = vec![Vec::new(); centers_j.len()];
            for v in 0..n {
                // lowest-indexed covering ball wins
                if let Some(slot) = centers_j
                    .iter()
                    .position(|&c| cloud.distance(c, v) <= r / 2.0)
                {
                    cliques[slot].push(v);
                }
            }
            parts.push(Part {
                centers: centers_j.clone(),
                cliques,
            });
        }
    }
    let stats = WspBuildStats {
        level1_classes: level1.packings.len(),
        max_level2_classes: max_level2,
        lambda: parts.len(),
        max_conflict_degree_level1: max_conflict_degree(cloud, &all, r),
        max_conflict_degree_level2: max_deg2,
    };
    (WspFamily { parts }, stats)
}

fn max_conflict_degree(cloud: &PointCloud, subset: &[u32], threshold: f64) -> usize {
    subset
        .iter()
        .map(|&u| {
            subset
                .iter()
                .filter(|&&v| v != u && cloud.distance(u, v) <= threshold)
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Outcome of validating a family against its defining properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WspReport {
    pub valid: bool,
    /// First violated property, if any.
    pub violation: Option<String>,
    /// Parts where the Hausdorff separation holds but the (stronger) minimum
    /// pairwise separation the proofs use does not. Flagged, not failed.
    pub hausdorff_only_parts: Vec<usize>,
}

/// Checks: the parts cover V; each clique sits inside the r/2-ball of its
/// center; cliques within a part are disjoint; distinct cliques of a part
/// keep minimum pairwise distance > r; each clique spans a complete subgraph
/// of the truth graph; and no truth edge crosses two cliques of one part.
pub fn validate_wsp(
    wsp: &WspFamily,
    cloud: &PointCloud,
    r: f64,
    truth: &GeometricGraph,
) -> WspReport {
    let fail = |msg: String| WspReport {
        valid: false,
        violation: Some(msg),
        hausdorff_only_parts: Vec::new(),
    };

    let n = cloud.len();
    let mut covered = vec![false; n];
    for part in &wsp.parts {
        for clique in &part.cliques {
            for &v in clique {
                if (v as usize) >= n {
                    return fail(format!("vertex {v} out of range"));
                }
                covered[v as usize] = true;
            }
        }
    }
    if let Some(v) = covered.iter().position(|&c| !c) {
        return fail(format!("vertex {v} not covered by any part"));
    }

    let mut hausdorff_only = Vec::new();
    for (pi, part) in wsp.parts.iter().enumerate() {
        if part.cliques.len() != part.centers.len() {
            return fail(format!("part {pi}: centers/cliques length mismatch"));
        }
        // containment in the center's r/2-ball; completeness in truth
        for (ci, clique) in part.cliques.iter().enumerate() {
            let center = part.centers[ci];
            for &v in clique {
                if cloud.distance(center, v) > r / 2.0 {
                    return fail(format!(
                        "part {pi} clique {ci}: vertex {v} outside the r/2-ball of {center}"
                    ));
                }
            }
            for i in 0..clique.len() {
                for j in (i + 1)..clique.len() {
                    if !truth.has_edge(clique[i], clique[j]) {
                        return fail(format!(
                            "part {pi} clique {ci}: ({}, {}) not a truth edge",
                            clique[i], clique[j]
                        ));
                    }
                }
            }
        }
        // disjointness within the part
        let mut seen = std::collections::HashSet::new();
        for clique in &part.cliques {
            for &v in clique {
                if !seen.insert(v) {
                    return fail(format!("part {pi}: vertex {v} in two cliques"));
                }
            }
        }
        // pairwise separation and no crossing truth edges
        let mut part_min_sep_ok = true;
        for a in 0..part.cliques.len() {
            for b in (a + 1)..part.cliques.len() {
                let (ca, cb) = (&part.cliques[a], &part.cliques[b]);
                if ca.is_empty() || cb.is_empty() {
                    continue;
                }
                let mut min_d = f64::INFINITY;
                for &x in ca {
                    for &y in cb {
                        min_d = min_d.min(cloud.distance(x, y));
                        if truth.has_edge(x, y) {
                            return fail(format!(
                                "part {pi}: truth edge ({x},{y}) crosses cliques {a} and {b}"
                            ));
                        }
                    }
                }
                if min_d <= r {
                    if hausdorff_distance(cloud, ca, cb) > r {
                        part_min_sep_ok = false;
                    } else {
                        return fail(format!(
                            "part {pi}: cliques {a} and {b} at min distance {min_d} <= r"
                        ));
                    }
                }
            }
        }
        if !part_min_sep_ok {
            hausdorff_only.push(pi);
        }
    }
    WspReport {
        valid: true,
        violation: None,
        hausdorff_only_parts: hausdorff_only,
    }
}

pub fn hausdorff_distance(cloud: &PointCloud, a: &[u32], b: &[u32]) -> f64 {
    let directed = |from: &[u32], to: &[u32]| {
        from.iter()
            .map(|&x| {
                to.iter()
                    .map(|&y| cloud.distance(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

pub fn write_wsp_json<W: Write>(wsp: &WspFamily, mut w: W) -> Result<()> {
    let s = serde_json::to_string_pretty(wsp).expect("wsp serializes");
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_wsp_file(wsp: &WspFamily, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_wsp_json(wsp, std::io::BufWriter::new(f))
}

pub fn read_wsp_json<R: std::io::Read>(r: R) -> Result<WspFamily> {
    serde_json::from_reader(r).map_err(|e| crate::error::Error::Parse(format!("wsp json: {e}")))
}
