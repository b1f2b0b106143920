//! Independent verification oracles.
//!
//! The clique oracles walk every vertex subset of a small graph (n <= 25),
//! deliberately sharing nothing with the branch-and-bound engine. The Monte
//! Carlo samplers simulate the block-insertion and two-ball random models
//! directly so the closed-form expectation calculators can be checked
//! against an independent route. Verification only; do not call the subset
//! oracles on large inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitgraph::BitGraph;

fn adjacency_masks(g: &BitGraph) -> Vec<u32> {
    let n = g.len();
    assert!(n <= 25, "oracle is for tiny graphs only (n = {n})");
    let mut masks = vec![0u32; n];
    for u in 0..n as u32 {
        for v in g.neighbors(u) {
            masks[u as usize] |= 1 << v;
        }
    }
    masks
}

fn is_clique(masks: &[u32], subset: u32) -> bool {
    let mut rest = subset;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        // every other member must be a neighbor of v
        if subset & !(masks[v] | (1 << v)) != 0 {
            return false;
        }
    }
    true
}

/// Maximum clique size by checking all 2^n subsets.
pub fn max_clique_size(g: &BitGraph) -> usize {
    let n = g.len();
    if n == 0 {
        return 0;
    }
    let masks = adjacency_masks(g);
    let mut best = 0usize;
    for subset in 1u32..(1 << n) {
        let size = subset.count_ones() as usize;
        if size > best && is_clique(&masks, subset) {
            best = size;
        }
    }
    best
}

/// Edge clique number of (u, v): the size of the largest clique containing
/// both endpoints. Panics if (u, v) is not an edge.
pub fn edge_clique_number(g: &BitGraph, u: u32, v: u32) -> usize {
    assert!(g.has_edge(u, v), "({u},{v}) is not an edge");
    let masks = adjacency_masks(g);
    let need = (1u32 << u) | (1 << v);
    let n = g.len();
    let mut best = 2usize;
    for subset in 1u32..(1 << n) {
        if subset & need == need {
            let size = subset.count_ones() as usize;
            if size > best && is_clique(&masks, subset) {
                best = size;
            }
        }
    }
    best
}

/// Edge clique numbers for every edge in one sweep over all clique subsets.
pub fn all_edge_clique_numbers(g: &BitGraph) -> Vec<((u32, u32), usize)> {
    let masks = adjacency_masks(g);
    let n = g.len();
    let mut best = std::collections::HashMap::new();
    for &(u, v) in &g.edges() {
        best.insert((u, v), 2usize);
    }
    for subset in 1u32..(1 << n) {
        if subset.count_ones() < 3 || !is_clique(&masks, subset) {
            continue;
        }
        let size = subset.count_ones() as usize;
        let members = crate::bitgraph::bits_to_vec(&[subset as u64]);
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let e = best.get_mut(&(members[i], members[j])).unwrap();
                if size > *e {
                    *e = size;
                }
            }
        }
    }
    let mut out: Vec<_> = best.into_iter().collect();
    out.sort_unstable_by_key(|&(e, _)| e);
    out
}

/// Sample mean and standard error of a per-trial count.
fn mean_se(counts: &[u64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Count subsets of `candidates` of size `need` that are cliques under
/// `adjacent`. Candidate counts stay tiny in these models, so plain
/// recursion over the candidate list is fine.
fn count_cliques_among(
    candidates: &[usize],
    need: usize,
    adjacent: &dyn Fn(usize, usize) -> bool,
) -> u64 {
    fn rec(
        candidates: &[usize],
        start: usize,
        chosen: &mut Vec<usize>,
        need: usize,
        adjacent: &dyn Fn(usize, usize) -> bool,
    ) -> u64 {
        if chosen.len() == need {
            return 1;
        }
        let mut total = 0;
        for i in start..candidates.len() {
            let v = candidates[i];
            if chosen.iter().all(|&u| adjacent(u, v)) {
                chosen.push(v);
                total += rec(candidates, i + 1, chosen, need, adjacent);
                chosen.pop();
            }
        }
        total
    }
    rec(candidates, 0, &mut Vec::new(), need, adjacent)
}

/// Simulate the block-insertion model: blocks are cliques whose internal
/// edges survive deletion with probability 1-p, every other pair involving
/// block vertices (u/v spokes, cross-block pairs) is inserted with
/// probability q, and the edge uv itself is conditioned present. Returns the
/// sample mean and standard error of the number of uv-cliques of size k+2
/// over `trials` runs.
pub fn mc_block_insertion_expectation(
    block_sizes: &[u64],
    k: usize,
    q: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u64 = block_sizes.iter().sum();
    let total = total as usize;
    // block id per vertex
    let mut block_of = Vec::with_capacity(total);
    for (b, &sz) in block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(sz as usize));
    }
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        // candidates: block vertices with both spokes inserted
        let candidates: Vec<usize> = (0..total)
            .filter(|_| {
                let to_u = rng.gen::<f64>() < q;
                let to_v = rng.gen::<f64>() < q;
                to_u && to_v
            })
            .collect();
        if candidates.len() < k {
            counts.push(0);
            continue;
        }
        // materialize pairwise adjacency among candidates once per trial
        let m = candidates.len();
        let mut adj = vec![false; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (candidates[i], candidates[j]);
                let present = if block_of[a] == block_of[b] {
                    rng.gen::<f64>() < 1.0 - p
                } else {
                    rng.gen::<f64>() < q
                };
                adj[i * m + j] = present;
                adj[j * m + i] = present;
            }
        }
        let idx: Vec<usize> = (0..m).collect();
        let adjacent = |a: usize, b: usize| adj[a * m + b];
        counts.push(count_cliques_among(&idx, k, &adjacent));
    }
    mean_se(&counts)
}

/// Simulate the two-ball model: the balls around u and v are cliques (u and
/// v included) whose internal edges survive with probability 1-p; cross
/// pairs are inserted with probability q except uv, which is conditioned
/// present. Returns mean and standard error of the uv-clique count of size
/// k~+2.
pub fn mc_two_ball_expectation(
    nu: usize,
    nv: usize,
    k_tilde: usize,
    q: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // vertices 0..nu-1 in u's ball, nu..nu+nv-1 in v's ball (u, v implicit)
    let u_side = nu - 1;
    let total = u_side + (nv - 1);
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        // candidate = adjacent to both u and v after perturbation
        // edge to the same-ball endpoint survives deletion; edge to the far
        // endpoint must be inserted
        let candidates: Vec<usize> = (0..total)
            .filter(|_| {
                let same = rng.gen::<f64>() < 1.0 - p;
                let cross = rng.gen::<f64>() < q;
                same && cross
            })
            .collect();
        if candidates.len() < k_tilde {
            counts.push(0);
            continue;
        }
        let m = candidates.len();
        let mut adj = vec![false; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (candidates[i], candidates[j]);
                let same_ball = (a < u_side) == (b < u_side);
                let present = if same_ball {
                    rng.gen::<f64>() < 1.0 - p
                } else {
                    rng.gen::<f64>() < q
                };
                adj[i * m + j] = present;
                adj[j * m + i] = present;
            }
        }
        let idx: Vec<usize> = (0..m).collect();
        let adjacent = |a: usize, b: usize| adj[a * m + b];
        counts.push(count_cliques_among(&idx, k_tilde, &adjacent));
    }
    mean_se(&counts)
}
