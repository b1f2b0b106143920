//! Bitset adjacency matrix, the working representation for clique search,
//! edge classification and BFS.

/// Undirected simple graph over vertices `0..n` stored as a row-major bitset
/// adjacency matrix. No self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitGraph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitGraph {
            n,
            words,
            rows: vec![0u64; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = BitGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn add_edge(&mut self, u: u32, v: u32) {
        debug_assert!(u != v, "self-loops never exist");
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn remove_edge(&mut self, u: u32, v: u32) {
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] &= !(1 << (v % 64));
        self.rows[v * self.words + u / 64] &= !(1 << (u % 64));
    }

    #[inline]
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: u32) -> &[u64] {
        let u = u as usize;
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, u: u32) -> Vec<u32> {
        bits_to_vec(self.row(u))
    }

    /// Common neighbors of `u` and `v` (excluding `u` and `v` themselves,
    /// which can never be self-adjacent).
    pub fn common_neighbors(&self, u: u32, v: u32) -> Vec<u32> {
        let ru = self.row(u);
        let rv = self.row(v);
        let mut out = Vec::new();
        for w in 0..self.words {
            let mut bits = ru[w] & rv[w];
            while bits != 0 {
                let b = bits.trailing_zeros();
                out.push((w as u32) * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        let total: usize = self
            .rows
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        total / 2
    }

    /// Sorted edge list with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n as u32 {
            for v in self.neighbors(u) {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Induced subgraph on `vertices` (in the given order). Vertex `i` of the
    /// result corresponds to `vertices[i]`.
    pub fn induced(&self, vertices: &[u32]) -> BitGraph {
        let m = vertices.len();
        let mut g = BitGraph::new(m);
        for i in 0..m {
            for j in (i + 1)..m {
                if self.has_edge(vertices[i], vertices[j]) {
                    g.add_edge(i as u32, j as u32);
                }
            }
        }
        g
    }

    /// Adjacency lists, sorted; handy for BFS.
    pub fn adjacency_lists(&self) -> Vec<Vec<u32>> {
        (0..self.n as u32).map(|u| self.neighbors(u)).collect()
    }
}

pub(crate) fn bits_to_vec(row: &[u64]) -> Vec<u32> {
    let mut out = Vec::new();
    for (w, &word) in row.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros();
            out.push((w as u32) * 64 + b);
            bits &= bits - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_and_neighbors() {
        let g = BitGraph::from_edges(5, &[(0, 1), (1, 2), (3, 1)]);
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
        assert!(!g.has_edge(2, 2));
        assert_eq!(g.neighbors(1), vec![0, 2, 3]);
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2), (1, 3)]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn common_neighbors_and_induced() {
        // triangle 0-1-2 plus pendant 3 on 1
        let g = BitGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (1, 3)]);
        assert_eq!(g.common_neighbors(0, 1), vec![2]);
        let sub = g.induced(&[0, 1, 3]);
        assert!(sub.has_edge(0, 1));
        assert!(sub.has_edge(1, 2)); // (1,3) in original ids
        assert!(!sub.has_edge(0, 2));
    }

    #[test]
    fn crossing_word_boundaries() {
        let mut g = BitGraph::new(200);
        g.add_edge(0, 130);
        g.add_edge(63, 64);
        assert!(g.has_edge(130, 0));
        assert!(g.has_edge(64, 63));
        assert_eq!(g.neighbors(0), vec![130]);
        g.remove_edge(0, 130);
        assert!(!g.has_edge(130, 0));
    }
}
