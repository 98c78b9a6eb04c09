//! Simple undirected graphs on bitset adjacency rows.
//!
//! Rows are `words_per_row` machine words each; vertex `v`'s neighborhood is
//! the bit row `v`. The diagonal is always zero and rows stay symmetric.

use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD_BITS).max(1);
        Graph {
            n,
            words,
            bits: vec![0; n.max(1) * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Graph on `n <= 11` vertices from an edge bitmask in lexicographic
    /// (i < j) pair order; used by the exhaustive enumeration oracle.
    pub fn from_edge_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n * (n - 1) / 2 <= 64);
        let mut g = Graph::empty(n);
        let mut idx = 0;
        for u in 0..n {
            for v in (u + 1)..n {
                if mask >> idx & 1 == 1 {
                    g.add_edge(u, v);
                }
                idx += 1;
            }
        }
        g
    }

    /// Inverse of `from_edge_mask`.
    pub fn edge_mask(&self) -> u64 {
        debug_assert!(self.n * (self.n - 1) / 2 <= 64);
        let mut mask = 0u64;
        let mut idx = 0;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    mask |= 1 << idx;
                }
                idx += 1;
            }
        }
        mask
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n);
        self.bits[u * self.words + v / WORD_BITS] |= 1 << (v % WORD_BITS);
        self.bits[v * self.words + u / WORD_BITS] |= 1 << (u % WORD_BITS);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n);
        self.bits[u * self.words + v / WORD_BITS] &= !(1 << (v % WORD_BITS));
        self.bits[v * self.words + u / WORD_BITS] &= !(1 << (u % WORD_BITS));
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        iter_bits(self.row(v)).collect()
    }

    pub fn is_clique(&self) -> bool {
        self.edge_count() == self.n * (self.n - 1) / 2
    }

    /// Number of unordered neighbor pairs of `v` joined by an edge, i.e. the
    /// number of triangles through `v`.
    pub fn triangles_at(&self, v: usize) -> u64 {
        let vrow = self.row(v);
        let mut count = 0u64;
        for u in iter_bits(vrow) {
            // common neighbors w of u and v with w > u
            let urow = self.row(u);
            let hi_word = u / WORD_BITS;
            for i in hi_word..self.words {
                let mut common = vrow[i] & urow[i];
                if i == hi_word {
                    common &= u64::MAX << (u % WORD_BITS) << 1;
                }
                count += common.count_ones() as u64;
            }
        }
        count
    }

    /// Total number of triangles in the graph.
    pub fn triangle_count(&self) -> u64 {
        (0..self.n).map(|v| self.triangles_at(v)).sum::<u64>() / 3
    }

    /// Edges with one endpoint in `a` and the other in `b`; callers keep the
    /// masks disjoint (double-counts otherwise).
    pub fn cross_edges(&self, a: &[u64], b: &[u64]) -> u64 {
        let mut e = 0u64;
        for v in iter_bits(a) {
            e += self
                .row(v)
                .iter()
                .zip(b.iter())
                .map(|(&r, &m)| (r & m).count_ones() as u64)
                .sum::<u64>();
        }
        e
    }

    /// Edges with both endpoints in `a`, each counted once.
    pub fn inner_edges(&self, a: &[u64]) -> u64 {
        let mut e = 0u64;
        for v in iter_bits(a) {
            e += self
                .row(v)
                .iter()
                .zip(a.iter())
                .map(|(&r, &m)| (r & m).count_ones() as u64)
                .sum::<u64>();
        }
        e / 2
    }

    /// Relabel vertices; `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.add_edge(perm[u], perm[v]);
        }
        g
    }
}

/// Iterate set bit positions of a word slice.
pub fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD_BITS + b)
            }
        })
    })
}

/// Mask with the given vertex bits set, sized for a graph on `n` vertices.
pub fn mask_of(n: usize, verts: &[usize]) -> Vec<u64> {
    let words = n.div_ceil(WORD_BITS).max(1);
    let mut m = vec![0u64; words];
    for &v in verts {
        m[v / WORD_BITS] |= 1 << (v % WORD_BITS);
    }
    m
}

pub fn mask_popcount(m: &[u64]) -> usize {
    m.iter().map(|w| w.count_ones() as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_adjacency() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn triangle_counts() {
        let k4 = Graph::complete(4);
        assert_eq!(k4.triangle_count(), 4);
        assert_eq!(k4.triangles_at(0), 3);
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(c5.triangle_count(), 0);
    }

    #[test]
    fn edge_mask_round_trip() {
        for mask in [0u64, 1, 0b101010, 0b111111] {
            let g = Graph::from_edge_mask(4, mask);
            assert_eq!(g.edge_mask(), mask);
        }
    }

    #[test]
    fn cross_and_inner_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let a = mask_of(4, &[0, 1]);
        let b = mask_of(4, &[2, 3]);
        assert_eq!(g.cross_edges(&a, &b), 2);
        assert_eq!(g.inner_edges(&a), 1);
    }
}
