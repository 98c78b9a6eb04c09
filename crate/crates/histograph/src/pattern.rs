//! Rooted patterns: a small graph with a designated root vertex, plus exact
//! automorphism counts used to turn injection counts into copy counts.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Hard limit for the exhaustive automorphism search.
pub const AUT_SEARCH_CAP: usize = 16;
/// Documented cap for the standalone automorphism operation.
pub const AUT_OP_CAP: usize = 12;
/// Default cap on merged-pattern size.
pub const MERGE_VERTEX_CAP: usize = 16;

#[derive(Clone, Debug)]
pub struct RootedPattern {
    pub graph: Graph,
    pub root: usize,
    /// |Aut(F)|
    pub aut_count: u64,
    /// Number of automorphisms fixing the root.
    pub root_aut_count: u64,
}

impl RootedPattern {
    pub fn new(graph: Graph, root: usize) -> Result<Self> {
        let r = graph.n();
        if r == 0 || root >= r {
            return Err(Error::validation(format!(
                "root {root} out of range for pattern on {r} vertices"
            )));
        }
        if r > AUT_SEARCH_CAP {
            return Err(Error::cap(format!(
                "pattern on {r} vertices exceeds automorphism search cap {AUT_SEARCH_CAP}"
            )));
        }
        let aut_count = automorphism_search(&graph, None);
        let root_aut_count = automorphism_search(&graph, Some(root));
        Ok(RootedPattern {
            graph,
            root,
            aut_count,
            root_aut_count,
        })
    }

    pub fn r(&self) -> usize {
        self.graph.n()
    }

    /// Merge `m` disjoint copies at the root: the pattern F^m on
    /// 1 + m(r-1) vertices. `m = 1` returns a clone of `self`.
    pub fn merge_at_root(&self, m: usize) -> Result<RootedPattern> {
        self.merge_at_root_capped(m, MERGE_VERTEX_CAP)
    }

    pub fn merge_at_root_capped(&self, m: usize, cap: usize) -> Result<RootedPattern> {
        if m == 0 {
            return Err(Error::validation("merge multiplicity must be >= 1"));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let r = self.r();
        let merged_n = 1 + m * (r - 1);
        if merged_n > cap {
            return Err(Error::cap(format!(
                "merged pattern would have {merged_n} vertices, cap is {cap}"
            )));
        }
        // Vertex 0 is the joint root; copy i occupies 1 + i(r-1) .. 1 + (i+1)(r-1).
        let mut g = Graph::empty(merged_n);
        // map of non-root pattern vertices to 0..r-2 (their order within a wing)
        let wing_index: Vec<Option<usize>> = {
            let mut idx = 0;
            (0..r)
                .map(|v| {
                    if v == self.root {
                        None
                    } else {
                        let i = idx;
                        idx += 1;
                        Some(i)
                    }
                })
                .collect()
        };
        for copy in 0..m {
            let base = 1 + copy * (r - 1);
            for (u, v) in self.graph.edges() {
                let mu = wing_index[u].map(|i| base + i).unwrap_or(0);
                let mv = wing_index[v].map(|i| base + i).unwrap_or(0);
                g.add_edge(mu, mv);
            }
        }
        RootedPattern::new(g, 0)
    }

    /// Built-in named patterns. Roots: edge at an endpoint, cliques anywhere
    /// (vertex-transitive), path3 at an endpoint, star3 at the center.
    pub fn named(name: &str) -> Result<RootedPattern> {
        let (g, root) = match name {
            "edge" | "k2" => (Graph::from_edges(2, &[(0, 1)])?, 0),
            "triangle" | "k3" => (Graph::complete(3), 0),
            "k4" => (Graph::complete(4), 0),
            "path3" => (Graph::from_edges(3, &[(0, 1), (1, 2)])?, 0),
            "cherry" => (Graph::from_edges(3, &[(0, 1), (1, 2)])?, 1),
            "star3" => (Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)])?, 0),
            _ => {
                return Err(Error::validation(format!(
                    "unknown pattern name '{name}' (try edge, triangle, k4, path3, cherry, star3)"
                )))
            }
        };
        RootedPattern::new(g, root)
    }

    /// The pattern's graph treated as an unrooted graph.
    pub fn unrooted(&self) -> &Graph {
        &self.graph
    }
}

/// |Aut(H)|, or the number of automorphisms fixing `fixed_root`, by exhaustive
/// backtracking with degree and neighbor-degree pruning. Errors above the
/// documented operation cap.
pub fn automorphism_count(h: &Graph, fixed_root: Option<usize>) -> Result<u64> {
    if h.n() > AUT_OP_CAP {
        return Err(Error::cap(format!(
            "automorphism count supports at most {AUT_OP_CAP} vertices, got {}",
            h.n()
        )));
    }
    Ok(automorphism_search(h, fixed_root))
}

/// Internal search without the public cap; `RootedPattern::new` uses it for
/// merged patterns up to `AUT_SEARCH_CAP` vertices.
///
/// Twin classes (vertices with identical neighborhoods outside the pair) are
/// compressed first: any within-class permutation is an automorphism, and
/// the full group factors as the product of class symmetric groups times the
/// label-preserving automorphisms of the compressed graph. This keeps highly
/// symmetric patterns (stars, merged wings) out of factorial enumeration.
fn automorphism_search(h: &Graph, fixed_root: Option<usize>) -> u64 {
    let n = h.n();
    if n == 0 {
        return 1;
    }
    // twin classes: u ~ v iff N(u) \ {v} == N(v) \ {u}
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for u in 0..n {
        if class_of[u] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[u] = id;
        let mut members = vec![u];
        for v in (u + 1)..n {
            if class_of[v] == usize::MAX && twins(h, u, v) {
                class_of[v] = id;
                members.push(v);
            }
        }
        classes.push(members);
    }
    // compressed graph on classes, labeled by (size, within-class adjacency)
    let c = classes.len();
    let mut cg = Graph::empty(c);
    for a in 0..c {
        for b in (a + 1)..c {
            if h.has_edge(classes[a][0], classes[b][0]) {
                cg.add_edge(a, b);
            }
        }
    }
    let labels: Vec<(usize, bool)> = classes
        .iter()
        .map(|m| (m.len(), m.len() > 1 && h.has_edge(m[0], m[1])))
        .collect();

    // within-class factor; fixing the root pins one member of its class
    let mut within: u64 = 1;
    for (id, members) in classes.iter().enumerate() {
        let mut size = members.len() as u64;
        if fixed_root.map(|r| class_of[r] == id) == Some(true) {
            size -= 1;
        }
        within *= factorial(size);
    }
    let fixed_class = fixed_root.map(|r| class_of[r]);
    within * compressed_aut_count(&cg, &labels, fixed_class)
}

fn twins(h: &Graph, u: usize, v: usize) -> bool {
    let words = h.words_per_row();
    let (ru, rv) = (h.row(u), h.row(v));
    for i in 0..words {
        let mut a = ru[i];
        let mut b = rv[i];
        // ignore the u and v bits on both sides
        for &x in &[u, v] {
            if x / 64 == i {
                a &= !(1 << (x % 64));
                b &= !(1 << (x % 64));
            }
        }
        if a != b {
            return false;
        }
    }
    true
}

fn factorial(n: u64) -> u64 {
    (1..=n).product::<u64>().max(1)
}

/// Label-preserving automorphisms of the compressed class graph by
/// exhaustive backtracking; compressed graphs of our patterns are small.
fn compressed_aut_count(h: &Graph, labels: &[(usize, bool)], fixed: Option<usize>) -> u64 {
    let n = h.n();
    let degs: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    let sig: Vec<(usize, bool, usize, Vec<usize>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<usize> = h.neighbors(v).iter().map(|&u| degs[u]).collect();
            nd.sort_unstable();
            (labels[v].0, labels[v].1, degs[v], nd)
        })
        .collect();
    let order = search_order(h, fixed);
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut count = 0u64;
    backtrack(h, &sig, &order, 0, &mut image, &mut used, fixed, &mut count);
    count
}

fn search_order(h: &Graph, seed: Option<usize>) -> Vec<usize> {
    let n = h.n();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    if let Some(s) = seed {
        order.push(s);
        placed[s] = true;
    }
    while order.len() < n {
        // next vertex with the most placed neighbors, ties by degree
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let attached = h.neighbors(v).iter().filter(|&&u| placed[u]).count();
                (attached, h.degree(v))
            })
            .unwrap();
        order.push(next);
        placed[next] = true;
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn backtrack<S: PartialEq>(
    h: &Graph,
    sig: &[S],
    order: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut [bool],
    fixed_root: Option<usize>,
    count: &mut u64,
) {
    if depth == order.len() {
        *count += 1;
        return;
    }
    let v = order[depth];
    let candidates: Vec<usize> = if Some(v) == fixed_root {
        vec![v]
    } else {
        (0..h.n())
            .filter(|&w| !used[w] && sig[w] == sig[v])
            .collect()
    };
    'cand: for w in candidates {
        if used[w] {
            continue;
        }
        // adjacency with already-placed vertices must match exactly
        for &p in &order[..depth] {
            if h.has_edge(v, p) != h.has_edge(w, image[p]) {
                continue 'cand;
            }
        }
        image[v] = w;
        used[w] = true;
        backtrack(h, sig, order, depth + 1, image, used, fixed_root, count);
        used[w] = false;
        image[v] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aut_counts_small() {
        assert_eq!(automorphism_count(&Graph::complete(2), None).unwrap(), 2);
        assert_eq!(automorphism_count(&Graph::complete(3), None).unwrap(), 6);
        let path3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(automorphism_count(&path3, None).unwrap(), 2);
        // bowtie: two triangles sharing one vertex
        let bowtie =
            Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        assert_eq!(automorphism_count(&bowtie, None).unwrap(), 8);
    }

    #[test]
    fn aut_counts_fixed_root() {
        assert_eq!(automorphism_count(&Graph::complete(3), Some(0)).unwrap(), 2);
        let path3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(automorphism_count(&path3, Some(0)).unwrap(), 1);
        assert_eq!(automorphism_count(&path3, Some(1)).unwrap(), 2);
    }

    #[test]
    fn aut_cap_enforced() {
        let g = Graph::empty(13);
        assert!(automorphism_count(&g, None).is_err());
    }

    #[test]
    fn merge_star() {
        // merging m rooted edges gives a star rooted at the center
        let edge = RootedPattern::named("edge").unwrap();
        let star = edge.merge_at_root(3).unwrap();
        assert_eq!(star.r(), 4);
        assert_eq!(star.graph.degree(0), 3);
        assert_eq!(star.aut_count, 6);
        assert_eq!(star.root_aut_count, 6);
    }

    #[test]
    fn merge_triangles_to_bowtie() {
        let tri = RootedPattern::named("triangle").unwrap();
        assert_eq!(tri.aut_count, 6);
        assert_eq!(tri.root_aut_count, 2);
        let bowtie = tri.merge_at_root(2).unwrap();
        assert_eq!(bowtie.r(), 5);
        assert_eq!(bowtie.aut_count, 8);
        assert_eq!(bowtie.root_aut_count, 8);
        assert_eq!(bowtie.graph.triangle_count(), 2);
    }

    #[test]
    fn merge_identity_and_cap() {
        let tri = RootedPattern::named("triangle").unwrap();
        let same = tri.merge_at_root(1).unwrap();
        assert_eq!(same.graph.edges(), tri.graph.edges());
        assert!(tri.merge_at_root(9).is_err()); // 1 + 9*2 = 19 > 16
    }

    #[test]
    fn aut_divides_factorial() {
        for name in ["edge", "triangle", "k4", "path3", "star3"] {
            let p = RootedPattern::named(name).unwrap();
            let fact: u64 = (1..=p.r() as u64).product();
            assert_eq!(fact % p.aut_count, 0, "{name}");
            assert_eq!(p.aut_count % p.root_aut_count, 0, "{name}");
        }
    }

    /// Brute-force oracle: count permutations preserving adjacency outright.
    fn brute_aut(h: &Graph, fixed_root: Option<usize>) -> u64 {
        let n = h.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0u64;
        fn rec(h: &Graph, perm: &mut Vec<usize>, k: usize, root: Option<usize>, count: &mut u64) {
            let n = h.n();
            if k == n {
                if let Some(r) = root {
                    if perm[r] != r {
                        return;
                    }
                }
                for u in 0..n {
                    for v in (u + 1)..n {
                        if h.has_edge(u, v) != h.has_edge(perm[u], perm[v]) {
                            return;
                        }
                    }
                }
                *count += 1;
                return;
            }
            for i in k..n {
                perm.swap(k, i);
                rec(h, perm, k + 1, root, count);
                perm.swap(k, i);
            }
        }
        rec(h, &mut perm, 0, fixed_root, &mut count);
        count
    }

    #[test]
    fn twin_compression_matches_brute_force() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(13);
        for trial in 0..300 {
            let n = rng.gen_range(1..=7);
            let mut g = Graph::empty(n);
            let p = rng.gen_range(0.0..=1.0);
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(p) {
                        g.add_edge(u, v);
                    }
                }
            }
            let root = if n > 0 {
                Some(rng.gen_range(0..n))
            } else {
                None
            };
            assert_eq!(
                automorphism_count(&g, None).unwrap(),
                brute_aut(&g, None),
                "trial {trial}: {g:?}"
            );
            assert_eq!(
                automorphism_count(&g, root).unwrap(),
                brute_aut(&g, root),
                "trial {trial} rooted: {g:?}"
            );
        }
        // highly symmetric shapes that exercise the twin classes directly
        let star9 = RootedPattern::named("edge")
            .unwrap()
            .merge_at_root(9)
            .unwrap();
        assert_eq!(star9.aut_count, (1..=9u64).product::<u64>());
        let tri5 = RootedPattern::named("triangle")
            .unwrap()
            .merge_at_root(5)
            .unwrap();
        assert_eq!(tri5.aut_count, 2u64.pow(5) * (1..=5u64).product::<u64>());
        assert_eq!(tri5.root_aut_count, tri5.aut_count);
    }
}
