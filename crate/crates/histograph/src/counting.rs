//! Copy counting: rooted injections, F-degree vectors, subgraph densities,
//! and extremal counts in the complete graph.
//!
//! All copies are non-induced. A copy of H in G is an orbit of edge-preserving
//! injections V(H) -> V(G) under Aut(H); a copy rooted at v fixes the root's
//! image and quotients by root-fixing automorphisms only. Counts are exact:
//! the backtracking accumulates in u128 and the public API returns big
//! integers, with densities converted to f64 only at the boundary.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph::{Graph, WORD_BITS};
use crate::pattern::RootedPattern;

/// Per-vertex rooted copy counts together with the complete-graph normalizer.
#[derive(Clone, Debug)]
pub struct FDegreeVector {
    pub raw_degrees: Vec<BigUint>,
    pub b_max: BigUint,
}

impl FDegreeVector {
    /// Normalized degrees raw / b_max as f64 atoms in [0, 1].
    pub fn normalized(&self) -> Vec<f64> {
        self.raw_degrees
            .iter()
            .map(|d| {
                Ratio::new(d.clone(), self.b_max.clone())
                    .to_f64()
                    .expect("ratio fits in f64")
            })
            .collect()
    }
}

/// Count edge-preserving injections of `f` into `g` with the root mapped to
/// `v`, without any automorphism quotient.
pub fn injections_rooted(g: &Graph, f: &RootedPattern, v: usize) -> u128 {
    let plan = Plan::new(&f.graph, Some(f.root));
    plan.count(g, Some(v))
}

/// Count all edge-preserving injections of `h` into `g`.
pub fn injections_total(g: &Graph, h: &Graph) -> u128 {
    let plan = Plan::new(h, None);
    plan.count(g, None)
}

/// Static placement plan for a pattern: vertex order plus, per position, the
/// earlier positions it is adjacent to.
struct Plan {
    order: Vec<usize>,
    earlier_nbrs: Vec<Vec<usize>>, // indices into `order`
}

impl Plan {
    fn new(h: &Graph, root: Option<usize>) -> Plan {
        let n = h.n();
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        if let Some(r) = root {
            order.push(r);
            placed[r] = true;
        }
        while order.len() < n {
            let next = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let attached = h.neighbors(v).iter().filter(|&&u| placed[u]).count();
                    (attached, h.degree(v), std::cmp::Reverse(v))
                })
                .unwrap();
            order.push(next);
            placed[next] = true;
        }
        let earlier_nbrs = order
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                (0..pos)
                    .filter(|&p| h.has_edge(v, order[p]))
                    .collect::<Vec<_>>()
            })
            .collect();
        Plan {
            order,
            earlier_nbrs,
        }
    }

    fn count(&self, g: &Graph, root_image: Option<usize>) -> u128 {
        let n = g.n();
        let r = self.order.len();
        if r > n {
            return 0;
        }
        let words = g.words_per_row();
        let mut used = vec![0u64; words];
        let mut images = vec![0usize; r];
        let mut cand = vec![0u64; words * r];

        fn rec(
            g: &Graph,
            plan: &Plan,
            depth: usize,
            used: &mut [u64],
            images: &mut [usize],
            cand: &mut [u64],
            root_image: Option<usize>,
        ) -> u128 {
            let r = plan.order.len();
            if depth == r {
                return 1;
            }
            let words = g.words_per_row();
            let n = g.n();
            // candidate bitset for this depth
            let (head, tail) = cand.split_at_mut(words);
            if depth == 0 {
                if let Some(v) = root_image {
                    head.fill(0);
                    head[v / WORD_BITS] |= 1 << (v % WORD_BITS);
                } else {
                    head.fill(u64::MAX);
                    let extra = words * WORD_BITS - n;
                    if extra > 0 {
                        head[words - 1] = u64::MAX >> extra;
                    }
                }
            } else {
                let nbrs = &plan.earlier_nbrs[depth];
                if let Some(&first) = nbrs.first() {
                    head.copy_from_slice(g.row(images[first]));
                    for &p in &nbrs[1..] {
                        for (c, w) in head.iter_mut().zip(g.row(images[p])) {
                            *c &= w;
                        }
                    }
                } else {
                    head.fill(u64::MAX);
                    let extra = words * WORD_BITS - n;
                    if extra > 0 {
                        head[words - 1] = u64::MAX >> extra;
                    }
                }
            }
            for (c, u) in head.iter_mut().zip(used.iter()) {
                *c &= !u;
            }
            if depth + 1 == r {
                return head.iter().map(|w| w.count_ones() as u128).sum();
            }
            let mut total = 0u128;
            for wi in 0..words {
                let mut w = head[wi];
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let v = wi * WORD_BITS + b;
                    used[wi] |= 1 << b;
                    images[depth] = v;
                    total += rec(g, plan, depth + 1, used, images, tail, root_image);
                    used[wi] &= !(1 << b);
                }
            }
            total
        }

        rec(g, self, 0, &mut used, &mut images, &mut cand, root_image)
    }
}

/// Is `f` the m-fold root merge of a rooted triangle? Returns `m` if so.
/// Structure: odd vertex count 2m+1, root adjacent to everything, and the
/// root-deleted graph is a perfect matching on the wings.
pub fn detect_triangle_power(f: &RootedPattern) -> Option<usize> {
    let r = f.r();
    if r < 3 || r % 2 == 0 {
        return None;
    }
    let m = (r - 1) / 2;
    if f.graph.degree(f.root) != 2 * m {
        return None;
    }
    if f.graph.edge_count() != 3 * m {
        return None;
    }
    for v in 0..r {
        if v != f.root && f.graph.degree(v) != 2 {
            return None;
        }
    }
    // every non-root vertex: exactly one non-root neighbor, and that pairing
    // is an involution (perfect matching)
    for v in 0..r {
        if v == f.root {
            continue;
        }
        let others: Vec<usize> = f
            .graph
            .neighbors(v)
            .into_iter()
            .filter(|&u| u != f.root)
            .collect();
        if others.len() != 1 || !f.graph.has_edge(others[0], v) {
            return None;
        }
    }
    Some(m)
}

/// Rooted copy counts of the triangle power F^m at every vertex, via matching
/// counts of the neighborhood-induced subgraph. Supports m <= 3.
pub fn triangle_power_degrees(g: &Graph, m: usize) -> Result<Vec<u128>> {
    if !(1..=3).contains(&m) {
        return Err(Error::validation(
            "triangle-power fast path supports m in 1..=3",
        ));
    }
    let n = g.n();
    let count_at = |v: usize| -> u128 {
        let vrow = g.row(v);
        let nbrs: Vec<usize> = crate::graph::iter_bits(vrow).collect();
        // degrees within H = G[N(v)]
        let deg: Vec<u64> = nbrs
            .iter()
            .map(|&u| {
                g.row(u)
                    .iter()
                    .zip(vrow.iter())
                    .map(|(&a, &b)| (a & b).count_ones() as u64)
                    .sum()
            })
            .collect();
        let e: u128 = deg.iter().map(|&d| d as u128).sum::<u128>() / 2;
        if m == 1 {
            return e;
        }
        let p2: u128 = deg.iter().map(|&d| choose2(d as u128)).sum();
        if m == 2 {
            return choose2(e) - p2;
        }
        // m = 3: independent triples of edges in H.
        // C(E,3) - P2*(E-2) + P2(L(H)) - (triangles(H) + sum C(d,3))
        let mut p2l: i128 = 0;
        let mut tri3: i128 = 0; // 3 * triangles(H)
        for (i, &u) in nbrs.iter().enumerate() {
            // common neighbors within H for each H-edge (u, w), w later in list
            for (j, &w) in nbrs.iter().enumerate().skip(i + 1) {
                if !g.has_edge(u, w) {
                    continue;
                }
                let dl = deg[i] as i128 + deg[j] as i128 - 2;
                p2l += dl * (dl - 1) / 2;
                let common: u64 = g
                    .row(u)
                    .iter()
                    .zip(g.row(w))
                    .zip(vrow.iter())
                    .map(|((&a, &b), &c)| (a & b & c).count_ones() as u64)
                    .sum();
                tri3 += common as i128;
            }
        }
        let tl: i128 = tri3 / 3 + deg.iter().map(|&d| choose3(d as i128)).sum::<i128>();
        let e = e as i128;
        let m3 = choose3(e) - (p2 as i128) * (e - 2) + p2l - tl;
        debug_assert!(m3 >= 0);
        m3 as u128
    };
    if n >= 64 {
        Ok((0..n).into_par_iter().map(count_at).collect())
    } else {
        Ok((0..n).map(count_at).collect())
    }
}

fn choose2(x: u128) -> u128 {
    x * x.saturating_sub(1) / 2
}

fn choose3(x: i128) -> i128 {
    if x < 3 {
        0
    } else {
        x * (x - 1) * (x - 2) / 6
    }
}

/// Rooted copy counts of `f` at every vertex of `g`: injections with the root
/// pinned, divided by the root-fixing automorphism count.
pub fn rooted_copy_counts(g: &Graph, f: &RootedPattern) -> Result<FDegreeVector> {
    if f.r() > g.n() {
        return Err(Error::validation(format!(
            "pattern on {} vertices does not fit in graph on {}",
            f.r(),
            g.n()
        )));
    }
    let raw: Vec<u128> = if let Some(m) = detect_triangle_power(f).filter(|&m| m <= 3) {
        triangle_power_degrees(g, m)?
    } else {
        let count_at = |v: usize| injections_rooted(g, f, v) / f.root_aut_count as u128;
        if g.n() >= 64 {
            (0..g.n()).into_par_iter().map(count_at).collect()
        } else {
            (0..g.n()).map(count_at).collect()
        }
    };
    let (b_max, _) = extremal_counts(f, g.n())?;
    let raw_degrees: Vec<BigUint> = raw.into_iter().map(BigUint::from).collect();
    debug_assert!(raw_degrees.iter().all(|d| *d <= b_max));
    Ok(FDegreeVector { raw_degrees, b_max })
}

/// Unlabeled copies of `f` in `g`, summed from rooted counts:
/// copies = sum_v rooted(v) * root_aut / aut.
pub fn copies_via_rooted(g: &Graph, f: &RootedPattern) -> Result<BigUint> {
    let fd = rooted_copy_counts(g, f)?;
    let total: BigUint = fd.raw_degrees.iter().sum();
    let scaled = total * BigUint::from(f.root_aut_count);
    let aut = BigUint::from(f.aut_count);
    debug_assert!((scaled.clone() % &aut).is_zero());
    Ok(scaled / aut)
}

/// Unlabeled copies of `h` in `g` (injections / |Aut(h)|).
pub fn copies_of(g: &Graph, h: &Graph) -> Result<BigUint> {
    let aut = crate::pattern::automorphism_count(h, None)?;
    let inj = injections_total(g, h);
    debug_assert_eq!(inj % aut as u128, 0);
    Ok(BigUint::from(inj / aut as u128))
}

/// b_max: rooted copies of `f` at a vertex of K_n; c_complete: copies of the
/// pattern graph in K_n. Exact big-integer arithmetic.
pub fn extremal_counts(f: &RootedPattern, n: usize) -> Result<(BigUint, BigUint)> {
    if n < f.r() {
        return Err(Error::validation(format!(
            "need n >= r, got n = {n}, r = {}",
            f.r()
        )));
    }
    let r = f.r();
    let mut b = BigUint::from(1u32);
    for i in 1..r {
        b *= BigUint::from(n - i);
    }
    let root_aut = BigUint::from(f.root_aut_count);
    debug_assert!((b.clone() % &root_aut).is_zero());
    let b_max = b / root_aut;

    let mut c = BigUint::from(1u32);
    for i in 0..r {
        c *= BigUint::from(n - i);
    }
    let aut = BigUint::from(f.aut_count);
    debug_assert!((c.clone() % &aut).is_zero());
    let c_complete = c / aut;
    Ok((b_max, c_complete))
}

/// Copies of `h` in the complete graph on `n` vertices.
pub fn complete_copies(h: &Graph, n: usize) -> Result<BigUint> {
    let aut = crate::pattern::automorphism_count(h, None)?;
    let mut c = BigUint::from(1u32);
    for i in 0..h.n() {
        c *= BigUint::from(n - i);
    }
    Ok(c / BigUint::from(aut))
}

/// Non-induced subgraph density t(G, H) = copies of H in G over copies in K_n.
pub fn subgraph_density(g: &Graph, h: &Graph) -> Result<f64> {
    if h.n() > g.n() {
        return Err(Error::validation("pattern larger than host graph"));
    }
    let num = copies_of(g, h)?;
    let den = complete_copies(h, g.n())?;
    Ok(Ratio::new(num, den).to_f64().expect("density fits in f64"))
}

/// Density of the rooted pattern's m-th merge power, computed through rooted
/// counts (fast for triangle powers).
pub fn merge_power_density(g: &Graph, f: &RootedPattern, m: usize) -> Result<f64> {
    let fm = f.merge_at_root(m)?;
    let num = copies_via_rooted(g, &fm)?;
    let den = complete_copies(fm.unrooted(), g.n())?;
    Ok(Ratio::new(num, den).to_f64().expect("density fits in f64"))
}

/// Empirical distribution of normalized F-degrees; atoms in [0, 1], mass 1/n
/// each.
pub fn f_degree_distribution(g: &Graph, f: &RootedPattern) -> Result<Distribution> {
    let fd = rooted_copy_counts(g, f)?;
    Distribution::empirical(fd.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pattern(name: &str) -> RootedPattern {
        RootedPattern::named(name).unwrap()
    }

    fn random_graph(n: usize, p: f64, rng: &mut StdRng) -> Graph {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    #[test]
    fn rooted_edge_is_degree_sequence() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let fd = rooted_copy_counts(&g, &pattern("edge")).unwrap();
        let got: Vec<u64> = fd
            .raw_degrees
            .iter()
            .map(|d| d.try_into().unwrap())
            .collect();
        assert_eq!(got, vec![3, 2, 3, 2]);
    }

    #[test]
    fn rooted_triangle_in_k4() {
        let fd = rooted_copy_counts(&Graph::complete(4), &pattern("triangle")).unwrap();
        let got: Vec<u64> = fd
            .raw_degrees
            .iter()
            .map(|d| d.try_into().unwrap())
            .collect();
        assert_eq!(got, vec![3, 3, 3, 3]);
    }

    #[test]
    fn rooted_path_in_k3() {
        // path v-a-b rooted at the end v; in K_3 each vertex roots 2 copies
        let fd = rooted_copy_counts(&Graph::complete(3), &pattern("path3")).unwrap();
        let got: Vec<u64> = fd
            .raw_degrees
            .iter()
            .map(|d| d.try_into().unwrap())
            .collect();
        assert_eq!(got, vec![2, 2, 2]);
    }

    #[test]
    fn extremal_counts_cliques() {
        let (b, c) = extremal_counts(&pattern("triangle"), 4).unwrap();
        assert_eq!(u64::try_from(&b).unwrap(), 3); // C(3, 2)
        assert_eq!(u64::try_from(&c).unwrap(), 4); // triangles of K_4
        let (_, c_edge) = extremal_counts(&pattern("edge"), 10).unwrap();
        assert_eq!(u64::try_from(&c_edge).unwrap(), 45);
    }

    #[test]
    fn density_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(subgraph_density(&Graph::complete(7), &k3).unwrap(), 1.0);
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(subgraph_density(&c5, &k3).unwrap(), 0.0);
        let mut k4_minus = Graph::complete(4);
        k4_minus.remove_edge(0, 1);
        assert_eq!(subgraph_density(&k4_minus, &k3).unwrap(), 0.5);
    }

    #[test]
    fn density_in_complete_graph_is_one() {
        for name in ["edge", "triangle", "k4", "path3", "star3"] {
            let h = pattern(name).graph;
            for n in h.n()..=9 {
                let d = subgraph_density(&Graph::complete(n), &h).unwrap();
                assert_eq!(d, 1.0, "{name} at n = {n}");
            }
        }
    }

    #[test]
    fn point_mass_distributions() {
        let d = f_degree_distribution(&Graph::complete(4), &pattern("triangle")).unwrap();
        assert_eq!(d.ks_distance(&Distribution::point_mass(1.0)), 0.0);
        let e = f_degree_distribution(&Graph::empty(5), &pattern("triangle")).unwrap();
        assert_eq!(e.ks_distance(&Distribution::point_mass(0.0)), 0.0);
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let f = f_degree_distribution(&c5, &pattern("edge")).unwrap();
        assert_eq!(f.ks_distance(&Distribution::point_mass(0.5)), 0.0);
    }

    #[test]
    fn rooted_sum_matches_triangle_enumeration() {
        // sum_v rooted-triangle-count(v) = 3 * (#triangles), against a brute
        // triple loop, on 500 random graphs
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..500 {
            let n = rng.gen_range(3..=30);
            let p = rng.gen_range(0.05..0.95);
            let g = random_graph(n, p, &mut rng);
            let mut brute = 0u64;
            for a in 0..n {
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        if g.has_edge(a, b) && g.has_edge(a, c) && g.has_edge(b, c) {
                            brute += 1;
                        }
                    }
                }
            }
            let fd = rooted_copy_counts(&g, &pattern("triangle")).unwrap();
            let total: u64 = fd
                .raw_degrees
                .iter()
                .map(|d| u64::try_from(d).unwrap())
                .sum();
            assert_eq!(total, 3 * brute, "trial {trial}");
        }
    }

    #[test]
    fn triangle_power_fast_path_matches_generic() {
        let mut rng = StdRng::seed_from_u64(11);
        let tri = pattern("triangle");
        for m in 1..=3usize {
            let fm = tri.merge_at_root(m).unwrap();
            for _ in 0..20 {
                let n = rng.gen_range(fm.r()..=14);
                let g = random_graph(n, rng.gen_range(0.2..0.9), &mut rng);
                let fast = triangle_power_degrees(&g, m).unwrap();
                for v in 0..n {
                    let generic = injections_rooted(&g, &fm, v) / fm.root_aut_count as u128;
                    assert_eq!(fast[v], generic, "m = {m}, v = {v}");
                }
            }
        }
    }

    #[test]
    fn detect_triangle_power_works() {
        let tri = pattern("triangle");
        for m in 1..=3 {
            let fm = tri.merge_at_root(m).unwrap();
            assert_eq!(detect_triangle_power(&fm), Some(m));
        }
        assert_eq!(detect_triangle_power(&pattern("path3")), None);
        assert_eq!(detect_triangle_power(&pattern("star3")), None);
        assert_eq!(detect_triangle_power(&pattern("edge")), None);
    }

    #[test]
    fn monotone_under_edge_addition() {
        // adding an edge never decreases a non-induced density
        let mut rng = StdRng::seed_from_u64(3);
        let k3 = Graph::complete(3);
        for _ in 0..500 {
            let n = rng.gen_range(4..=12);
            let mut g = random_graph(n, 0.4, &mut rng);
            let before = subgraph_density(&g, &k3).unwrap();
            let (u, v) = loop {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v && !g.has_edge(u, v) {
                    break (u, v);
                }
                if g.edge_count() == n * (n - 1) / 2 {
                    break (0, 1);
                }
            };
            if g.has_edge(u, v) {
                continue;
            }
            g.add_edge(u, v);
            let after = subgraph_density(&g, &k3).unwrap();
            assert!(after >= before);
        }
    }
}
