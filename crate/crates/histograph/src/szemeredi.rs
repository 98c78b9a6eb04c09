//! Uniform pairs, partitions, partition energy and refinement, and the
//! extraction of Szemerédi types from graphs.
//!
//! A pair (A, B) is eps-uniform when every pair of subsets A' ⊆ A, B' ⊆ B
//! with |A'| >= eps|A|, |B'| >= eps|B| has |d(A', B') - d(A, B)| < eps.
//! A partition C_0 ∪ C_1 ∪ ... ∪ C_k is (k, eps)-uniform when |C_0| < eps n,
//! the other parts share one size, and all but eps * C(k, 2) pairs are
//! eps-uniform. Refining a partition never decreases its energy, and
//! exact-witness refinement of a non-uniform partition gains at least eps^5.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{iter_bits, mask_of, mask_popcount, Graph};

/// Largest part size for the exact (exhaustive-equivalent) uniformity check.
pub const EXACT_UNIFORMITY_CAP: usize = 14;

// ---------------------------------------------------------------------------
// partitions
// ---------------------------------------------------------------------------

/// Vertex partition: `assignment[v] = 0` marks the exceptional set C_0,
/// parts are numbered 1..=k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if assignment.iter().any(|&p| p > k) {
            return Err(Error::validation("part index exceeds k"));
        }
        for part in 1..=k {
            if !assignment.contains(&part) {
                return Err(Error::validation(format!("part {part} is empty")));
            }
        }
        Ok(Partition { assignment, k })
    }

    /// Contiguous equitable partition: k parts of size floor(n/k), remainder
    /// in C_0.
    pub fn contiguous(n: usize, k: usize) -> Self {
        let g = n / k;
        let mut assignment = vec![0usize; n];
        for part in 0..k {
            for v in part * g..(part + 1) * g {
                assignment[v] = part + 1;
            }
        }
        Partition { assignment, k }
    }

    /// Random equitable partition with the same shape as `contiguous`.
    pub fn random(n: usize, k: usize, rng: &mut StdRng) -> Self {
        let mut verts: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            verts.swap(i, j);
        }
        let g = n / k;
        let mut assignment = vec![0usize; n];
        for part in 0..k {
            for &v in &verts[part * g..(part + 1) * g] {
                assignment[v] = part + 1;
            }
        }
        Partition { assignment, k }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Bit masks for parts 0..=k (index 0 is the exceptional set).
    pub fn masks(&self) -> Vec<Vec<u64>> {
        let n = self.n();
        let mut verts: Vec<Vec<usize>> = vec![Vec::new(); self.k + 1];
        for (v, &p) in self.assignment.iter().enumerate() {
            verts[p].push(v);
        }
        verts.into_iter().map(|vs| mask_of(n, &vs)).collect()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k + 1];
        for &p in &self.assignment {
            sizes[p] += 1;
        }
        sizes
    }

    /// Is this a refinement-compatible equitable candidate: parts 1..=k share
    /// one size and |C_0| < eps * n.
    pub fn is_uniform_candidate(&self, eps: f64) -> bool {
        let sizes = self.part_sizes();
        let g = sizes[1];
        sizes[1..].iter().all(|&s| s == g) && (sizes[0] as f64) < eps * self.n() as f64
    }
}

/// Exact pair density d(A, B) = e(A, B) / (|A||B|) for disjoint nonempty
/// vertex sets.
pub fn pair_density(g: &Graph, a: &[u64], b: &[u64]) -> Result<f64> {
    if a.iter().zip(b.iter()).any(|(&x, &y)| x & y != 0) {
        return Err(Error::validation("pair density needs disjoint sets"));
    }
    let (sa, sb) = (mask_popcount(a), mask_popcount(b));
    if sa == 0 || sb == 0 {
        return Err(Error::validation("pair density needs nonempty sets"));
    }
    Ok(g.cross_edges(a, b) as f64 / (sa as f64 * sb as f64))
}

// ---------------------------------------------------------------------------
// uniformity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckMode {
    Exact,
    Heuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub a_sub: Vec<u64>,
    pub b_sub: Vec<u64>,
    pub sub_density: f64,
    pub pair_density: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityVerdict {
    pub uniform: bool,
    pub witness: Option<Witness>,
    pub mode: CheckMode,
}

/// Smallest admissible subset size: least integer s with s >= eps * size.
fn min_subset_size(eps: f64, size: usize) -> usize {
    let mut s = (eps * size as f64).ceil() as usize;
    if s > 0 && (s - 1) as f64 >= eps * size as f64 {
        s -= 1;
    }
    s.max(1)
}

/// Shared deviation predicate: |e'/(a'b') - e/(ab)| >= eps, evaluated with
/// integer products in f64 (exact below 2^53) so the exact checker, the
/// heuristic, and the definitional oracle agree bit for bit.
pub fn density_deviates(
    e_sub: u64,
    a_sub: usize,
    b_sub: usize,
    e: u64,
    a: usize,
    b: usize,
    eps: f64,
) -> bool {
    let lhs = e_sub as f64 * (a as f64 * b as f64) - e as f64 * (a_sub as f64 * b_sub as f64);
    lhs.abs() >= eps * (a_sub as f64 * b_sub as f64) * (a as f64 * b as f64)
}

/// eps-uniformity of the disjoint pair (A, B). Exact mode is definitionally
/// complete and requires both sides at most `EXACT_UNIFORMITY_CAP`; the
/// heuristic can only miss witnesses, never fabricate them (every returned
/// witness is re-validated against the definition).
pub fn uniformity_check(
    g: &Graph,
    a: &[u64],
    b: &[u64],
    eps: f64,
    mode: CheckMode,
) -> Result<UniformityVerdict> {
    let sa = mask_popcount(a);
    let sb = mask_popcount(b);
    if sa == 0 || sb == 0 {
        return Err(Error::validation("uniformity needs nonempty sets"));
    }
    match mode {
        CheckMode::Exact => {
            if sa > EXACT_UNIFORMITY_CAP || sb > EXACT_UNIFORMITY_CAP {
                return Err(Error::cap(format!(
                    "exact uniformity supports parts of size <= {EXACT_UNIFORMITY_CAP}"
                )));
            }
            Ok(uniformity_exact(g, a, b, eps))
        }
        CheckMode::Heuristic => Ok(uniformity_heuristic(g, a, b, eps, 2000, 0xB10C)),
    }
}

/// Exact check. For every subset A' of A, the extreme densities over B'
/// subsets of each admissible size are attained by taking the B vertices
/// with the largest (resp. smallest) back-degree into A'; scanning those
/// prefixes is equivalent to the full 2^|A| * 2^|B| scan.
fn uniformity_exact(g: &Graph, a: &[u64], b: &[u64], eps: f64) -> UniformityVerdict {
    let averts: Vec<usize> = iter_bits(a).collect();
    let bverts: Vec<usize> = iter_bits(b).collect();
    let (sa, sb) = (averts.len(), bverts.len());
    // back-neighbor masks of B vertices into A positions
    let nbr_a: Vec<u32> = bverts
        .iter()
        .map(|&bv| {
            let mut m = 0u32;
            for (i, &av) in averts.iter().enumerate() {
                if g.has_edge(bv, av) {
                    m |= 1 << i;
                }
            }
            m
        })
        .collect();
    let e: u64 = nbr_a.iter().map(|m| m.count_ones() as u64).sum();
    let d = e as f64 / (sa as f64 * sb as f64);
    let min_a = min_subset_size(eps, sa);
    let min_b = min_subset_size(eps, sb);

    let mut order: Vec<usize> = (0..sb).collect();
    for sub in 1u32..(1 << sa) {
        let ssize = sub.count_ones() as usize;
        if ssize < min_a {
            continue;
        }
        let cnt: Vec<u64> = nbr_a
            .iter()
            .map(|m| (m & sub).count_ones() as u64)
            .collect();
        // descending back-degree order, index tie-break for determinism
        order.sort_by(|&x, &y| cnt[y].cmp(&cnt[x]).then(x.cmp(&y)));
        let mut prefix_hi = 0u64;
        let mut prefix_lo = 0u64;
        for s in 1..=sb {
            prefix_hi += cnt[order[s - 1]];
            prefix_lo += cnt[order[sb - s]];
            if s < min_b {
                continue;
            }
            for (e_sub, pick_hi) in [(prefix_hi, true), (prefix_lo, false)] {
                if density_deviates(e_sub, ssize, s, e, sa, sb, eps) {
                    let apick: Vec<usize> = (0..sa)
                        .filter(|i| sub >> i & 1 == 1)
                        .map(|i| averts[i])
                        .collect();
                    let bpick: Vec<usize> = if pick_hi {
                        order[..s].iter().map(|&j| bverts[j]).collect()
                    } else {
                        order[sb - s..].iter().map(|&j| bverts[j]).collect()
                    };
                    let n = g.n();
                    return UniformityVerdict {
                        uniform: false,
                        witness: Some(Witness {
                            a_sub: mask_of(n, &apick),
                            b_sub: mask_of(n, &bpick),
                            sub_density: e_sub as f64 / (ssize as f64 * s as f64),
                            pair_density: d,
                        }),
                        mode: CheckMode::Exact,
                    };
                }
            }
        }
    }
    UniformityVerdict {
        uniform: true,
        witness: None,
        mode: CheckMode::Exact,
    }
}

/// Heuristic check: degree-deviation candidates plus random subset sampling.
/// "Uniform" here only means no witness was found.
fn uniformity_heuristic(
    g: &Graph,
    a: &[u64],
    b: &[u64],
    eps: f64,
    trials: usize,
    salt: u64,
) -> UniformityVerdict {
    let averts: Vec<usize> = iter_bits(a).collect();
    let bverts: Vec<usize> = iter_bits(b).collect();
    let (sa, sb) = (averts.len(), bverts.len());
    let e = g.cross_edges(a, b);
    let d = e as f64 / (sa as f64 * sb as f64);
    let n = g.n();

    let validate = |apick: &[usize], bpick: &[usize]| -> Option<Witness> {
        if apick.len() < min_subset_size(eps, sa) || bpick.len() < min_subset_size(eps, sb) {
            return None;
        }
        let am = mask_of(n, apick);
        let bm = mask_of(n, bpick);
        let e_sub = g.cross_edges(&am, &bm);
        if density_deviates(e_sub, apick.len(), bpick.len(), e, sa, sb, eps) {
            Some(Witness {
                a_sub: am,
                b_sub: bm,
                sub_density: e_sub as f64 / (apick.len() as f64 * bpick.len() as f64),
                pair_density: d,
            })
        } else {
            None
        }
    };

    // vertices whose cross-degree deviates from the pair density
    let mut hi_a = Vec::new();
    let mut lo_a = Vec::new();
    for &v in &averts {
        let deg = g
            .row(v)
            .iter()
            .zip(b.iter())
            .map(|(&r, &m)| (r & m).count_ones() as u64)
            .sum::<u64>();
        if deg as f64 >= (d + eps) * sb as f64 {
            hi_a.push(v);
        }
        if deg as f64 <= (d - eps) * sb as f64 {
            lo_a.push(v);
        }
    }
    let mut hi_b = Vec::new();
    let mut lo_b = Vec::new();
    for &v in &bverts {
        let deg = g
            .row(v)
            .iter()
            .zip(a.iter())
            .map(|(&r, &m)| (r & m).count_ones() as u64)
            .sum::<u64>();
        if deg as f64 >= (d + eps) * sa as f64 {
            hi_b.push(v);
        }
        if deg as f64 <= (d - eps) * sa as f64 {
            lo_b.push(v);
        }
    }
    for (apick, bpick) in [
        (hi_a, bverts.clone()),
        (lo_a, bverts.clone()),
        (averts.clone(), hi_b),
        (averts.clone(), lo_b),
    ] {
        if let Some(w) = validate(&apick, &bpick) {
            return UniformityVerdict {
                uniform: false,
                witness: Some(w),
                mode: CheckMode::Heuristic,
            };
        }
    }

    // seeded random subset sampling
    let mut rng = StdRng::seed_from_u64(salt ^ (e << 1) ^ (sa as u64) ^ ((sb as u64) << 32));
    for _ in 0..trials {
        let pa = rng.gen_range(eps.max(0.05)..=1.0);
        let pb = rng.gen_range(eps.max(0.05)..=1.0);
        let apick: Vec<usize> = averts
            .iter()
            .cloned()
            .filter(|_| rng.gen_bool(pa))
            .collect();
        let bpick: Vec<usize> = bverts
            .iter()
            .cloned()
            .filter(|_| rng.gen_bool(pb))
            .collect();
        if apick.is_empty() || bpick.is_empty() {
            continue;
        }
        if let Some(w) = validate(&apick, &bpick) {
            return UniformityVerdict {
                uniform: false,
                witness: Some(w),
                mode: CheckMode::Heuristic,
            };
        }
    }
    UniformityVerdict {
        uniform: true,
        witness: None,
        mode: CheckMode::Heuristic,
    }
}

// ---------------------------------------------------------------------------
// energy and refinement
// ---------------------------------------------------------------------------

/// Partition energy q(P) = sum over ordered part pairs (i, j) in `[k]^2` of
/// (|C_i||C_j| / n^2) d(C_i, C_j)^2, with the within-part density taken over
/// ordered vertex pairs (d(A, A) = 2 e(A) / |A|^2). Exact rational sum,
/// converted to f64 at the end. C_0 contributes nothing.
pub fn partition_energy(g: &Graph, p: &Partition) -> f64 {
    let masks = p.masks();
    let sizes = p.part_sizes();
    let n2 = BigInt::from(g.n()) * BigInt::from(g.n());
    let mut q = Ratio::<BigInt>::zero();
    for i in 1..=p.k {
        if sizes[i] == 0 {
            continue;
        }
        for j in i..=p.k {
            if sizes[j] == 0 {
                continue;
            }
            let e_ordered: u64 = if i == j {
                2 * g.inner_edges(&masks[i])
            } else {
                g.cross_edges(&masks[i], &masks[j])
            };
            // ordered-pair term: e_o^2 / (|C_i||C_j| n^2), counted twice for i != j
            let mult = if i == j { 1u32 } else { 2u32 };
            let num = BigInt::from(e_ordered) * BigInt::from(e_ordered) * BigInt::from(mult);
            let den = BigInt::from(sizes[i]) * BigInt::from(sizes[j]) * n2.clone();
            q += Ratio::new(num, den);
        }
    }
    q.to_f64().expect("energy fits in f64")
}

#[derive(Clone, Debug, Serialize)]
pub struct RefineOutcome {
    pub partition: Partition,
    pub gained: f64,
    pub pairs_checked: usize,
    pub non_uniform_pairs: usize,
    /// True when every pair was checked in exact mode.
    pub all_exact: bool,
}

/// One refinement step: check all part pairs, split every part by the Venn
/// cells of its non-uniformity witnesses, and report the energy gain (never
/// negative). An already eps-uniform partition comes back unchanged.
pub fn refine_step(g: &Graph, p: &Partition, eps: f64) -> Result<RefineOutcome> {
    let masks = p.masks();
    let sizes = p.part_sizes();
    let mut witness_masks: Vec<Vec<Vec<u64>>> = vec![Vec::new(); p.k + 1];
    let mut non_uniform = 0usize;
    let mut pairs_checked = 0usize;
    let mut all_exact = true;
    for i in 1..=p.k {
        for j in (i + 1)..=p.k {
            if sizes[i] == 0 || sizes[j] == 0 {
                continue;
            }
            pairs_checked += 1;
            let mode = if sizes[i] <= EXACT_UNIFORMITY_CAP && sizes[j] <= EXACT_UNIFORMITY_CAP {
                CheckMode::Exact
            } else {
                all_exact = false;
                CheckMode::Heuristic
            };
            let verdict = uniformity_check(g, &masks[i], &masks[j], eps, mode)?;
            if let Some(w) = verdict.witness {
                non_uniform += 1;
                witness_masks[i].push(w.a_sub);
                witness_masks[j].push(w.b_sub);
            }
        }
    }
    if non_uniform == 0 {
        return Ok(RefineOutcome {
            partition: p.clone(),
            gained: 0.0,
            pairs_checked,
            non_uniform_pairs: 0,
            all_exact,
        });
    }
    let refined = venn_refine(p, &witness_masks);
    let gained = partition_energy(g, &refined) - partition_energy(g, p);
    Ok(RefineOutcome {
        partition: refined,
        gained,
        pairs_checked,
        non_uniform_pairs: non_uniform,
        all_exact,
    })
}

/// Split each part into the cells of the Venn diagram of its witness subsets.
/// Cell order is deterministic: parts in order, cells by smallest vertex.
fn venn_refine(p: &Partition, witness_masks: &[Vec<Vec<u64>>]) -> Partition {
    let n = p.n();
    let mut assignment = vec![0usize; n];
    let mut next_part = 0usize;
    for part in 1..=p.k {
        let mut cells: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
        // signature of v = membership bitset over this part's witness subsets
        let words = witness_masks[part].len().div_ceil(64).max(1);
        let mut sig_of: Vec<(Vec<u64>, usize)> = Vec::new();
        for v in 0..n {
            if p.assignment[v] != part {
                continue;
            }
            let mut sig = vec![0u64; words];
            for (b, w) in witness_masks[part].iter().enumerate() {
                if w[v / 64] >> (v % 64) & 1 == 1 {
                    sig[b / 64] |= 1 << (b % 64);
                }
            }
            sig_of.push((sig, v));
        }
        // group by signature, order cells by their smallest vertex
        sig_of.sort();
        let mut iter = sig_of.into_iter().peekable();
        while let Some((sig, v)) = iter.next() {
            let mut cell = vec![v];
            while matches!(iter.peek(), Some((s, _)) if *s == sig) {
                cell.push(iter.next().unwrap().1);
            }
            cells.push((sig, cell));
        }
        cells.sort_by_key(|(_, cell)| cell[0]);
        for (_, cell) in cells {
            next_part += 1;
            for v in cell {
                assignment[v] = next_part;
            }
        }
    }
    Partition {
        assignment,
        k: next_part,
    }
}

// ---------------------------------------------------------------------------
// types and decomposition
// ---------------------------------------------------------------------------

/// Symmetric k x k density matrix with entries in [0, 1]; the diagonal is
/// unused and reads 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SzemerediType {
    pub k: usize,
    pub eps: f64,
    /// Upper triangle, row-major: (i, j) with i < j at tri_index(i, j, k).
    pub s: Vec<f64>,
}

pub fn tri_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

impl SzemerediType {
    pub fn constant(k: usize, eps: f64, s: f64) -> Self {
        SzemerediType {
            k,
            eps,
            s: vec![s; k * (k - 1) / 2],
        }
    }

    pub fn from_entries(k: usize, eps: f64, s: Vec<f64>) -> Result<Self> {
        if s.len() != k * (k - 1) / 2 {
            return Err(Error::validation("wrong number of upper-triangle entries"));
        }
        if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::validation("entries must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&eps) || k == 0 {
            return Err(Error::validation("need k >= 1 and eps in [0, 1]"));
        }
        Ok(SzemerediType { k, eps, s })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            self.s[tri_index(a, b, self.k)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = self.k;
        self.s[tri_index(a, b, k)] = v;
    }

    /// Full matrix, diagonal zero.
    pub fn full_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// L1 distance over unordered pairs i < j.
    pub fn l1_distance(&self, other: &SzemerediType) -> f64 {
        self.s
            .iter()
            .zip(&other.s)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecomposeStatus {
    Uniform,
    KCapExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformAudit {
    pub pairs: usize,
    pub non_uniform_pairs: usize,
    pub allowed_non_uniform: f64,
    pub c0_size: usize,
    pub c0_ok: bool,
    pub all_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub status: DecomposeStatus,
    pub partition: Partition,
    pub stype: SzemerediType,
    pub energy_trace: Vec<f64>,
    pub audit: UniformAudit,
}

/// Iterate witness refinement from a contiguous `k_init` partition until at
/// most eps * C(k, 2) pairs are non-uniform, then equalize part sizes
/// (spill into C_0) and extract the type. Energy strictly increases across
/// refinement iterations. `k_cap` bounds the part explosion; hitting it is
/// reported as a status, with the partial partition included.
pub fn regular_decompose(
    g: &Graph,
    eps: f64,
    k_cap: usize,
    k_init: usize,
) -> Result<Decomposition> {
    let n = g.n();
    if n < 2 {
        return Err(Error::validation("need at least two vertices"));
    }
    if !(0.0 < eps && eps <= 1.0) {
        return Err(Error::validation("eps must lie in (0, 1]"));
    }
    if k_init == 0 || k_init > n {
        return Err(Error::validation("k_init must lie in 1..=n"));
    }
    let mut p = Partition::contiguous(n, k_init);
    let mut energy_trace = vec![partition_energy(g, &p)];
    let mut status = DecomposeStatus::Uniform;
    loop {
        let outcome = refine_step(g, &p, eps)?;
        let allowed = eps * (outcome.pairs_checked as f64);
        if outcome.non_uniform_pairs as f64 <= allowed {
            break;
        }
        if outcome.partition.k > k_cap {
            status = DecomposeStatus::KCapExceeded;
            p = outcome.partition;
            energy_trace.push(*energy_trace.last().unwrap() + outcome.gained);
            break;
        }
        energy_trace.push(*energy_trace.last().unwrap() + outcome.gained);
        p = outcome.partition;
    }
    // equalize: chop every part into chunks of size g, spilling remainders
    // into C_0; pick the largest g with spill < eps n and part count <= cap
    let sizes = p.part_sizes();
    let max_size = sizes[1..].iter().cloned().max().unwrap_or(1);
    let mut chosen = None;
    for gsize in (1..=max_size).rev() {
        let parts: usize = sizes[1..].iter().map(|s| s / gsize).sum();
        let spill: usize = sizes[0] + sizes[1..].iter().map(|s| s % gsize).sum::<usize>();
        if parts >= 1 && (spill as f64) < eps * n as f64 && parts <= k_cap {
            chosen = Some(gsize);
            break;
        }
    }
    let gsize = chosen.ok_or_else(|| {
        Error::cap(format!(
            "no equalization with |C_0| < eps*n = {} and <= {k_cap} parts",
            eps * n as f64
        ))
    })?;
    let mut assignment = vec![0usize; n];
    let mut next = 0usize;
    for part in 1..=p.k {
        let verts: Vec<usize> = (0..n).filter(|&v| p.assignment[v] == part).collect();
        for chunk in verts.chunks(gsize) {
            if chunk.len() == gsize {
                next += 1;
                for &v in chunk {
                    assignment[v] = next;
                }
            }
        }
    }
    let equalized = Partition {
        assignment,
        k: next,
    };

    // audit the final equitable partition and extract the type
    let masks = equalized.masks();
    let k = equalized.k;
    let mut s = vec![0.0; k * (k - 1) / 2];
    let mut non_uniform = 0usize;
    let mut pairs = 0usize;
    let mut all_exact = true;
    for i in 1..=k {
        for j in (i + 1)..=k {
            pairs += 1;
            s[tri_index(i - 1, j - 1, k)] = pair_density(g, &masks[i], &masks[j])?;
            let mode = if gsize <= EXACT_UNIFORMITY_CAP {
                CheckMode::Exact
            } else {
                all_exact = false;
                CheckMode::Heuristic
            };
            if !uniformity_check(g, &masks[i], &masks[j], eps, mode)?.uniform {
                non_uniform += 1;
            }
        }
    }
    let c0_size = equalized.part_sizes()[0];
    let audit = UniformAudit {
        pairs,
        non_uniform_pairs: non_uniform,
        allowed_non_uniform: eps * pairs as f64,
        c0_size,
        c0_ok: (c0_size as f64) < eps * n as f64,
        all_exact,
    };
    energy_trace.push(partition_energy(g, &equalized));
    Ok(Decomposition {
        status,
        partition: equalized,
        stype: SzemerediType { k, eps, s },
        energy_trace,
        audit,
    })
}

/// Quantization tolerance for matching measured pair densities against a
/// type entry: the density alphabet has spacing 1/g^2.
pub fn type_quantization(gsize: usize) -> f64 {
    1.0 / (gsize as f64 * gsize as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipCertificate {
    pub partition: Partition,
    pub max_entry_gap: f64,
    pub audit: UniformAudit,
}

/// Heuristic type-class membership: try the supplied candidate partition and
/// seeded random equitable partitions; a certificate is a (k, eps)-uniform
/// partition whose pair densities match S entrywise within the 1/g^2
/// quantization. `None` only means no certificate was found.
pub fn type_membership(
    g: &Graph,
    stype: &SzemerediType,
    candidate: Option<&Partition>,
    restarts: usize,
    seed: u64,
) -> Result<Option<MembershipCertificate>> {
    let n = g.n();
    let k = stype.k;
    if k > n {
        return Err(Error::validation("k exceeds the vertex count"));
    }
    let mut candidates: Vec<Partition> = Vec::new();
    if let Some(c) = candidate {
        candidates.push(c.clone());
    }
    candidates.push(Partition::contiguous(n, k));
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..restarts {
        candidates.push(Partition::random(n, k, &mut rng));
    }
    for cand in candidates {
        if cand.k != k || cand.n() != n {
            continue;
        }
        if let Some(cert) = check_membership(g, stype, &cand)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn check_membership(
    g: &Graph,
    stype: &SzemerediType,
    p: &Partition,
) -> Result<Option<MembershipCertificate>> {
    let eps = stype.eps;
    if !p.is_uniform_candidate(eps) {
        return Ok(None);
    }
    let sizes = p.part_sizes();
    let gsize = sizes[1];
    let quant = type_quantization(gsize) + 1e-9;
    let masks = p.masks();
    let k = p.k;
    let mut max_gap: f64 = 0.0;
    for i in 1..=k {
        for j in (i + 1)..=k {
            let d = pair_density(g, &masks[i], &masks[j])?;
            let gap = (d - stype.get(i - 1, j - 1)).abs();
            max_gap = max_gap.max(gap);
            if gap > quant {
                return Ok(None);
            }
        }
    }
    // uniformity audit
    let mut non_uniform = 0usize;
    let mut pairs = 0usize;
    let mut all_exact = true;
    for i in 1..=k {
        for j in (i + 1)..=k {
            pairs += 1;
            let mode = if gsize <= EXACT_UNIFORMITY_CAP {
                CheckMode::Exact
            } else {
                all_exact = false;
                CheckMode::Heuristic
            };
            if !uniformity_check(g, &masks[i], &masks[j], eps, mode)?.uniform {
                non_uniform += 1;
            }
        }
    }
    if non_uniform as f64 > eps * pairs as f64 {
        return Ok(None);
    }
    let c0_size = sizes[0];
    Ok(Some(MembershipCertificate {
        partition: p.clone(),
        max_entry_gap: max_gap,
        audit: UniformAudit {
            pairs,
            non_uniform_pairs: non_uniform,
            allowed_non_uniform: eps * pairs as f64,
            c0_size,
            c0_ok: (c0_size as f64) < eps * p.n() as f64,
            all_exact,
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two blocks: complete A1-B1 and A2-B2, empty crosswise.
    fn two_block(half: usize) -> (Graph, Vec<u64>, Vec<u64>) {
        let n = 4 * half;
        let mut g = Graph::empty(n);
        // A = 0..2h (A1 = 0..h, A2 = h..2h), B = 2h..4h (B1, B2)
        for i in 0..half {
            for j in 0..half {
                g.add_edge(i, 2 * half + j); // A1 - B1
                g.add_edge(half + i, 3 * half + j); // A2 - B2
            }
        }
        let a = mask_of(n, &(0..2 * half).collect::<Vec<_>>());
        let b = mask_of(n, &(2 * half..4 * half).collect::<Vec<_>>());
        (g, a, b)
    }

    #[test]
    fn pair_density_cases() {
        let (g, a, b) = two_block(2);
        assert_eq!(pair_density(&g, &a, &b).unwrap(), 0.5);
        let k4 = Graph::complete(4);
        let a = mask_of(4, &[0, 1]);
        let b = mask_of(4, &[2, 3]);
        assert_eq!(pair_density(&k4, &a, &b).unwrap(), 1.0);
        assert!(pair_density(&k4, &a, &a).is_err());
        let empty = mask_of(4, &[]);
        assert!(pair_density(&k4, &a, &empty).is_err());
    }

    #[test]
    fn complete_bipartite_is_uniform() {
        let mut g = Graph::empty(10);
        for i in 0..5 {
            for j in 5..10 {
                g.add_edge(i, j);
            }
        }
        let a = mask_of(10, &[0, 1, 2, 3, 4]);
        let b = mask_of(10, &[5, 6, 7, 8, 9]);
        for eps in [0.05, 0.3, 0.9] {
            let v = uniformity_check(&g, &a, &b, eps, CheckMode::Exact).unwrap();
            assert!(v.uniform, "eps = {eps}");
        }
    }

    #[test]
    fn two_block_pair_is_not_uniform() {
        let (g, a, b) = two_block(5);
        let v = uniformity_check(&g, &a, &b, 0.4, CheckMode::Exact).unwrap();
        assert!(!v.uniform);
        let w = v.witness.unwrap();
        // valid witness: sizes and deviation
        assert!(mask_popcount(&w.a_sub) >= 4);
        assert!(mask_popcount(&w.b_sub) >= 4);
        assert!((w.sub_density - w.pair_density).abs() >= 0.4);
        assert_eq!(w.pair_density, 0.5);
    }

    #[test]
    fn exact_matches_definitional_scan_small() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(99);
        for trial in 0..40 {
            let ha = rng.gen_range(3..=7);
            let hb = rng.gen_range(3..=7);
            let n = ha + hb;
            let mut g = Graph::empty(n);
            let p = rng.gen_range(0.2..0.8);
            for i in 0..ha {
                for j in ha..n {
                    if rng.gen_bool(p) {
                        g.add_edge(i, j);
                    }
                }
            }
            let a = mask_of(n, &(0..ha).collect::<Vec<_>>());
            let b = mask_of(n, &(ha..n).collect::<Vec<_>>());
            let eps = rng.gen_range(0.15..0.5);
            let fast = uniformity_exact(&g, &a, &b, eps);
            let slow = definitional_uniform(&g, &a, &b, eps);
            assert_eq!(fast.uniform, slow, "trial {trial}");
        }
    }

    /// The definitional double subset scan; test-only oracle.
    pub(crate) fn definitional_uniform(g: &Graph, a: &[u64], b: &[u64], eps: f64) -> bool {
        let averts: Vec<usize> = iter_bits(a).collect();
        let bverts: Vec<usize> = iter_bits(b).collect();
        let (sa, sb) = (averts.len(), bverts.len());
        let e = g.cross_edges(a, b);
        let min_a = min_subset_size(eps, sa);
        let min_b = min_subset_size(eps, sb);
        for sub_a in 1u32..(1 << sa) {
            if (sub_a.count_ones() as usize) < min_a {
                continue;
            }
            let apick: Vec<usize> = (0..sa)
                .filter(|i| sub_a >> i & 1 == 1)
                .map(|i| averts[i])
                .collect();
            let am = mask_of(g.n(), &apick);
            for sub_b in 1u32..(1 << sb) {
                if (sub_b.count_ones() as usize) < min_b {
                    continue;
                }
                let bpick: Vec<usize> = (0..sb)
                    .filter(|i| sub_b >> i & 1 == 1)
                    .map(|i| bverts[i])
                    .collect();
                let bm = mask_of(g.n(), &bpick);
                let e_sub = g.cross_edges(&am, &bm);
                if density_deviates(e_sub, apick.len(), bpick.len(), e, sa, sb, eps) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn energy_range_and_examples() {
        // empty graph
        let p = Partition::contiguous(8, 2);
        assert_eq!(partition_energy(&Graph::empty(8), &p), 0.0);
        // complete graph, k equal parts of size g:
        // q = (k-1)/k + (1/k)(1 - 1/g)^2
        let k8 = Graph::complete(8);
        let q = partition_energy(&k8, &p);
        let expect = 0.5 + 0.5 * (1.0 - 1.0 / 4.0) * (1.0 - 1.0 / 4.0);
        assert!((q - expect).abs() < 1e-12, "q = {q}");
        // hand-computed 8-vertex example straight from edge counts
        let g = Graph::from_edges(8, &[(0, 1), (2, 3), (4, 5), (0, 4), (1, 5), (2, 6)]).unwrap();
        let q = partition_energy(&g, &p);
        // e(A,A)=2, e(B,B)=1, e(A,B)=3 with |A|=|B|=4, n=8:
        // q = (16/64)(4/16)^2 + (16/64)(2/16)^2 + 2 (16/64)(3/16)^2
        let expect = 0.25 * 0.0625 + 0.25 * 0.015625 + 0.5 * (3.0f64 / 16.0).powi(2);
        assert!((q - expect).abs() < 1e-12);
    }

    #[test]
    fn refine_uniform_partition_is_identity() {
        let g = Graph::complete(8);
        let p = Partition::contiguous(8, 2);
        let out = refine_step(&g, &p, 0.3).unwrap();
        assert_eq!(out.partition, p);
        assert_eq!(out.gained, 0.0);
        assert_eq!(out.non_uniform_pairs, 0);
    }

    #[test]
    fn refine_two_block_gains_energy() {
        let (g, _, _) = two_block(5);
        // trivial 2-part partition: A and B
        let mut assignment = vec![1usize; 20];
        for v in 10..20 {
            assignment[v] = 2;
        }
        let p = Partition { assignment, k: 2 };
        let eps = 0.4;
        let out = refine_step(&g, &p, eps).unwrap();
        assert_eq!(out.non_uniform_pairs, 1);
        assert!(out.all_exact);
        // witnessed pair gains at least eps^4 |W||U| / n^2
        let floor = eps.powi(4) * (10.0 * 10.0) / 400.0;
        assert!(out.gained >= floor, "gain {} < {floor}", out.gained);
        assert!(out.gained >= eps.powi(5));
    }

    #[test]
    fn random_refinements_never_decrease_energy() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(4..=16);
            let mut g = Graph::empty(n);
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.5) {
                        g.add_edge(u, v);
                    }
                }
            }
            let k = rng.gen_range(1..=3.min(n));
            let p = Partition::random(n, k, &mut rng);
            // arbitrary refinement independent of witnesses
            let kk = rng.gen_range(1..=3usize);
            let mut assignment = vec![0usize; n];
            let mut label_map = std::collections::HashMap::new();
            let mut next = 0usize;
            for v in 0..n {
                if p.assignment[v] == 0 {
                    continue;
                }
                let sub = rng.gen_range(0..kk);
                let key = (p.assignment[v], sub);
                let part = *label_map.entry(key).or_insert_with(|| {
                    next += 1;
                    next
                });
                assignment[v] = part;
            }
            let refined = Partition {
                assignment,
                k: next,
            };
            let q0 = partition_energy(&g, &p);
            let q1 = partition_energy(&g, &refined);
            assert!(q1 >= q0 - 1e-12, "q dropped: {q0} -> {q1}");
            assert!((0.0..=1.0 + 1e-12).contains(&q0));
        }
    }

    #[test]
    fn decompose_complete_graph() {
        let g = Graph::complete(12);
        let d = regular_decompose(&g, 0.5, 16, 1).unwrap();
        assert_eq!(d.status, DecomposeStatus::Uniform);
        assert_eq!(d.partition.k, 1);
        assert!(d.audit.c0_ok);
    }

    #[test]
    fn decompose_random_graph_types_near_half() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        let n = 400;
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.5) {
                    g.add_edge(u, v);
                }
            }
        }
        let d = regular_decompose(&g, 0.3, 64, 2).unwrap();
        assert_eq!(d.status, DecomposeStatus::Uniform);
        assert!(d.audit.c0_ok);
        // entries within 3 standard errors of 0.5 (se = 0.5 / g)
        let gsize = d.partition.part_sizes()[1];
        let se = 0.5 / gsize as f64;
        for &s in &d.stype.s {
            assert!((s - 0.5).abs() <= 3.0 * se, "s = {s}, se = {se}");
        }
        // energy non-decreasing along the trace (except the final equalize)
        for w in d
            .energy_trace
            .windows(2)
            .take(d.energy_trace.len().saturating_sub(2))
        {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn membership_examples() {
        let g = Graph::complete(12);
        let all_ones = SzemerediType::constant(3, 0.5, 1.0);
        let cert = type_membership(&g, &all_ones, None, 4, 7).unwrap();
        assert!(cert.is_some());
        let empty = Graph::empty(12);
        let cert = type_membership(&empty, &all_ones, None, 4, 7).unwrap();
        assert!(cert.is_none());
    }

    #[test]
    fn tri_index_round_trip() {
        let k = 6;
        let mut seen = std::collections::HashSet::new();
        for i in 0..k {
            for j in (i + 1)..k {
                assert!(seen.insert(tri_index(i, j, k)));
            }
        }
        assert_eq!(seen.len(), k * (k - 1) / 2);
        assert_eq!(*seen.iter().max().unwrap(), k * (k - 1) / 2 - 1);
    }
}
