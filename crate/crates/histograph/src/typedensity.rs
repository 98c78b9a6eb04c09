//! Mean subgraph densities t(S, F) of a random block graph S ~ (s_ij).
//!
//! The normative polynomial sums over all ways to place the pattern's
//! vertices into distinct-part color classes: partitions of V(F) into
//! independent sets (proper colorings up to renaming), classes injectively
//! assigned to parts, one s-factor per class pair joined by at least one
//! pattern edge. The normalizer is the same sum evaluated at the all-ones
//! matrix (the number of admissible placements), the direct analogue of
//! dividing a copy count by the copies in the complete graph: densities
//! always land in [0, 1], the all-ones type has density exactly 1, and for
//! cliques the formula reduces to the usual (1/C(k,r)) sum over r-subsets
//! of products over pairs.
//!
//! The collision variant rescales by (number of placements) / k^r and equals
//! the probability that F appears at r uniformly random (not necessarily
//! distinct) parts of the random block graph; it matches sampled block-model
//! graphs at small k, where the polynomial form deviates by O(1/k).

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::szemeredi::SzemerediType;

/// One proper-coloring template: class count and quotient edges (class pairs
/// joined by at least one pattern edge).
#[derive(Clone, Debug)]
pub struct Template {
    pub classes: usize,
    pub qedges: Vec<(usize, usize)>,
}

/// All partitions of V(F) into independent sets, as quotient templates.
pub fn templates(f: &Graph) -> Vec<Template> {
    let r = f.n();
    let mut out = Vec::new();
    // restricted-growth assignment: class[v] <= 1 + max(class[0..v])
    let mut class = vec![0usize; r];
    fn rec(f: &Graph, v: usize, maxc: usize, class: &mut Vec<usize>, out: &mut Vec<Template>) {
        let r = f.n();
        if v == r {
            let p = maxc + 1;
            let mut qset = std::collections::BTreeSet::new();
            for (u, w) in f.edges() {
                let (a, b) = (class[u].min(class[w]), class[u].max(class[w]));
                qset.insert((a, b));
            }
            out.push(Template {
                classes: p,
                qedges: qset.into_iter().collect(),
            });
            return;
        }
        for c in 0..=(maxc + 1).min(v) {
            // class must stay independent
            if (0..v).any(|u| class[u] == c && f.has_edge(u, v)) {
                continue;
            }
            class[v] = c;
            rec(f, v + 1, maxc.max(c), class, out);
        }
    }
    if r == 0 {
        return out;
    }
    class[0] = 0;
    rec(f, 1, 0, &mut class, &mut out);
    out
}

/// Falling factorial (k)_r as f64.
pub fn falling(k: usize, r: usize) -> f64 {
    (0..r).map(|i| (k - i) as f64).product()
}

/// Smallest class count over the templates = chromatic number of F.
pub fn chromatic_number(f: &Graph) -> usize {
    templates(f).iter().map(|t| t.classes).min().unwrap_or(0)
}

/// Work estimate for exact enumeration.
fn enumeration_cost(tpls: &[Template], k: usize) -> f64 {
    tpls.iter().map(|t| falling(k, t.classes)).sum()
}

pub const EXACT_ENUMERATION_COST_CAP: f64 = 2e7;

/// Exact mean density. Errors when k is below the chromatic number of F.
pub fn mean_density(s: &SzemerediType, f: &Graph) -> Result<f64> {
    let (t, _) = eval_templates(s, &templates_checked(s, f)?, f.n(), false)?;
    Ok(t)
}

/// Mean density together with the gradient d t / d s_ij over unordered pairs
/// (upper-triangle order).
pub fn mean_density_with_grad(s: &SzemerediType, f: &Graph) -> Result<(f64, Vec<f64>)> {
    let (t, g) = eval_templates(s, &templates_checked(s, f)?, f.n(), true)?;
    Ok((t, g.unwrap()))
}

/// Number of admissible class placements: sum over templates that fit of
/// (k)_p. This is the polynomial's value at the all-ones matrix times the
/// normalizer, and also the count of proper part-assignments of V(F).
pub fn placement_count(tpls: &[Template], k: usize) -> f64 {
    tpls.iter()
        .filter(|t| t.classes <= k)
        .map(|t| falling(k, t.classes))
        .sum()
}

/// Collision-semantics density: probability that F appears at r uniform
/// random parts of the random graph S. Exactly placements / k^r times the
/// polynomial value.
pub fn mean_density_collision(s: &SzemerediType, f: &Graph) -> Result<f64> {
    let r = f.n();
    let k = s.k;
    let tpls = templates_checked(s, f)?;
    let placements = placement_count(&tpls, k);
    Ok(mean_density(s, f)? * placements / (k as f64).powi(r as i32))
}

fn templates_checked(s: &SzemerediType, f: &Graph) -> Result<Vec<Template>> {
    if f.n() == 0 {
        return Err(Error::validation("empty pattern"));
    }
    let tpls = templates(f);
    let chi = tpls.iter().map(|t| t.classes).min().unwrap();
    if s.k < chi {
        return Err(Error::validation(format!(
            "k = {} is below the pattern's chromatic number {chi}",
            s.k
        )));
    }
    Ok(tpls)
}

/// Shared exact evaluator: sum over templates and ordered injective class
/// assignments; optionally accumulates the gradient.
fn eval_templates(
    s: &SzemerediType,
    tpls: &[Template],
    r: usize,
    want_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    let k = s.k;
    if enumeration_cost(tpls, k) > EXACT_ENUMERATION_COST_CAP {
        return Err(Error::cap(
            "exact mean-density enumeration exceeds the cost cap; use the Monte Carlo estimator",
        ));
    }
    let pairs = k * (k - 1) / 2;
    let mut total = 0.0f64;
    let mut grad = if want_grad {
        Some(vec![0.0f64; pairs])
    } else {
        None
    };

    let mut assign = vec![0usize; r];
    for tpl in tpls {
        let p = tpl.classes;
        if p > k {
            continue;
        }
        // backtracking over ordered injective assignments of classes to parts
        let mut used = 0u64;
        rec_assign(s, tpl, 0, p, &mut assign, &mut used, &mut total, &mut grad);
    }
    let norm = placement_count(tpls, k);
    total /= norm;
    if let Some(g) = grad.as_mut() {
        for v in g.iter_mut() {
            *v /= norm;
        }
    }
    let _ = r;
    Ok((total, grad))
}

#[allow(clippy::too_many_arguments)]
fn rec_assign(
    s: &SzemerediType,
    tpl: &Template,
    depth: usize,
    p: usize,
    assign: &mut [usize],
    used: &mut u64,
    total: &mut f64,
    grad: &mut Option<Vec<f64>>,
) {
    if depth == p {
        let m = tpl.qedges.len();
        if grad.is_none() && m == 0 {
            *total += 1.0;
            return;
        }
        // factor per quotient edge
        let factors: Vec<f64> = tpl
            .qedges
            .iter()
            .map(|&(a, b)| s.get(assign[a], assign[b]))
            .collect();
        let product: f64 = factors.iter().product();
        *total += product;
        if let Some(g) = grad {
            // prefix/suffix products to get the product excluding each factor
            let mut prefix = vec![1.0f64; m + 1];
            for i in 0..m {
                prefix[i + 1] = prefix[i] * factors[i];
            }
            let mut suffix = vec![1.0f64; m + 1];
            for i in (0..m).rev() {
                suffix[i] = suffix[i + 1] * factors[i];
            }
            for (i, &(a, b)) in tpl.qedges.iter().enumerate() {
                let (x, y) = (assign[a].min(assign[b]), assign[a].max(assign[b]));
                g[crate::szemeredi::tri_index(x, y, s.k)] += prefix[i] * suffix[i + 1];
            }
        }
        return;
    }
    for part in 0..s.k {
        if *used >> part & 1 == 1 {
            continue;
        }
        assign[depth] = part;
        *used |= 1 << part;
        rec_assign(s, tpl, depth + 1, p, assign, used, total, grad);
        *used &= !(1 << part);
    }
}

/// Mean density at a constant matrix s_ij = c: sum over templates of
/// (k)_p c^{|qedges|}, normalized by the placement count. Used for solver
/// seeding and scalar paths.
pub fn mean_density_constant(k: usize, f: &Graph, c: f64) -> Result<f64> {
    let tpls = templates(f);
    let chi = tpls.iter().map(|t| t.classes).min().unwrap_or(1);
    if k < chi {
        return Err(Error::validation(format!(
            "k = {k} is below the pattern's chromatic number {chi}"
        )));
    }
    let total: f64 = tpls
        .iter()
        .filter(|t| t.classes <= k)
        .map(|t| falling(k, t.classes) * c.powi(t.qedges.len() as i32))
        .sum();
    Ok(total / placement_count(&tpls, k))
}

/// Mean density with the documented fallback: exact enumeration when the
/// template cost allows it, otherwise the unbiased Monte Carlo estimator run
/// until its standard error drops to 1e-3 (trial cap 2^22). Returns the
/// value and the standard error (zero for the exact path).
pub fn mean_density_auto(s: &SzemerediType, f: &Graph, seed: u64) -> Result<(f64, f64)> {
    match mean_density(s, f) {
        Ok(t) => Ok((t, 0.0)),
        Err(Error::CapExceeded(_)) => {
            let mut trials = 1 << 14;
            loop {
                let (est, se) = mean_density_mc(s, f, trials, seed)?;
                if se <= 1e-3 || trials >= 1 << 22 {
                    return Ok((est, se));
                }
                trials *= 4;
            }
        }
        Err(e) => Err(e),
    }
}

/// Unbiased Monte Carlo estimator of the polynomial mean density: draw a
/// uniform part label per pattern vertex, keep proper draws, weight by
/// k^r / (number of admissible placements). Returns (estimate, standard
/// error).
pub fn mean_density_mc(
    s: &SzemerediType,
    f: &Graph,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let r = f.n();
    let k = s.k;
    let chi = chromatic_number(f);
    if k < chi {
        return Err(Error::validation("k below chromatic number"));
    }
    let edges = f.edges();
    let weight = (k as f64).powi(r as i32) / placement_count(&templates(f), k);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let mut kappa = vec![0usize; r];
    for _ in 0..trials {
        for x in kappa.iter_mut() {
            *x = rng.gen_range(0..k);
        }
        let proper = edges.iter().all(|&(u, v)| kappa[u] != kappa[v]);
        let val = if proper {
            // product over distinct covered part pairs
            let mut covered = std::collections::BTreeSet::new();
            for &(u, v) in &edges {
                let (a, b) = (kappa[u].min(kappa[v]), kappa[u].max(kappa[v]));
                covered.insert((a, b));
            }
            weight * covered.iter().map(|&(a, b)| s.get(a, b)).product::<f64>()
        } else {
            0.0
        };
        sum += val;
        sumsq += val * val;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0) / (n - 1.0).max(1.0);
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clique_templates() {
        // cliques admit only the all-singleton partition
        let t3 = templates(&Graph::complete(3));
        assert_eq!(t3.len(), 1);
        assert_eq!(t3[0].classes, 3);
        assert_eq!(t3[0].qedges.len(), 3);
    }

    #[test]
    fn path_templates() {
        // path a-b-c: singletons, or endpoints merged
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let ts = templates(&path);
        assert_eq!(ts.len(), 2);
        let classes: Vec<usize> = ts.iter().map(|t| t.classes).collect();
        assert!(classes.contains(&2) && classes.contains(&3));
    }

    #[test]
    fn constant_matrix_cliques() {
        for r in 2usize..=4 {
            for k in r..=8 {
                let s = SzemerediType::constant(k, 0.1, 0.37);
                let t = mean_density(&s, &Graph::complete(r)).unwrap();
                let expect = 0.37f64.powi((r * (r - 1) / 2) as i32);
                assert!((t - expect).abs() < 1e-12, "r={r} k={k}: {t} vs {expect}");
            }
        }
    }

    #[test]
    fn all_ones_gives_one() {
        let s = SzemerediType::constant(6, 0.1, 1.0);
        for f in [
            Graph::complete(3),
            Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
            Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap(),
        ] {
            let t = mean_density(&s, &f).unwrap();
            assert!((t - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_part_triangle_single_term() {
        // k = 3, S = [.2, .4, .6] -> only one part triple: t = .2*.4*.6
        let mut s = SzemerediType::constant(3, 0.1, 0.0);
        s.set(0, 1, 0.2);
        s.set(0, 2, 0.4);
        s.set(1, 2, 0.6);
        let t = mean_density(&s, &Graph::complete(3)).unwrap();
        assert!((t - 0.048).abs() < 1e-12);
    }

    #[test]
    fn edge_density_is_mean_entry() {
        let mut s = SzemerediType::constant(4, 0.1, 0.0);
        let vals = [0.1, 0.9, 0.3, 0.5, 0.7, 0.2];
        let mut idx = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                s.set(i, j, vals[idx]);
                idx += 1;
            }
        }
        let t = mean_density(&s, &Graph::complete(2)).unwrap();
        let mean: f64 = vals.iter().sum::<f64>() / 6.0;
        assert!((t - mean).abs() < 1e-12);
    }

    #[test]
    fn k_below_chromatic_number_errors() {
        let s = SzemerediType::constant(2, 0.1, 0.5);
        assert!(mean_density(&s, &Graph::complete(3)).is_err());
    }

    #[test]
    fn monotone_in_entries() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        let bowtie =
            Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        for trial in 0..100 {
            let k = rng.gen_range(5..=7);
            let mut s = SzemerediType::constant(k, 0.1, 0.0);
            for i in 0..k {
                for j in (i + 1)..k {
                    s.set(i, j, rng.gen_range(0.05..0.95));
                }
            }
            let f = match trial % 3 {
                0 => Graph::complete(3),
                1 => path.clone(),
                _ => bowtie.clone(),
            };
            let base = mean_density(&s, &f).unwrap();
            let i = rng.gen_range(0..k);
            let j = (i + rng.gen_range(1..k)) % k;
            let (a, b) = (i.min(j), i.max(j));
            let mut s2 = s.clone();
            s2.set(a, b, (s.get(a, b) + 0.01).min(1.0));
            let bumped = mean_density(&s2, &f).unwrap();
            assert!(bumped >= base - 1e-15, "trial {trial}");
        }
    }

    #[test]
    fn auto_density_falls_back_to_mc() {
        // k = 40 with a 5-vertex pattern blows the enumeration cost cap
        let bowtie =
            Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        let s = SzemerediType::constant(40, 0.1, 0.5);
        assert!(mean_density(&s, &bowtie).is_err());
        let (est, se) = mean_density_auto(&s, &bowtie, 5).unwrap();
        assert!(se <= 1e-3, "se = {se}");
        // constant-matrix reference is cheap regardless of k
        let exact = mean_density_constant(40, &bowtie, 0.5).unwrap();
        assert!(
            (est - exact).abs() <= 5.0 * se.max(1e-4),
            "est {est} vs {exact}"
        );
        // exact path reports zero standard error
        let (t, se0) =
            mean_density_auto(&SzemerediType::constant(5, 0.1, 0.5), &bowtie, 5).unwrap();
        assert_eq!(se0, 0.0);
        assert!(
            (t - mean_density(&SzemerediType::constant(5, 0.1, 0.5), &bowtie).unwrap()).abs()
                < 1e-15
        );
    }

    #[test]
    fn mc_matches_exact_within_4_sigma() {
        let mut s = SzemerediType::constant(5, 0.1, 0.0);
        let mut v = 0.1;
        for i in 0..5 {
            for j in (i + 1)..5 {
                s.set(i, j, v);
                v = (v + 0.17) % 1.0;
            }
        }
        for f in [
            Graph::complete(3),
            Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
        ] {
            let exact = mean_density(&s, &f).unwrap();
            let (est, se) = mean_density_mc(&s, &f, 200_000, 31).unwrap();
            assert!(
                (est - exact).abs() <= 4.0 * se.max(1e-4),
                "exact {exact}, est {est}, se {se}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut s = SzemerediType::constant(5, 0.1, 0.0);
        let mut v = 0.15;
        for i in 0..5 {
            for j in (i + 1)..5 {
                s.set(i, j, v);
                v = (v + 0.13) % 0.8 + 0.1;
            }
        }
        let bowtie =
            Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        for f in [Graph::complete(3), bowtie] {
            let (_, grad) = mean_density_with_grad(&s, &f).unwrap();
            let h = 1e-5;
            let mut idx = 0;
            for i in 0..5 {
                for j in (i + 1)..5 {
                    let mut up = s.clone();
                    up.set(i, j, s.get(i, j) + h);
                    let mut dn = s.clone();
                    dn.set(i, j, s.get(i, j) - h);
                    let fd = (mean_density(&up, &f).unwrap() - mean_density(&dn, &f).unwrap())
                        / (2.0 * h);
                    assert!(
                        (grad[idx] - fd).abs() <= 1e-6 * grad[idx].abs().max(1e-3),
                        "entry ({i},{j}): analytic {}, fd {fd}",
                        grad[idx]
                    );
                    idx += 1;
                }
            }
        }
    }
}
