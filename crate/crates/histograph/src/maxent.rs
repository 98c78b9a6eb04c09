//! The constrained maximum-entropy problem over Szemerédi types: maximize
//! the pairwise binary entropy of a symmetric k x k matrix subject to
//! per-pattern mean-density windows |t(S, F_m) - phi_m| <= gamma_m + slack.
//!
//! Solved by an augmented-Lagrangian outer loop around box-projected gradient
//! descent, with deterministic multistart (the unconstrained center, constant
//! matrices bisected onto each constraint, and seeded random starts). The
//! best feasible start-or-solution wins; infeasibility is declared only when
//! no start ends within tolerance.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::szemeredi::SzemerediType;
use crate::typedensity::{mean_density_constant, templates, Template};

/// Binary entropy in nats; h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
    }
}

/// H(S) = sum over unordered pairs of h(s_ij), and the per-edge value H/k^2.
pub fn entropy(s: &SzemerediType) -> (f64, f64) {
    let h: f64 = s.s.iter().map(|&x| binary_entropy(x)).sum();
    (h, h / (s.k * s.k) as f64)
}

/// Density constraints for the solver.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    pub family: Vec<Graph>,
    pub phi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub k: usize,
    /// Uniformity parameter; contributes the counting-lemma slack
    /// 5 eps^(1/r_bar) to every window. Zero means no slack.
    pub eps: f64,
}

impl ConstraintSpec {
    pub fn new(
        family: Vec<Graph>,
        phi: Vec<f64>,
        gamma: Vec<f64>,
        k: usize,
        eps: f64,
    ) -> Result<Self> {
        if family.is_empty() || family.len() != phi.len() || phi.len() != gamma.len() {
            return Err(Error::validation(
                "family, phi, gamma must be nonempty and equally long",
            ));
        }
        if phi
            .iter()
            .chain(gamma.iter())
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::validation(
                "phi and gamma entries must lie in [0, 1]",
            ));
        }
        if k < 2 {
            return Err(Error::validation("need k >= 2"));
        }
        Ok(ConstraintSpec {
            family,
            phi,
            gamma,
            k,
            eps,
        })
    }

    pub fn d(&self) -> usize {
        self.family.len()
    }

    /// Largest vertex count over the family.
    pub fn r_bar(&self) -> usize {
        self.family.iter().map(|f| f.n()).max().unwrap()
    }

    /// Counting-lemma slack 5 eps^(1/r_bar).
    pub fn counting_slack(&self) -> f64 {
        if self.eps == 0.0 {
            0.0
        } else {
            5.0 * self.eps.powf(1.0 / self.r_bar() as f64)
        }
    }

    /// Effective windows gamma_m + counting slack.
    pub fn gamma_tilde(&self) -> Vec<f64> {
        let s = self.counting_slack();
        self.gamma.iter().map(|g| g + s).collect()
    }
}

/// Solver configuration; readable from a JSON config file (all fields
/// optional, missing ones take the defaults below) and overridable by CLI
/// flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub n_starts: usize,
    pub max_outer: usize,
    pub max_inner: usize,
    pub feas_tol: f64,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            n_starts: 16,
            max_outer: 40,
            max_inner: 600,
            feas_tol: 1e-6,
            grad_tol: 1e-9,
            seed: 1,
        }
    }
}

impl SolverOptions {
    pub fn from_config_file(path: &std::path::Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&content)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxEntSolution {
    pub s_star: SzemerediType,
    pub entropy: f64,
    pub per_edge_entropy: f64,
    /// max(0, |t_m - phi_m| - gamma_tilde_m) per constraint.
    pub residuals: Vec<f64>,
    pub densities: Vec<f64>,
    pub converged: bool,
    pub starts_feasible: usize,
}

struct Problem<'a> {
    spec: &'a ConstraintSpec,
    tpls: Vec<Vec<Template>>,
    gamma_tilde: Vec<f64>,
    pairs: usize,
}

impl<'a> Problem<'a> {
    fn new(spec: &'a ConstraintSpec) -> Result<Problem<'a>> {
        for f in &spec.family {
            let chi = crate::typedensity::chromatic_number(f);
            if spec.k < chi {
                return Err(Error::validation(format!(
                    "k = {} below chromatic number {chi} of a family member",
                    spec.k
                )));
            }
        }
        Ok(Problem {
            spec,
            tpls: spec.family.iter().map(templates).collect(),
            gamma_tilde: spec.gamma_tilde(),
            pairs: spec.k * (spec.k - 1) / 2,
        })
    }

    fn stype(&self, x: &[f64]) -> SzemerediType {
        SzemerediType {
            k: self.spec.k,
            eps: self.spec.eps,
            s: x.to_vec(),
        }
    }

    /// Densities and their gradients at x.
    fn densities(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let s = self.stype(x);
        let mut ts = Vec::with_capacity(self.spec.d());
        let mut grads = Vec::with_capacity(self.spec.d());
        for (f, tpl) in self.spec.family.iter().zip(&self.tpls) {
            let (t, g) = eval_cached(&s, tpl, f.n());
            ts.push(t);
            grads.push(g);
        }
        (ts, grads)
    }

    fn residuals(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter()
            .zip(&self.spec.phi)
            .zip(&self.gamma_tilde)
            .map(|((t, p), g)| ((t - p).abs() - g).max(0.0))
            .collect()
    }
}

/// Evaluate one family member's density and gradient from precomputed
/// templates (same machinery as typedensity, kept callable with a borrowed
/// template list to avoid re-enumeration in the inner loop).
fn eval_cached(s: &SzemerediType, tpls: &[Template], r: usize) -> (f64, Vec<f64>) {
    let k = s.k;
    let pairs = k * (k - 1) / 2;
    let mut total = 0.0;
    let mut grad = vec![0.0; pairs];
    let mut assign = vec![0usize; r];
    for tpl in tpls {
        if tpl.classes > k {
            continue;
        }
        let mut used = 0u64;
        rec_eval(s, tpl, 0, &mut assign, &mut used, &mut total, &mut grad);
    }
    let norm = crate::typedensity::placement_count(tpls, k);
    total /= norm;
    for g in grad.iter_mut() {
        *g /= norm;
    }
    (total, grad)
}

fn rec_eval(
    s: &SzemerediType,
    tpl: &Template,
    depth: usize,
    assign: &mut [usize],
    used: &mut u64,
    total: &mut f64,
    grad: &mut [f64],
) {
    if depth == tpl.classes {
        let m = tpl.qedges.len();
        let mut prefix = [1.0f64; 32];
        debug_assert!(m < 32);
        for (i, &(a, b)) in tpl.qedges.iter().enumerate() {
            prefix[i + 1] = prefix[i] * s.get(assign[a], assign[b]);
        }
        *total += prefix[m];
        let mut suffix = 1.0f64;
        for i in (0..m).rev() {
            let (a, b) = tpl.qedges[i];
            let (x, y) = if assign[a] < assign[b] {
                (assign[a], assign[b])
            } else {
                (assign[b], assign[a])
            };
            grad[crate::szemeredi::tri_index(x, y, s.k)] += prefix[i] * suffix;
            suffix *= s.get(assign[a], assign[b]);
        }
        return;
    }
    for part in 0..s.k {
        if *used >> part & 1 == 1 {
            continue;
        }
        assign[depth] = part;
        *used |= 1 << part;
        rec_eval(s, tpl, depth + 1, assign, used, total, grad);
        *used &= !(1 << part);
    }
}

/// Find a constant matrix whose density under `f` matches `target` by
/// bisection (the constant-matrix density is monotone in the constant).
pub fn constant_matrix_for_density(k: usize, f: &Graph, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_density_constant(k, f, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve the maximum-entropy problem. `Err(Infeasible)` when no start ends
/// within the feasibility tolerance.
pub fn solve_max_entropy(spec: &ConstraintSpec, opts: &SolverOptions) -> Result<MaxEntSolution> {
    let problem = Problem::new(spec)?;
    let pairs = problem.pairs;

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![0.5; pairs]);
    for (m, f) in spec.family.iter().enumerate() {
        if let Ok(c) = constant_matrix_for_density(spec.k, f, spec.phi[m]) {
            starts.push(vec![c; pairs]);
        }
    }
    // two-level block seeds break the symmetry that strands gradient flow on
    // the constant-matrix manifold (where all density gradients are parallel)
    let mut rng = StdRng::seed_from_u64(opts.seed);
    let k = spec.k;
    for _ in 0..(opts.n_starts / 4).max(2) {
        let block: u64 = rng.gen_range(1..(1u64 << k) - 1);
        let hi = rng.gen_range(0.5..0.98);
        let lo = rng.gen_range(0.02..0.5);
        let mut x = vec![0.0; pairs];
        let mut idx = 0;
        for i in 0..k {
            for j in (i + 1)..k {
                let inside = block >> i & 1 == 1 && block >> j & 1 == 1;
                x[idx] = if inside { hi } else { lo };
                idx += 1;
            }
        }
        starts.push(x);
    }
    while starts.len() < opts.n_starts {
        starts.push((0..pairs).map(|_| rng.gen_range(0.02..0.98)).collect());
    }

    let runs: Vec<(Vec<f64>, Vec<f64>, bool)> = starts
        .par_iter()
        .map(|x0| {
            let (x, converged) = augmented_lagrangian(&problem, x0, opts);
            // independent route: repair the start into the windows, then
            // climb the entropy while repairing after every step; this holds
            // on to asymmetric feasible structure that the smoothed
            // Lagrangian flow tends to collapse back into constant matrices
            let mut repaired = x0.clone();
            restore_feasibility(&problem, &mut repaired, opts);
            let repaired = ascent_with_repair(&problem, &repaired, opts);
            (x, repaired, converged)
        })
        .collect();

    // keep the best among each start, its Lagrangian end, and the
    // repair-ascent end
    let mut best: Option<(bool, f64, Vec<f64>, bool)> = None; // feasible, H, x, converged
    let mut starts_feasible = 0usize;
    for (x0, (x, repaired, converged)) in starts.iter().zip(&runs) {
        for (cand, conv) in [(x0, true), (x, *converged), (repaired, *converged)] {
            let (ts, _) = problem.densities(cand);
            let res = problem.residuals(&ts);
            let feasible = res.iter().all(|&r| r <= opts.feas_tol);
            let h: f64 = cand.iter().map(|&v| binary_entropy(v)).sum();
            let better = match &best {
                None => true,
                Some((bf, bh, _, _)) => (feasible, h) > (*bf, *bh),
            };
            if better {
                best = Some((feasible, h, cand.clone(), conv));
            }
        }
    }
    for (_, repaired, _) in &runs {
        let (ts, _) = problem.densities(repaired);
        if problem.residuals(&ts).iter().all(|&r| r <= opts.feas_tol) {
            starts_feasible += 1;
        }
    }

    let (feasible, h, x, converged) = best.unwrap();
    let (ts, _) = problem.densities(&x);
    let residuals = problem.residuals(&ts);
    if !feasible {
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        return Err(Error::infeasible(format!(
            "no start satisfied the density windows; best residual {worst:.3e}"
        )));
    }
    let s_star = problem.stype(&x);
    let per_edge = h / (spec.k * spec.k) as f64;
    Ok(MaxEntSolution {
        s_star,
        entropy: h,
        per_edge_entropy: per_edge,
        residuals,
        densities: ts,
        converged,
        starts_feasible,
    })
}

/// Projected-gradient descent on the squared residual excess, pulling a
/// point into the density windows (used both to seed the entropy phase and
/// to polish its result). Stops once the largest excess is safely inside the
/// feasibility tolerance.
fn restore_feasibility(problem: &Problem, x: &mut Vec<f64>, opts: &SolverOptions) {
    let d = problem.spec.d();
    let target = 0.25 * opts.feas_tol * opts.feas_tol;
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    // smooth objective: sum of squared excesses (max excess tracked for the
    // stopping rule)
    let eval = |x: &[f64]| -> (f64, f64, Vec<f64>) {
        let (ts, grads) = problem.densities(x);
        let mut val = 0.0;
        let mut worst = 0.0f64;
        let mut grad = vec![0.0; x.len()];
        for m in 0..d {
            let dev = ts[m] - problem.spec.phi[m];
            let excess = dev.abs() - problem.gamma_tilde[m];
            if excess > 0.0 {
                val += excess * excess;
                worst = worst.max(excess * excess);
                let c = 2.0 * excess * dev.signum();
                for (gi, gg) in grad.iter_mut().zip(&grads[m]) {
                    *gi += c * gg;
                }
            }
        }
        (val, worst, grad)
    };
    let mut step = 0.5;
    let (mut fx, mut worst, mut gx) = eval(x);
    for _ in 0..6 * opts.max_inner {
        if worst <= target {
            return;
        }
        let mut accepted = false;
        for _ in 0..50 {
            let xn: Vec<f64> = x
                .iter()
                .zip(&gx)
                .map(|(&v, &g)| clamp(v - step * g))
                .collect();
            let (fn_, wn, gn) = eval(&xn);
            if fn_ < fx {
                *x = xn;
                fx = fn_;
                worst = wn;
                gx = gn;
                accepted = true;
                step = (step * 1.5).min(50.0);
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return;
        }
    }
}

/// Entropy ascent that repairs feasibility after every accepted step and
/// returns the best feasible iterate seen. The step shrinks when a move
/// (after repair) stops improving the entropy.
fn ascent_with_repair(problem: &Problem, x0: &[f64], opts: &SolverOptions) -> Vec<f64> {
    let entropy_of = |x: &[f64]| -> f64 { x.iter().map(|&v| binary_entropy(v)).sum() };
    let feasible = |x: &[f64]| -> bool {
        let (ts, _) = problem.densities(x);
        problem.residuals(&ts).iter().all(|&r| r <= opts.feas_tol)
    };
    let mut x = x0.to_vec();
    if !feasible(&x) {
        return x;
    }
    let mut best = x.clone();
    let mut best_h = entropy_of(&x);
    let mut step = 0.05f64;
    for _ in 0..opts.max_inner {
        let mut cand: Vec<f64> = x
            .iter()
            .map(|&v| {
                let vc = v.clamp(1e-12, 1.0 - 1e-12);
                (v + step * ((1.0 - vc) / vc).ln()).clamp(0.0, 1.0)
            })
            .collect();
        restore_feasibility(problem, &mut cand, opts);
        let h = entropy_of(&cand);
        if feasible(&cand) && h > best_h + 1e-14 {
            best = cand.clone();
            best_h = h;
            x = cand;
            step = (step * 1.3).min(0.5);
        } else {
            step *= 0.5;
            if step < 1e-7 {
                break;
            }
        }
    }
    best
}

/// One augmented-Lagrangian run from a start point. Returns the end point and
/// whether the inner loop reached its gradient tolerance at the final outer
/// iteration.
fn augmented_lagrangian(problem: &Problem, x0: &[f64], opts: &SolverOptions) -> (Vec<f64>, bool) {
    let d = problem.spec.d();
    let mut x = x0.to_vec();
    restore_feasibility(problem, &mut x, opts);
    // two inequality constraints per density: +(t - phi - gt) and -(t - phi) - gt
    let mut lambda = vec![0.0f64; 2 * d];
    let mut mu = 10.0f64;
    let mut converged = false;
    let mut last_viol = f64::INFINITY;

    let clamp = |v: f64| v.clamp(0.0, 1.0);
    for _outer in 0..opts.max_outer {
        // inner: projected gradient with backtracking on the AL objective
        let eval = |x: &[f64], lambda: &[f64], mu: f64| -> (f64, Vec<f64>) {
            let (ts, grads) = problem.densities(x);
            let mut val: f64 = -x.iter().map(|&v| binary_entropy(v)).sum::<f64>();
            let mut grad: Vec<f64> = x
                .iter()
                .map(|&v| {
                    let vc = v.clamp(1e-12, 1.0 - 1e-12);
                    -((1.0 - vc) / vc).ln()
                })
                .collect();
            for m in 0..d {
                let g1 = ts[m] - problem.spec.phi[m] - problem.gamma_tilde[m];
                let g2 = problem.spec.phi[m] - ts[m] - problem.gamma_tilde[m];
                for (c, gval, sign) in [(2 * m, g1, 1.0), (2 * m + 1, g2, -1.0)] {
                    let t = lambda[c] + mu * gval;
                    if t > 0.0 {
                        val += (t * t - lambda[c] * lambda[c]) / (2.0 * mu);
                        for (gi, gg) in grad.iter_mut().zip(&grads[m]) {
                            *gi += t * sign * gg;
                        }
                    } else {
                        val += -lambda[c] * lambda[c] / (2.0 * mu);
                    }
                }
            }
            (val, grad)
        };

        let mut step = 0.1;
        let mut inner_converged = false;
        let (mut fx, mut gx) = eval(&x, &lambda, mu);
        for _inner in 0..opts.max_inner {
            // projected gradient norm
            let pg: f64 = x
                .iter()
                .zip(&gx)
                .map(|(&v, &g)| {
                    let moved = clamp(v - g);
                    (moved - v).abs()
                })
                .fold(0.0, f64::max);
            if pg <= opts.grad_tol {
                inner_converged = true;
                break;
            }
            // backtracking line search
            let mut accepted = false;
            for _ in 0..60 {
                let xn: Vec<f64> = x
                    .iter()
                    .zip(&gx)
                    .map(|(&v, &g)| clamp(v - step * g))
                    .collect();
                let (fn_, gn) = eval(&xn, &lambda, mu);
                let decrease: f64 = x
                    .iter()
                    .zip(&xn)
                    .zip(&gx)
                    .map(|((&a, &b), &g)| g * (a - b))
                    .sum();
                if fn_ <= fx - 1e-4 * decrease.max(0.0) + 1e-15 {
                    x = xn;
                    fx = fn_;
                    gx = gn;
                    accepted = true;
                    step = (step * 1.6).min(10.0);
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                inner_converged = true;
                break;
            }
        }

        // multiplier update
        let (ts, _) = problem.densities(&x);
        let mut viol = 0.0f64;
        for m in 0..d {
            let g1 = ts[m] - problem.spec.phi[m] - problem.gamma_tilde[m];
            let g2 = problem.spec.phi[m] - ts[m] - problem.gamma_tilde[m];
            lambda[2 * m] = (lambda[2 * m] + mu * g1).max(0.0);
            lambda[2 * m + 1] = (lambda[2 * m + 1] + mu * g2).max(0.0);
            viol = viol.max(g1.max(0.0)).max(g2.max(0.0));
        }
        if viol <= opts.feas_tol * 0.1 && inner_converged {
            converged = true;
            break;
        }
        if viol > 0.25 * last_viol {
            mu = (mu * 4.0).min(1e12);
        }
        last_viol = viol;
    }
    (x, converged)
}


#[cfg(test)]
mod restoration_tests {
    use super::*;

    #[test]
    fn restore_reaches_window() {
        let spec = ConstraintSpec::new(
            vec![Graph::complete(2), Graph::complete(3)],
            vec![0.4, 0.1],
            vec![0.02, 0.02],
            6,
            0.0,
        )
        .unwrap();
        let problem = Problem::new(&spec).unwrap();
        let opts = SolverOptions::default();
        let mut x = vec![0.5; 15];
        x[0] = 0.6;
        restore_feasibility(&problem, &mut x, &opts);
        let (ts, _) = problem.densities(&x);
        let res = problem.residuals(&ts);
        assert!(res.iter().all(|&r| r <= opts.feas_tol), "res = {res:?}");
    }
}
