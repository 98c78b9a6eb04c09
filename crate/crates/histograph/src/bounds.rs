//! Assembly of the size bounds: scalar density shifts, the class-size
//! continuity bound, type-count and class-size bookkeeping, and the
//! upper/lower reports for densities sets and histogram balls with every
//! slack term itemized.

use num_bigint::BigUint;
use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::jacobian::{effective_radius, EffectiveRadius, EffectiveRadiusOptions};
use crate::maxent::{
    binary_entropy, solve_max_entropy, ConstraintSpec, MaxEntSolution, SolverOptions,
};
use crate::pattern::RootedPattern;
use crate::radii::{beta_radii, gamma_radii, ESSEEN_FAINLEIB_C};
use crate::szemeredi::SzemerediType;
use crate::typedensity::mean_density;

// ---------------------------------------------------------------------------
// scalar shift (single density, multiplicative path)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ScalarShift {
    pub s_bar: SzemerediType,
    pub alpha: f64,
    /// +1 toward all-ones, -1 toward all-zeros.
    pub direction: i8,
    pub achieved_density: f64,
    pub l1_move: f64,
    /// (|phi - phi'| / (1 - min(phi, phi')))^(1/C(r,2)) * C(k,2).
    pub lemma_bound: f64,
    pub within_bound: bool,
}

/// Move S along the path S + alpha(1 - S) (or the mirrored S(1 - alpha) for
/// downward targets) until t(S_bar, F) = phi_prime, by bisection on the
/// monotone path parameter. Reports the L1 move against the stated bound.
pub fn scalar_shift(s: &SzemerediType, f: &Graph, phi_prime: f64) -> Result<ScalarShift> {
    if !(0.0..=1.0).contains(&phi_prime) {
        return Err(Error::validation("target density must lie in [0, 1]"));
    }
    let phi = mean_density(s, f)?;
    let upward = phi_prime >= phi;
    let at = |alpha: f64| -> Result<(SzemerediType, f64)> {
        let mut sb = s.clone();
        for v in sb.s.iter_mut() {
            *v = if upward {
                *v + alpha * (1.0 - *v)
            } else {
                *v * (1.0 - alpha)
            };
        }
        let t = mean_density(&sb, f)?;
        Ok((sb, t))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (_, t) = at(mid)?;
        let overshoot = if upward {
            t >= phi_prime
        } else {
            t <= phi_prime
        };
        if overshoot {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha = hi;
    let (s_bar, achieved) = at(alpha)?;
    if (achieved - phi_prime).abs() > 1e-8 {
        return Err(Error::infeasible(format!(
            "bisection stalled at t = {achieved} for target {phi_prime}"
        )));
    }
    let l1_move = s_bar.l1_distance(s);
    let r = f.n();
    let cr2 = (r * (r - 1) / 2) as f64;
    let k2 = (s.k * (s.k - 1) / 2) as f64;
    let dmin = 1.0 - phi.min(phi_prime);
    let lemma_bound = if (phi - phi_prime).abs() == 0.0 || dmin <= 0.0 {
        0.0
    } else {
        ((phi - phi_prime).abs() / dmin).powf(1.0 / cr2) * k2
    };
    Ok(ScalarShift {
        s_bar,
        alpha,
        direction: if upward { 1 } else { -1 },
        achieved_density: achieved,
        l1_move,
        lemma_bound,
        within_bound: l1_move <= lemma_bound + 1e-9,
    })
}

// ---------------------------------------------------------------------------
// continuity of class sizes in the type matrix
// ---------------------------------------------------------------------------

/// Per-edge class-size continuity bound 5 h(||S1 - S2||_1 / (4 k^2)).
pub fn continuity_bound(s1: &SzemerediType, s2: &SzemerediType) -> Result<f64> {
    if s1.k != s2.k {
        return Err(Error::validation("types must share k"));
    }
    let l1 = s1.l1_distance(s2);
    let k2 = (s1.k * s1.k) as f64;
    Ok(5.0 * binary_entropy(l1 / (4.0 * k2)))
}

/// Proof-level inequality: H(S2) - H(S1) <= 5 k^2 h(||S1 - S2||_1 / (4 k^2)).
/// Returns (measured gap, bound).
pub fn entropy_gap_check(s1: &SzemerediType, s2: &SzemerediType) -> Result<(f64, f64)> {
    if s1.k != s2.k {
        return Err(Error::validation("types must share k"));
    }
    let h1: f64 = s1.s.iter().map(|&v| binary_entropy(v)).sum();
    let h2: f64 = s2.s.iter().map(|&v| binary_entropy(v)).sum();
    let k2 = (s1.k * s1.k) as f64;
    let bound = 5.0 * k2 * binary_entropy(s1.l1_distance(s2) / (4.0 * k2));
    Ok(((h2 - h1).abs(), bound))
}

// ---------------------------------------------------------------------------
// counting bookkeeping
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CombinatorialBounds {
    /// log of the type-count bound (n^2/k^2 + 1)^(k^2), in nats.
    pub log_type_count: f64,
    /// Exact value when k divides n.
    pub type_count_exact: Option<String>,
    /// 8k/n, and whether log(type count)/n^2 <= 8k/n held.
    pub eight_k_over_n: f64,
    pub type_count_within_8k_over_n: bool,
    /// Per-edge class-size window [H/k^2 + lower_slack, H/k^2 + 2 eps].
    pub class_size_lower_per_edge: f64,
    pub class_size_upper_per_edge: f64,
    /// Lower o_eps(1) term in nats (negative); None when the irregular
    /// fraction bound is vacuous at these parameters.
    pub o_eps_lower: Option<f64>,
}

/// Type-count and class-size bounds at the given parameters.
pub fn combinatorial_bounds(
    n: usize,
    k: usize,
    eps: f64,
    s: &SzemerediType,
) -> Result<CombinatorialBounds> {
    if n < k || k == 0 {
        return Err(Error::validation("need n >= k >= 1"));
    }
    let nf = n as f64;
    let kf = k as f64;
    let log_type_count = kf * kf * (nf * nf / (kf * kf) + 1.0).ln();
    let type_count_exact = if n.is_multiple_of(k) {
        let base = BigUint::from((n / k) * (n / k) + 1);
        Some(base.pow((k * k) as u32).to_string())
    } else {
        None
    };
    let eight = 8.0 * kf / nf;
    let within = log_type_count / (nf * nf) <= eight + 1e-12;

    let (h, _) = crate::maxent::entropy(s);
    let per_edge = h / (kf * kf);
    let g = nf / kf;
    // irregular-fraction exponent (derived form): 2^(-2 eps^4 g^2 + 2g + 2 log2 g + 1)
    let frac_exp = -2.0 * eps.powi(4) * g * g + 2.0 * g + 2.0 * g.log2() + 1.0;
    let o_eps_lower = if frac_exp < 0.0 {
        let frac = 2f64.powf(frac_exp);
        let term = -(kf * kf * (2.0 * g.log2() + 1.0) * std::f64::consts::LN_2) / (nf * nf)
            + (1.0 - frac).ln() / (nf * nf);
        Some(term)
    } else {
        None
    };
    Ok(CombinatorialBounds {
        log_type_count,
        type_count_exact,
        eight_k_over_n: eight,
        type_count_within_8k_over_n: within,
        class_size_lower_per_edge: per_edge + o_eps_lower.unwrap_or(f64::NEG_INFINITY),
        class_size_upper_per_edge: per_edge + 2.0 * eps,
        o_eps_lower,
    })
}

// ---------------------------------------------------------------------------
// size-bound reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SlackTerms {
    /// 5 h(rho/4k^2), or the scalar-case 5 h(c eps^(1/r^3)).
    pub continuity: f64,
    /// 2 eps from the class-size bound.
    pub class_size: f64,
    /// 8 k / n from the type count.
    pub type_count: f64,
    /// 5 eps^(1/r_bar), already folded into the solver windows.
    pub counting_lemma: f64,
    /// Finite-n slack added to the outer radii (histogram path).
    pub gamma_finite_n: Option<f64>,
    /// An unquantified o_eps(1) term remains on top of the numbers above.
    pub o_eps_flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeBoundsReport {
    pub target: String,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub d: usize,
    /// Per-edge entropy of the maximizer under the outer (gamma) windows.
    pub upper_center: f64,
    /// Per-edge entropy under the inner (beta) windows; None when vacuous.
    pub lower_center: Option<f64>,
    pub upper: f64,
    pub lower: Option<f64>,
    pub lower_vacuous_reason: Option<String>,
    pub slack: SlackTerms,
    pub rho: EffectiveRadius,
    pub scalar_constant: Option<f64>,
    pub upper_solution: MaxEntSolution,
    pub lower_solution: Option<MaxEntSolution>,
}

/// Theorem-3 constant for the scalar case.
fn scalar_constant(phi: f64, gamma: f64, r: usize) -> f64 {
    let cr2 = (r * (r - 1) / 2) as f64;
    if phi + gamma < 1.0 {
        (10.0 / (1.0 - phi - gamma)).powf(1.0 / cr2)
    } else {
        (10.0 / (1.0 - phi + gamma)).powf(1.0 / cr2)
    }
}

fn continuity_slack(spec: &ConstraintSpec, rho: &EffectiveRadius, n: usize) -> (f64, Option<f64>) {
    let k2 = (spec.k * spec.k) as f64;
    if spec.d() == 1 {
        let r = spec.family[0].n();
        let c = scalar_constant(spec.phi[0], spec.gamma[0], r);
        let arg = c * spec.eps.powf(1.0 / (r as f64).powi(3));
        (5.0 * binary_entropy(arg.min(0.5)), Some(c))
    } else {
        let _ = n;
        (5.0 * binary_entropy(rho.rho / (4.0 * k2)), None)
    }
}

/// Size bounds for the densities set B(phi, gamma): both sides centered on
/// the per-edge entropy of the constrained maximizer, with the continuity,
/// class-size, and type-count slack itemized.
pub fn densities_size_bounds(
    spec: &ConstraintSpec,
    n: usize,
    solver: &SolverOptions,
    radius_opts: &EffectiveRadiusOptions,
) -> Result<SizeBoundsReport> {
    let sol = solve_max_entropy(spec, solver)?;
    let rho = effective_radius(&sol.s_star, &spec.family, spec.eps, radius_opts)?;
    let (cont, scalar_c) = continuity_slack(spec, &rho, n);
    let slack_total = cont + 2.0 * spec.eps + 8.0 * spec.k as f64 / n as f64;
    let center = sol.per_edge_entropy;
    let slack = SlackTerms {
        continuity: cont,
        class_size: 2.0 * spec.eps,
        type_count: 8.0 * spec.k as f64 / n as f64,
        counting_lemma: spec.counting_slack(),
        gamma_finite_n: None,
        o_eps_flagged: true,
    };
    Ok(SizeBoundsReport {
        target: "densities-set".into(),
        n,
        k: spec.k,
        eps: spec.eps,
        d: spec.d(),
        upper_center: center,
        lower_center: Some(center),
        upper: center + slack_total,
        lower: Some(center - slack_total),
        lower_vacuous_reason: None,
        slack,
        rho,
        scalar_constant: scalar_c,
        upper_solution: sol,
        lower_solution: None,
    })
}

/// Size bounds for the histogram ball Hist(p, F, delta): reduce to density
/// windows via the moment machinery (outer gamma radii with their finite-n
/// slack, inner beta radii when feasible) and solve both ends.
#[allow(clippy::too_many_arguments)]
pub fn hist_size_bounds(
    p: &Distribution,
    f: &RootedPattern,
    delta: f64,
    d: usize,
    k: usize,
    eps: f64,
    n: usize,
    solver: &SolverOptions,
    radius_opts: &EffectiveRadiusOptions,
) -> Result<SizeBoundsReport> {
    let rep = crate::coeffs::phi_vector(p, f, d)?;
    let gamma = gamma_radii(p, f, d, delta, Some(n))?;
    let beta = beta_radii(p, f, d, delta, ESSEEN_FAINLEIB_C)?;
    let family: Vec<Graph> = (1..=d)
        .map(|m| f.merge_at_root(m).map(|fm| fm.graph))
        .collect::<Result<_>>()?;

    let phi: Vec<f64> = rep.phi.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
    let gamma_total: Vec<f64> = gamma
        .gamma
        .iter()
        .map(|g| (g + gamma.finite_n_slack).min(1.0))
        .collect();
    let upper_spec = ConstraintSpec::new(family.clone(), phi.clone(), gamma_total, k, eps)?;
    let upper_sol = solve_max_entropy(&upper_spec, solver)?;
    let rho = effective_radius(&upper_sol.s_star, &family, eps, radius_opts)?;
    let (cont, scalar_c) = continuity_slack(&upper_spec, &rho, n);
    let slack_total = cont + 2.0 * eps + 8.0 * k as f64 / n as f64;

    // inner bound: shrink beta by the finite-n slack; vacuous when nothing
    // remains
    let mut lower_center = None;
    let mut lower = None;
    let mut lower_solution = None;
    let mut lower_vacuous_reason = None;
    if beta.feasible {
        let beta_eff: Vec<f64> = beta
            .beta
            .iter()
            .map(|b| (b - gamma.finite_n_slack).max(0.0))
            .collect();
        if beta_eff.iter().any(|&b| b > 0.0) {
            let lower_spec = ConstraintSpec::new(family.clone(), phi.clone(), beta_eff, k, eps)?;
            match solve_max_entropy(&lower_spec, solver) {
                Ok(sol) => {
                    lower_center = Some(sol.per_edge_entropy);
                    lower = Some(sol.per_edge_entropy - slack_total);
                    lower_solution = Some(sol);
                }
                Err(Error::Infeasible(msg)) => {
                    lower_vacuous_reason = Some(format!("inner solve infeasible: {msg}"));
                }
                Err(e) => return Err(e),
            }
        } else {
            lower_vacuous_reason = Some("beta radii consumed by the finite-n slack".into());
        }
    } else {
        lower_vacuous_reason =
            Some("beta radii infeasible for every T (inner bound vacuous)".into());
    }

    Ok(SizeBoundsReport {
        target: "histogram".into(),
        n,
        k,
        eps,
        d,
        upper_center: upper_sol.per_edge_entropy,
        lower_center,
        upper: upper_sol.per_edge_entropy + slack_total,
        lower,
        lower_vacuous_reason,
        slack: SlackTerms {
            continuity: cont,
            class_size: 2.0 * eps,
            type_count: 8.0 * k as f64 / n as f64,
            counting_lemma: upper_spec.counting_slack(),
            gamma_finite_n: Some(gamma.finite_n_slack),
            o_eps_flagged: true,
        },
        rho,
        scalar_constant: scalar_c,
        upper_solution: upper_sol,
        lower_solution,
    })
}
