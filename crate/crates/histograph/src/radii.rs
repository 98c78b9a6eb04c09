//! KS/moment equivalence machinery: the Esseen–Fainleib upper bound on KS
//! distance from moment gaps, the outer radii gamma (moment gaps implied by a
//! KS ball) and the inner radii beta (density gaps that force KS closeness),
//! plus verification helpers for both directions.

use serde::Serialize;

use crate::coeffs::c_coefficients_padded;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::pattern::RootedPattern;

/// The constant in the Esseen–Fainleib inequality; the source bound is
/// c <= 51. Overridable in the radii options.
pub const ESSEEN_FAINLEIB_C: f64 = 51.0;

fn ln_factorial(d: usize) -> f64 {
    (2..=d).map(|i| (i as f64).ln()).sum()
}

/// The tail term e^T * T^(d+1) / (d! * d), computed in log space.
fn tail_term(t: f64, d: usize) -> f64 {
    let ln = t + (d as f64 + 1.0) * t.ln() - ln_factorial(d) - (d as f64).ln();
    ln.exp()
}

/// KS(p, q) <= c * (S_p(1/T) + e^T * (gamma + T^(d+1)/(d! d))), clipped to 1.
pub fn ks_upper_bound(p: &Distribution, gamma: f64, d: usize, t: f64, c: f64) -> f64 {
    assert!(t > 1.0, "T must exceed 1");
    assert!(gamma >= 0.0);
    let raw = c * (p.concentration(1.0 / t) + t.exp() * gamma + tail_term(t, d));
    raw.min(1.0)
}

/// Minimize the bound over a T grid; returns (bound, argmin T).
pub fn ks_upper_bound_optimized(p: &Distribution, gamma: f64, d: usize, c: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 2.0);
    for i in 0..=400 {
        // log grid on (1, 10^4]
        let t = 1.0 + 10f64.powf(-2.0 + 6.0 * i as f64 / 400.0);
        let v = ks_upper_bound(p, gamma, d, t, c);
        if v < best.0 {
            best = (v, t);
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRadii {
    pub gamma: Vec<f64>,
    /// Separately reported finite-n slack for each entry (the O(1/n) term);
    /// zero when n is not supplied.
    pub finite_n_slack: f64,
}

/// Outer radii: gamma_m = (2 m c_m / a) E X^m delta, with a the density lower
/// bound of the reference. Requires an absolutely continuous reference.
pub fn gamma_radii(
    p: &Distribution,
    f: &RootedPattern,
    d: usize,
    delta: f64,
    n: Option<usize>,
) -> Result<GammaRadii> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::validation("delta must lie in [0, 1]"));
    }
    let a = match p.density_min() {
        Some(a) if a > 0.0 => a,
        Some(_) => {
            return Err(Error::validation(
                "reference density must be bounded away from zero",
            ))
        }
        None => {
            return Err(Error::validation(
                "outer radii need a piecewise reference density",
            ))
        }
    };
    let c = c_coefficients_padded(f, d)?;
    let gamma: Vec<f64> = (1..=d)
        .map(|m| 2.0 * m as f64 * c[m - 1] / a * p.moment(m as u32) * delta)
        .collect();
    let cmax = c.iter().cloned().fold(f64::MIN, f64::max);
    let finite_n_slack = n.map(|n| 10.0 * cmax / n as f64).unwrap_or(0.0);
    Ok(GammaRadii {
        gamma,
        finite_n_slack,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaRadii {
    pub beta: Vec<f64>,
    pub t_star: f64,
    pub feasible: bool,
}

/// Inner radii: beta_m = c_m * (e^{-T}(delta/c - S_p(1/T)) - T^(d+1)/(d! d)),
/// maximized over T > 1 by a log grid refined with golden-section search.
/// Infeasible (all beta <= 0) is a result, not an error.
pub fn beta_radii(
    p: &Distribution,
    f: &RootedPattern,
    d: usize,
    delta: f64,
    c_ef: f64,
) -> Result<BetaRadii> {
    if !(0.0 < delta && delta <= 1.0) {
        return Err(Error::validation("delta must lie in (0, 1]"));
    }
    let objective = |t: f64| -> f64 {
        (-t).exp() * (delta / c_ef - p.concentration(1.0 / t)) - tail_term(t, d)
    };
    // seed with a log grid, then golden-section around the best point
    let grid: Vec<f64> = (0..=600)
        .map(|i| 1.0 + 10f64.powf(-2.0 + 6.0 * i as f64 / 600.0))
        .collect();
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        let v = objective(t);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (
        grid[best_i.saturating_sub(1)],
        grid[(best_i + 1).min(grid.len() - 1)],
    );
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        }
    }
    let (t_refined, v_refined) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    let (t_star, val) = if v_refined > best_v {
        (t_refined, v_refined)
    } else {
        (grid[best_i], best_v)
    };
    let feasible = val > 0.0;
    let c = c_coefficients_padded(f, d)?;
    let beta: Vec<f64> = (1..=d).map(|m| (c[m - 1] * val).max(0.0)).collect();
    Ok(BetaRadii {
        beta,
        t_star,
        feasible,
    })
}

/// Assembled radii around one reference distribution.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichRadii {
    pub delta: f64,
    pub gamma: GammaRadii,
    pub beta: BetaRadii,
}

pub fn sandwich_radii(
    p: &Distribution,
    f: &RootedPattern,
    d: usize,
    delta: f64,
    n: Option<usize>,
) -> Result<SandwichRadii> {
    Ok(SandwichRadii {
        delta,
        gamma: gamma_radii(p, f, d, delta, n)?,
        beta: beta_radii(p, f, d, delta, ESSEEN_FAINLEIB_C)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentGapVerdict {
    pub holds: bool,
    /// Per-order measured |E X^m - E Y^m|.
    pub gaps: Vec<f64>,
    pub threshold: f64,
}

/// Forward direction: KS(p, q) <= delta implies every moment gap <= delta.
/// Returns the measured gaps against the exact KS distance.
pub fn moments_close_from_ks(p: &Distribution, q: &Distribution, d: usize) -> MomentGapVerdict {
    let ks = p.ks_distance(q);
    let gaps: Vec<f64> = (1..=d as u32)
        .map(|m| (p.moment(m) - q.moment(m)).abs())
        .collect();
    let holds = gaps.iter().all(|g| *g <= ks + 1e-12);
    MomentGapVerdict {
        holds,
        gaps,
        threshold: ks,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KsFromMomentsVerdict {
    pub holds: bool,
    pub ks: f64,
    pub bound: f64,
    pub t_star: f64,
}

/// Reverse direction: the exact KS distance is covered by the optimized
/// Esseen–Fainleib bound fed with the largest measured moment gap.
pub fn ks_from_moments_close(p: &Distribution, q: &Distribution, d: usize) -> KsFromMomentsVerdict {
    let gamma = (1..=d as u32)
        .map(|m| (p.moment(m) - q.moment(m)).abs())
        .fold(0.0, f64::max);
    let (bound, t_star) = ks_upper_bound_optimized(p, gamma, d, ESSEEN_FAINLEIB_C);
    let ks = p.ks_distance(q);
    KsFromMomentsVerdict {
        holds: ks <= bound + 1e-12,
        ks,
        bound,
        t_star,
    }
}
