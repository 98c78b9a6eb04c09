//! Probability distributions on [0, 1]: piecewise-constant densities and
//! empirical atom sets, with exact KS distance, 1-Wasserstein distance,
//! concentration function, and raw moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Distribution {
    Piecewise {
        /// Strictly increasing breakpoints in `[0, 1]`; `densities[i]` applies
        /// on `[breaks[i], breaks[i+1])`.
        breaks: Vec<f64>,
        densities: Vec<f64>,
    },
    Empirical {
        /// Sorted atoms in [0, 1], each with mass 1/len.
        atoms: Vec<f64>,
    },
}

impl Distribution {
    pub fn piecewise(breaks: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        let d = Distribution::Piecewise { breaks, densities };
        d.validate()?;
        Ok(d)
    }

    pub fn empirical(mut atoms: Vec<f64>) -> Result<Self> {
        atoms.sort_by(|a, b| a.partial_cmp(b).expect("no NaN atoms"));
        let d = Distribution::Empirical { atoms };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform() -> Self {
        Distribution::Piecewise {
            breaks: vec![0.0, 1.0],
            densities: vec![1.0],
        }
    }

    pub fn point_mass(c: f64) -> Self {
        Distribution::Empirical { atoms: vec![c] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Piecewise { breaks, densities } => {
                if breaks.len() < 2 || densities.len() != breaks.len() - 1 {
                    return Err(Error::validation(
                        "piecewise distribution needs k+1 breaks for k densities",
                    ));
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::validation("breaks must be strictly increasing"));
                }
                if breaks[0] < -MASS_TOL || breaks[breaks.len() - 1] > 1.0 + MASS_TOL {
                    return Err(Error::validation("support must lie in [0, 1]"));
                }
                if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
                    return Err(Error::validation("densities must be finite and >= 0"));
                }
                let mass: f64 = breaks
                    .windows(2)
                    .zip(densities)
                    .map(|(w, d)| (w[1] - w[0]) * d)
                    .sum();
                if (mass - 1.0).abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "total mass {mass} differs from 1"
                    )));
                }
                Ok(())
            }
            Distribution::Empirical { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::validation("empirical distribution needs atoms"));
                }
                if atoms
                    .iter()
                    .any(|a| !(-MASS_TOL..=1.0 + MASS_TOL).contains(a))
                {
                    return Err(Error::validation("atoms must lie in [0, 1]"));
                }
                if atoms.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::validation("atoms must be sorted"));
                }
                Ok(())
            }
        }
    }

    /// Minimum density value for piecewise distributions; None for empirical.
    pub fn density_min(&self) -> Option<f64> {
        match self {
            Distribution::Piecewise { densities, .. } => densities
                .iter()
                .cloned()
                .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.min(d)))),
            Distribution::Empirical { .. } => None,
        }
    }

    pub fn density_max(&self) -> Option<f64> {
        match self {
            Distribution::Piecewise { densities, .. } => densities
                .iter()
                .cloned()
                .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d)))),
            Distribution::Empirical { .. } => None,
        }
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Piecewise { breaks, densities } => {
                if x < breaks[0] {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (w, d) in breaks.windows(2).zip(densities) {
                    if x >= w[1] {
                        acc += (w[1] - w[0]) * d;
                    } else {
                        acc += (x - w[0]) * d;
                        return acc;
                    }
                }
                acc
            }
            Distribution::Empirical { atoms } => {
                let k = atoms.partition_point(|&a| a <= x);
                k as f64 / atoms.len() as f64
            }
        }
    }

    /// P(X < x), the left limit of the CDF at x.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::Piecewise { .. } => self.cdf(x),
            Distribution::Empirical { atoms } => {
                let k = atoms.partition_point(|&a| a < x);
                k as f64 / atoms.len() as f64
            }
        }
    }

    /// Locations where either CDF can change slope or jump.
    fn change_points(&self) -> Vec<f64> {
        match self {
            Distribution::Piecewise { breaks, .. } => breaks.clone(),
            Distribution::Empirical { atoms } => atoms.clone(),
        }
    }

    /// Exact Kolmogorov-Smirnov distance: sup_x |P(x) - Q(x)|, evaluated at
    /// all breakpoints and atoms from both sides.
    pub fn ks_distance(&self, other: &Distribution) -> f64 {
        let mut candidates = self.change_points();
        candidates.extend(other.change_points());
        candidates.push(0.0);
        candidates.push(1.0);
        let mut sup: f64 = 0.0;
        for &x in &candidates {
            let right = (self.cdf(x) - other.cdf(x)).abs();
            let left = (self.cdf_left(x) - other.cdf_left(x)).abs();
            sup = sup.max(right).max(left);
        }
        sup
    }

    /// Exact 1-Wasserstein distance on [0, 1]: the integral of |P - Q|.
    /// Both CDFs are piecewise linear, so integrate segment by segment,
    /// splitting at sign changes.
    pub fn wasserstein1(&self, other: &Distribution) -> f64 {
        let mut xs = self.change_points();
        xs.extend(other.change_points());
        xs.push(0.0);
        xs.push(1.0);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mut total = 0.0;
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            // On (a, b) both CDFs are linear (empirical CDFs are constant).
            // Use right limit at a and left limit at b.
            let fa = {
                // right limit at a: P(X <= a) works for both variants
                self.cdf(a) - other.cdf(a)
            };
            let fb = self.cdf_left(b) - other.cdf_left(b);
            let len = b - a;
            total += if fa * fb >= 0.0 {
                (fa.abs() + fb.abs()) / 2.0 * len
            } else {
                // sign change: split at the root of the linear function
                let t = fa.abs() / (fa.abs() + fb.abs());
                (fa.abs() * t + fb.abs() * (1.0 - t)) / 2.0 * len
            };
        }
        total
    }

    /// Concentration function: the largest mass of any closed window
    /// [x, x + a]. Exact for both variants.
    pub fn concentration(&self, a: f64) -> f64 {
        assert!(
            (0.0..=1.0 + MASS_TOL).contains(&a),
            "window length in [0, 1]"
        );
        match self {
            Distribution::Piecewise { breaks, .. } => {
                // window mass is piecewise linear in x; extremes at positions
                // where either window edge hits a breakpoint
                let mut candidates: Vec<f64> = breaks
                    .iter()
                    .flat_map(|&b| [b, b - a])
                    .filter(|&x| (-a..=1.0).contains(&x))
                    .collect();
                candidates.push(0.0);
                candidates.push(1.0 - a);
                candidates
                    .into_iter()
                    .map(|x| self.cdf(x + a) - self.cdf(x))
                    .fold(0.0, f64::max)
            }
            Distribution::Empirical { atoms } => {
                // optimal closed window starts at an atom
                let n = atoms.len();
                let mut best = 0usize;
                for i in 0..n {
                    let j = atoms.partition_point(|&y| y <= atoms[i] + a + 1e-15);
                    best = best.max(j - i);
                }
                best as f64 / n as f64
            }
        }
    }

    /// Raw moment E X^m, exact per bin / atom.
    pub fn moment(&self, m: u32) -> f64 {
        match self {
            Distribution::Piecewise { breaks, densities } => {
                breaks
                    .windows(2)
                    .zip(densities)
                    .map(|(w, d)| d * (w[1].powi(m as i32 + 1) - w[0].powi(m as i32 + 1)))
                    .sum::<f64>()
                    / (m as f64 + 1.0)
            }
            Distribution::Empirical { atoms } => {
                atoms.iter().map(|a| a.powi(m as i32)).sum::<f64>() / atoms.len() as f64
            }
        }
    }

    /// Moments E X^1 .. E X^d.
    pub fn moments(&self, d: usize) -> Vec<f64> {
        (1..=d as u32).map(|m| self.moment(m)).collect()
    }
}

/// Moments with the density-approximation coefficients c_m and the products
/// phi_m = c_m * E X^m.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub d: usize,
    pub moments: Vec<f64>,
    pub c_coeffs: Vec<f64>,
    pub phi: Vec<f64>,
}
