//! Jacobian of the mean-density map, its smallest singular value, and the
//! effective radius: the smallest L1 ball in type space certified to move
//! densities by the counting-lemma resolution.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::szemeredi::SzemerediType;
use crate::typedensity::mean_density_with_grad;

/// J is C(k,2) x d: column m holds the partial derivatives of t(S, F_m) with
/// respect to each upper-triangle entry. Returns (J, sigma_min).
pub fn density_jacobian(s: &SzemerediType, family: &[Graph]) -> Result<(Vec<Vec<f64>>, f64)> {
    let pairs = s.k * (s.k - 1) / 2;
    let d = family.len();
    let mut j = vec![vec![0.0f64; d]; pairs];
    for (m, f) in family.iter().enumerate() {
        let (_, grad) = mean_density_with_grad(s, f)?;
        for (row, g) in j.iter_mut().zip(grad) {
            row[m] = g;
        }
    }
    let sigma = sigma_min(&j);
    Ok((j, sigma))
}

/// Smallest singular value of a tall matrix by one-sided Jacobi rotations
/// (columns orthogonalized in place, singular values read off as column
/// norms). Unlike the Gram-matrix route, near-zero singular values come out
/// at machine precision instead of sqrt(eps) noise, which the rank-deficiency
/// detection relies on.
pub fn sigma_min(j: &[Vec<f64>]) -> f64 {
    let d = j.first().map(|r| r.len()).unwrap_or(0);
    let rows = j.len();
    if d == 0 || rows == 0 {
        return 0.0;
    }
    // column-major copy
    let mut cols: Vec<Vec<f64>> = (0..d).map(|c| j.iter().map(|r| r[c]).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..d {
            for q in (p + 1)..d {
                let (mut app, mut aqq, mut apq) = (0.0f64, 0.0f64, 0.0f64);
                for i in 0..rows {
                    app += cols[p][i] * cols[p][i];
                    aqq += cols[q][i] * cols[q][i];
                    apq += cols[p][i] * cols[q][i];
                }
                if apq.abs() <= 1e-18 * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                rotated = true;
                let theta = 0.5 * (2.0 * apq).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                for i in 0..rows {
                    let (vp, vq) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * vp + s * vq;
                    cols[q][i] = -s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &mut [Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0]];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let (api, aqi) = (a[p][i], a[q][i]);
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveRadiusOptions {
    pub samples: usize,
    pub descent_steps: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for EffectiveRadiusOptions {
    fn default() -> Self {
        EffectiveRadiusOptions {
            samples: 256,
            descent_steps: 64,
            grid: 48,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveRadius {
    pub rho: f64,
    /// True when no radius satisfied the defining inequality and the sentinel
    /// C(k, 2) was returned.
    pub sentinel: bool,
    /// Sampled estimate of the minimal singular value inside the chosen ball.
    pub sigma_estimate: f64,
    pub target: f64,
    /// The sigma estimate is a sampled upper bound on the true ball minimum,
    /// so rho may be underestimated.
    pub annotation: String,
}

/// Sampled upper estimate of min sigma_min(J(S')) over the L1 ball of radius
/// rho around s (L1 over unordered pairs, entries projected to [0, 1]); the
/// center is always included, and a projected local descent from the worst
/// sample sharpens the estimate.
pub fn sigma_in_ball(
    s: &SzemerediType,
    family: &[Graph],
    rho: f64,
    opts: &EffectiveRadiusOptions,
    salt: u64,
) -> Result<f64> {
    let pairs = s.k * (s.k - 1) / 2;
    let mut rng = StdRng::seed_from_u64(opts.seed ^ salt);
    let (_, sigma_center) = density_jacobian(s, family)?;
    let mut best = sigma_center;
    let mut worst_point = s.clone();

    let project = |base: &SzemerediType, dir: &[f64], scale: f64| -> SzemerediType {
        let mut out = base.clone();
        for (i, v) in out.s.iter_mut().enumerate() {
            *v = (*v + dir[i] * scale).clamp(0.0, 1.0);
        }
        out
    };

    for _ in 0..opts.samples {
        let dir: Vec<f64> = (0..pairs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l1: f64 = dir.iter().map(|v| v.abs()).sum();
        if l1 == 0.0 {
            continue;
        }
        let scale = rho * rng.gen_range(0.0..=1.0) / l1;
        let cand = project(s, &dir, scale);
        let (_, sig) = density_jacobian(&cand, family)?;
        if sig < best {
            best = sig;
            worst_point = cand;
        }
    }
    // local descent from the worst sample, staying inside the ball
    let mut current = worst_point;
    let mut step = rho / 8.0;
    for _ in 0..opts.descent_steps {
        let mut improved = false;
        for idx in 0..pairs {
            for sgn in [-1.0, 1.0] {
                let mut cand = current.clone();
                cand.s[idx] = (cand.s[idx] + sgn * step).clamp(0.0, 1.0);
                if cand.l1_distance(s) > rho {
                    continue;
                }
                let (_, sig) = density_jacobian(&cand, family)?;
                if sig < best {
                    best = sig;
                    current = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < rho * 1e-4 {
                break;
            }
        }
    }
    Ok(best)
}

/// Smallest rho with rho * sigma(rho, S) >= 10 d eps^(1/r_bar), by a log-grid
/// scan refined with bisection; the sentinel C(k, 2) when no grid point
/// satisfies the inequality.
pub fn effective_radius(
    s: &SzemerediType,
    family: &[Graph],
    eps: f64,
    opts: &EffectiveRadiusOptions,
) -> Result<EffectiveRadius> {
    let d = family.len();
    let r_bar = family.iter().map(|f| f.n()).max().unwrap_or(2);
    let target = 10.0 * d as f64 * eps.powf(1.0 / r_bar as f64);
    let max_rho = (s.k * (s.k - 1) / 2) as f64;
    let annotation = "sigma estimated by sampling plus local descent; \
                      it upper-bounds the true ball minimum, so rho may be underestimated"
        .to_string();

    let mut found: Option<(f64, f64)> = None;
    let mut last_fail = 0.0f64;
    for i in 0..=opts.grid {
        let rho = max_rho * 10f64.powf(-6.0 + 6.0 * i as f64 / opts.grid as f64);
        let sig = sigma_in_ball(s, family, rho, opts, i as u64)?;
        if rho * sig >= target {
            found = Some((rho, sig));
            break;
        }
        last_fail = rho;
    }
    let Some((mut rho_ok, mut sig_ok)) = found else {
        let sig = sigma_in_ball(s, family, max_rho, opts, u64::MAX)?;
        return Ok(EffectiveRadius {
            rho: max_rho,
            sentinel: true,
            sigma_estimate: sig,
            target,
            annotation,
        });
    };
    // bisect between the last failing and first passing radius
    let mut lo = last_fail;
    for i in 0..24 {
        let mid = if lo == 0.0 {
            rho_ok / 2.0
        } else {
            0.5 * (lo + rho_ok)
        };
        let sig = sigma_in_ball(s, family, mid, opts, 1000 + i)?;
        if mid * sig >= target {
            rho_ok = mid;
            sig_ok = sig;
        } else {
            lo = mid;
        }
        if rho_ok - lo < 1e-6 * max_rho {
            break;
        }
    }
    Ok(EffectiveRadius {
        rho: rho_ok,
        sentinel: false,
        sigma_estimate: sig_ok,
        target,
        annotation,
    })
}
