//! Moment-to-density coefficients.
//!
//! The m-th moment of the normalized F-degree distribution approximates the
//! F^m-density of the graph up to a constant factor c_m and an O(1/n) error.
//! Both n * b_{F,n}^m and the properly normalized copy polynomial of F^m are
//! polynomials in n of degree m(r-1)+1; c_m is the ratio of their leading
//! coefficients, extracted exactly by evaluating the counts at integer points
//! and solving the Vandermonde system in rational arithmetic.
//!
//! The normalizer multiplies the F^m copy count in K_n by the number of ways
//! an F^m copy decomposes into m root-sharing F copies and by the number of
//! admissible root positions per copy; with that bookkeeping the leading
//! ratio is exactly 1 for every pattern, which is what makes the sandwich
//! inclusions hold. (The coefficient and the Vandermonde route are kept as a
//! structural self-check and for the stated coefficient bound.)

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::counting::extremal_counts;
use crate::dist::{Distribution, MomentReport};
use crate::error::{Error, Result};
use crate::pattern::RootedPattern;

type Rat = Ratio<BigInt>;

/// Solve a (D+1)x(D+1) Vandermonde system for polynomial coefficients from
/// exact values at distinct integer points. Plain Gaussian elimination over
/// rationals; systems here are at most 9x9.
fn vandermonde_solve(points: &[i64], values: &[Rat]) -> Vec<Rat> {
    let n = points.len();
    assert_eq!(n, values.len());
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let x = Rat::from(BigInt::from(points[i]));
            let mut row = Vec::with_capacity(n + 1);
            let mut p = Rat::one();
            for _ in 0..n {
                row.push(p.clone());
                p *= x.clone();
            }
            row.push(values[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("distinct points");
        a.swap(col, pivot);
        let inv = a[col][col].clone();
        for c in col..=n {
            a[col][c] /= inv.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let sub = f.clone() * a[col][c].clone();
                    a[r][c] -= sub;
                }
            }
        }
    }
    (0..n).map(|r| a[r][n].clone()).collect()
}

fn big_to_rat(b: &BigUint) -> Rat {
    Rat::from(BigInt::from(b.clone()))
}

/// Exact c_m for m = 1..d as rationals.
pub fn c_coefficients_exact(f: &RootedPattern, d: usize) -> Result<Vec<Rat>> {
    if d == 0 {
        return Err(Error::validation("need d >= 1"));
    }
    let r = f.r();
    let mut out = Vec::with_capacity(d);
    for m in 1..=d {
        let fm = f.merge_at_root(m)?;
        let degree = m * (r - 1) + 1;
        let npoints = degree + 2;
        // decomposition count x root multiplicity:
        //   kappa = root_aut(F^m) / (root_aut(F)^m * m!)
        //   omega = aut(F^m) / root_aut(F^m)
        // so kappa * omega * m! = aut(F^m) / root_aut(F)^m.
        let ra_pow = BigUint::from(f.root_aut_count).pow(m as u32);
        let aut_m = BigUint::from(fm.aut_count);
        let kappa_omega_mfact = Rat::new(BigInt::from(aut_m), BigInt::from(ra_pow));

        let base = fm.r() as i64;
        let points: Vec<i64> = (0..npoints as i64).map(|j| base + j).collect();
        let mut num_vals = Vec::with_capacity(npoints);
        let mut den_vals = Vec::with_capacity(npoints);
        for &n in &points {
            let (b, _) = extremal_counts(f, n as usize)?;
            let (_, c_m_n) = extremal_counts(&fm, n as usize)?;
            let bp = big_to_rat(&b);
            let mut num = Rat::from(BigInt::from(n));
            for _ in 0..m {
                num *= bp.clone();
            }
            num_vals.push(num);
            den_vals.push(kappa_omega_mfact.clone() * big_to_rat(&c_m_n));
        }
        let num_poly = vandermonde_solve(&points, &num_vals);
        let den_poly = vandermonde_solve(&points, &den_vals);
        // both polynomials must have the stated degree
        let lead_num = num_poly[degree].clone();
        let lead_den = den_poly[degree].clone();
        debug_assert!(num_poly[degree + 1].is_zero());
        debug_assert!(den_poly[degree + 1].is_zero());
        debug_assert!(!lead_den.is_zero());
        let c = lead_num / lead_den;
        // stated coefficient bound
        let bound = BigUint::from(degree).pow(degree as u32);
        debug_assert!(c.clone().abs() <= Rat::from(BigInt::from(bound)));
        out.push(c);
    }
    Ok(out)
}

/// c_m for m = 1..d as floats.
pub fn c_coefficients(f: &RootedPattern, d: usize) -> Result<Vec<f64>> {
    Ok(c_coefficients_exact(f, d)?
        .into_iter()
        .map(|c| c.to_f64().expect("coefficient fits in f64"))
        .collect())
}

/// c_m for large d: the Vandermonde extraction runs while F^m fits under the
/// merge cap and the remaining orders are filled with the structural value 1
/// (the leading coefficients of the numerator and the decomposition-normalized
/// copy polynomial agree identically, so the ratio is 1 for every pattern;
/// the computed prefix re-verifies that).
pub fn c_coefficients_padded(f: &RootedPattern, d: usize) -> Result<Vec<f64>> {
    let r = f.r();
    let constructible = if r < 2 {
        0
    } else {
        ((crate::pattern::MERGE_VERTEX_CAP - 1) / (r - 1)).min(d)
    };
    let mut out = c_coefficients(f, constructible.max(1).min(d))?;
    debug_assert!(out.iter().all(|&c| (c - 1.0).abs() < 1e-12));
    out.resize(d, 1.0);
    Ok(out)
}

/// phi_m = c_m * E X^m for m = 1..d.
pub fn phi_vector(p: &Distribution, f: &RootedPattern, d: usize) -> Result<MomentReport> {
    let c_coeffs = c_coefficients(f, d)?;
    let moments = p.moments(d);
    let phi = c_coeffs.iter().zip(&moments).map(|(c, m)| c * m).collect();
    Ok(MomentReport {
        d,
        moments,
        c_coeffs,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_recovers_polynomial() {
        // p(x) = 3x^2 - x + 7
        let points = [2i64, 3, 5, 9];
        let values: Vec<Rat> = points
            .iter()
            .map(|&x| Rat::from(BigInt::from(3 * x * x - x + 7)))
            .collect();
        let coeffs = vandermonde_solve(&points, &values);
        let expect = [7i64, -1, 3, 0];
        for (c, e) in coeffs.iter().zip(expect) {
            assert_eq!(*c, Rat::from(BigInt::from(e)));
        }
    }

    #[test]
    fn edge_coefficients_are_one() {
        // n(n-1)^m against the decomposition-normalized star-copy polynomial:
        // the leading terms agree exactly
        let edge = RootedPattern::named("edge").unwrap();
        for c in c_coefficients_exact(&edge, 3).unwrap() {
            assert_eq!(c, Rat::one());
        }
    }

    #[test]
    fn triangle_coefficients_are_one() {
        let tri = RootedPattern::named("triangle").unwrap();
        for c in c_coefficients_exact(&tri, 3).unwrap() {
            assert_eq!(c, Rat::one());
        }
    }

    #[test]
    fn cherry_coefficients_are_one() {
        // path3 rooted at the center; F^2 is the 4-star whose copies each
        // decompose into 3 cherry pairs, absorbed by the normalizer
        let cherry = RootedPattern::named("cherry").unwrap();
        for c in c_coefficients_exact(&cherry, 2).unwrap() {
            assert_eq!(c, Rat::one());
        }
    }

    #[test]
    fn phi_examples() {
        let edge = RootedPattern::named("edge").unwrap();
        let rep = phi_vector(&Distribution::uniform(), &edge, 1).unwrap();
        assert!((rep.phi[0] - 0.5).abs() < 1e-12);
        let rep = phi_vector(&Distribution::point_mass(1.0), &edge, 2).unwrap();
        assert!((rep.phi[0] - 1.0).abs() < 1e-12);
        assert!((rep.phi[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_approximates_density_on_complete_graphs() {
        // on K_n the normalized F-degree distribution is a point mass at 1 and
        // every merge-power density is exactly 1; phi must match
        use crate::counting::{f_degree_distribution, merge_power_density};
        use crate::graph::Graph;
        for name in ["edge", "triangle", "cherry"] {
            let f = RootedPattern::named(name).unwrap();
            let g = Graph::complete(9);
            let p = f_degree_distribution(&g, &f).unwrap();
            let rep = phi_vector(&p, &f, 2).unwrap();
            for m in 1..=2usize {
                let t = merge_power_density(&g, &f, m).unwrap();
                assert!(
                    (rep.phi[m - 1] - t).abs() < 1e-12,
                    "{name} m={m}: phi={} t={t}",
                    rep.phi[m - 1]
                );
            }
        }
    }
}
