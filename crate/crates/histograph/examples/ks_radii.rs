//! Distribution metrics and the KS-ball radii: exact KS / Wasserstein
//! distances, the concentration function, and the outer/inner radii that
//! convert a KS ball into density windows.
//!
//! Run: cargo run --release --example ks_radii

use histograph::dist::Distribution;
use histograph::pattern::RootedPattern;
use histograph::radii::{ks_upper_bound_optimized, sandwich_radii};

fn main() -> histograph::Result<()> {
    let uniform = Distribution::uniform();
    let empirical = Distribution::empirical(vec![0.2, 0.4, 0.4, 0.7])?;

    println!(
        "KS(empirical, uniform)  = {:.4}",
        empirical.ks_distance(&uniform)
    );
    println!(
        "W1(empirical, uniform)  = {:.4}",
        empirical.wasserstein1(&uniform)
    );
    for a in [0.1, 0.25, 0.5] {
        println!(
            "S_uniform({a}) = {:.3}   S_empirical({a}) = {:.3}",
            uniform.concentration(a),
            empirical.concentration(a)
        );
    }

    // moment gaps control KS distance through the Esseen-Fainleib bound
    let (bound, t_star) = ks_upper_bound_optimized(&uniform, 0.001, 40, 51.0);
    println!("\nKS upper bound from moment gap 0.001 at d = 40: {bound:.4} (T* = {t_star:.1})");

    // radii for a triangle histogram ball around the uniform reference
    let f = RootedPattern::named("triangle")?;
    for delta in [0.05, 0.2, 0.4] {
        let r = sandwich_radii(&uniform, &f, 3, delta, Some(200))?;
        println!(
            "\ndelta = {delta}: gamma = {:?} (+{:.3} finite-n), beta feasible = {}",
            r.gamma
                .gamma
                .iter()
                .map(|g| format!("{g:.3}"))
                .collect::<Vec<_>>(),
            r.gamma.finite_n_slack,
            r.beta.feasible
        );
    }

    // the inner radii only open up at large d
    let r = sandwich_radii(&uniform, &RootedPattern::named("edge")?, 500, 1.0, None)?;
    println!(
        "\nd = 500, delta = 1: beta_1 = {:.3e}, T* = {:.1}, feasible = {}",
        r.beta.beta[0], r.beta.t_star, r.beta.feasible
    );
    Ok(())
}
