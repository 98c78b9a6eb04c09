//! Empirical counting-lemma audit: block-model samples around a type should
//! have F-densities within 5 eps^(1/(r-2)) of the type's mean density.
//!
//! Run: cargo run --release --example counting_lemma_audit

use histograph::graph::Graph;
use histograph::oracle::{block_sample, counting_lemma_audit};
use histograph::szemeredi::SzemerediType;
use histograph::typedensity::{mean_density, mean_density_collision, mean_density_mc};

fn main() -> histograph::Result<()> {
    let s = SzemerediType::constant(4, 0.1, 0.5);
    let k3 = Graph::complete(3);

    // the two density semantics: distinct parts vs collisions allowed
    let poly = mean_density(&s, &k3)?;
    let coll = mean_density_collision(&s, &k3)?;
    let (mc, se) = mean_density_mc(&s, &k3, 100_000, 7)?;
    println!("t(S, K3) polynomial = {poly:.5}, collision = {coll:.5}, MC = {mc:.5} ± {se:.5}");

    let rep = counting_lemma_audit(&s, &k3, 50, 20, 0.1, 11)?;
    println!("\naudit with k = 4, g = 50, 20 samples, eps = 0.1:");
    println!("  bound 5 eps^(1/(r-2)) = {:.3}", rep.bound);
    println!(
        "  max |t(G,F) - t(S,F)| = {:.5}, mean = {:.5}",
        rep.max_abs_deviation, rep.mean_abs_deviation
    );
    println!(
        "  uniform partitions: {}/{} (outside formal hypothesis: {})",
        rep.uniform_partitions, rep.trials, rep.outside_hypothesis
    );

    // one concrete sample
    let g = block_sample(&s, 50, 3)?;
    println!(
        "\nsample: n = {}, edges = {} (expected {})",
        g.n(),
        g.edge_count(),
        (4 * 3 / 2) * 50 * 50 / 2
    );
    Ok(())
}
