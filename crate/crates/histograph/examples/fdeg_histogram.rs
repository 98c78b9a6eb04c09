//! Compute the normalized F-degree distribution of a graph and its KS
//! distance to a reference, for a few built-in patterns.
//!
//! Run: cargo run --release --example fdeg_histogram

use histograph::counting::{f_degree_distribution, rooted_copy_counts};
use histograph::dist::Distribution;
use histograph::graph::Graph;
use histograph::pattern::RootedPattern;

fn main() -> histograph::Result<()> {
    // a small graph: two triangles sharing an edge, plus a pendant vertex
    let g = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4)])?;
    println!("graph: n = {}, edges = {:?}", g.n(), g.edges());

    for name in ["edge", "triangle", "path3"] {
        let f = RootedPattern::named(name)?;
        let fd = rooted_copy_counts(&g, &f)?;
        println!(
            "\npattern {name}: raw degrees {:?} (max possible {})",
            fd.raw_degrees
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>(),
            fd.b_max
        );
        let dist = f_degree_distribution(&g, &f)?;
        let ks = dist.ks_distance(&Distribution::uniform());
        println!("normalized distribution: {}", serde_json::to_string(&dist)?);
        println!("KS distance to Uniform[0,1]: {ks:.4}");
    }

    // on the complete graph every triangle degree is maximal
    let k6 = Graph::complete(6);
    let f = RootedPattern::named("triangle")?;
    let dist = f_degree_distribution(&k6, &f)?;
    println!(
        "\nK_6 triangle histogram collapses to a point mass at 1: KS to point(1) = {}",
        dist.ks_distance(&Distribution::point_mass(1.0))
    );
    Ok(())
}
