//! Moving a type to a prescribed scalar density: bisection along the
//! monotone mixing path, with the L1 move checked against its bound.
//!
//! Run: cargo run --release --example scalar_shift

use histograph::bounds::{continuity_bound, entropy_gap_check, scalar_shift};
use histograph::graph::Graph;
use histograph::szemeredi::SzemerediType;
use histograph::typedensity::mean_density;

fn main() -> histograph::Result<()> {
    let k3 = Graph::complete(3);

    // from the empty type, density 0.027 needs exactly alpha = 0.3
    let zeros = SzemerediType::constant(5, 0.0, 0.0);
    let shift = scalar_shift(&zeros, &k3, 0.027)?;
    println!(
        "all-zeros -> t = 0.027: alpha = {:.6}, L1 move = {:.4}, bound = {:.4} (tight)",
        shift.alpha, shift.l1_move, shift.lemma_bound
    );

    // a generic downward move
    let mut s = SzemerediType::constant(5, 0.0, 0.0);
    let vals = [0.7, 0.4, 0.9, 0.2, 0.6, 0.5, 0.8, 0.3, 0.55, 0.45];
    for (idx, v) in vals.into_iter().enumerate() {
        s.s[idx] = v;
    }
    let phi = mean_density(&s, &k3)?;
    let target = phi / 2.0;
    let shift = scalar_shift(&s, &k3, target)?;
    println!(
        "\nt = {phi:.4} -> {target:.4}: alpha = {:.4} (direction {}), move {:.4} <= bound {:.4}: {}",
        shift.alpha, shift.direction, shift.l1_move, shift.lemma_bound, shift.within_bound
    );

    // nearby types have nearby class sizes: the continuity bound
    let bound = continuity_bound(&s, &shift.s_bar)?;
    let (gap, proof_bound) = entropy_gap_check(&s, &shift.s_bar)?;
    println!(
        "\nclass-size continuity: per-edge bound {bound:.4} nats; entropy gap {gap:.4} <= {proof_bound:.4}"
    );
    Ok(())
}
