//! Energy refinement on a planted two-block graph: the trivial partition is
//! far from uniform, one witness-driven refinement step recovers the planted
//! structure, and the energy rises accordingly.
//!
//! Run: cargo run --release --example szemeredi_refine

use histograph::graph::Graph;
use histograph::szemeredi::{partition_energy, refine_step, regular_decompose, Partition};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> histograph::Result<()> {
    // planted structure on 24 vertices: A1-B1 and A2-B2 complete, nothing else
    let half = 6;
    let n = 4 * half;
    let mut g = Graph::empty(n);
    for i in 0..half {
        for j in 0..half {
            g.add_edge(i, 2 * half + j);
            g.add_edge(half + i, 3 * half + j);
        }
    }
    let mut assignment = vec![1usize; n];
    for v in 2 * half..n {
        assignment[v] = 2;
    }
    let p = Partition { assignment, k: 2 };
    let eps = 0.4;
    println!("planted two-block graph, trivial 2-part partition:");
    println!("  q(P) = {:.5}", partition_energy(&g, &p));
    let out = refine_step(&g, &p, eps)?;
    println!(
        "  refined into k = {} parts, gain = {:.5} (eps^5 = {:.5}), exact witnesses = {}",
        out.partition.k,
        out.gained,
        eps.powi(5),
        out.all_exact
    );

    // a G(n, 1/2) sample is already eps-uniform for moderate eps
    let mut rng = StdRng::seed_from_u64(7);
    let n = 300;
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(0.5) {
                g.add_edge(u, v);
            }
        }
    }
    let dec = regular_decompose(&g, 0.3, 64, 3)?;
    println!("\nG(300, 1/2), eps = 0.3, starting from 3 parts:");
    println!("  status: {:?}, final k = {}", dec.status, dec.partition.k);
    println!(
        "  type entries: {:?}",
        dec.stype
            .s
            .iter()
            .map(|s| format!("{s:.3}"))
            .collect::<Vec<_>>()
    );
    println!(
        "  audit: {}/{} pairs non-uniform (allowed {:.1}), |C_0| = {}",
        dec.audit.non_uniform_pairs,
        dec.audit.pairs,
        dec.audit.allowed_non_uniform,
        dec.audit.c0_size
    );
    println!("  energy trace: {:?}", dec.energy_trace);
    Ok(())
}
