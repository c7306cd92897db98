//! Accelerated gossip against plain gossip on a ring.
//!
//! ```text
//! cargo run --release --example fastmix_consensus
//! ```

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use mudag::consensus::{consensus_error, fastmix, fastmix_exact_contraction, plain_mix, IterateBlock};
use mudag::graph::{build_mixing_matrix, generate_named, Topology};

fn main() -> mudag::Result<()> {
    let m = 30;
    let w = build_mixing_matrix(&generate_named(Topology::Ring, m)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = IterateBlock::from_array(Array2::from_shape_fn((m, 3), |_| StandardNormal.sample(&mut rng)));
    let start = consensus_error(&x);
    println!("ring m={m}, lambda2={:.5}", w.lambda2());
    println!("{:>4} {:>14} {:>14} {:>14}", "K", "plain", "fastmix", "certificate");
    for k in [1, 5, 10, 20, 40, 80] {
        let plain = consensus_error(&plain_mix(&x, &w, k)?) / start;
        let fast = consensus_error(&fastmix(&x, &w, k)?) / start;
        println!("{k:>4} {plain:>14.3e} {fast:>14.3e} {:>14.3e}", fastmix_exact_contraction(&w, k));
    }
    Ok(())
}
