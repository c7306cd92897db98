//! Spectral gap of the Laplacian mixing matrix on a few topologies.
//!
//! ```text
//! cargo run --release --example spectral_gap
//! ```

use mudag::graph::{build_mixing_matrix, generate_erdos_renyi, generate_named, spectral_quantities, Topology};

fn main() -> mudag::Result<()> {
    println!("{:<16} {:>6} {:>10} {:>10} {:>12}", "network", "edges", "lambda2", "gap", "fastmix base");
    let mut rows = Vec::new();
    for topology in [Topology::Path, Topology::Ring, Topology::Star, Topology::Complete] {
        rows.push((format!("{topology:?} 20").to_lowercase(), generate_named(topology, 20)?));
    }
    for p in [0.1, 0.3, 0.5] {
        rows.push((format!("er 20 p={p}"), generate_erdos_renyi(20, p, 7)?));
    }
    for (name, g) in rows {
        let w = build_mixing_matrix(&g)?;
        let s = spectral_quantities(&w);
        println!(
            "{name:<16} {:>6} {:>10.5} {:>10.5} {:>12.5}",
            g.num_edges(),
            s.lambda2,
            s.gap,
            s.contraction_base()
        );
    }
    Ok(())
}
