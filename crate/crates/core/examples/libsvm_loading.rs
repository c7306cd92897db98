//! Parse LIBSVM text, split it across agents and solve the centralized problem.
//!
//! ```text
//! cargo run --release --example libsvm_loading [path/to/data.libsvm]
//! ```

use std::path::Path;

use mudag::objective::{load_libsvm, logistic_problem, parse_libsvm, partition, solve_reference};

const INLINE: &str = "\
+1 1:0.5 3:1.2
-1 2:0.7 3:-0.4
+1 1:1.1 2:0.1
-1 1:-0.9 3:0.3
+1 2:1.4 3:0.9
-1 1:-0.2 2:-1.0
";

fn main() -> mudag::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(path) => load_libsvm(Path::new(&path), None)?,
        None => parse_libsvm(INLINE, Path::new("inline"), None)?,
    };
    println!("{} samples, {} features", data.len(), data.dim());
    let shards = partition(&data, 3, 0)?;
    let problem = logistic_problem(&shards, &[1e-2; 3])?;
    let c = problem.constants();
    println!("L={:.4} mu={:.4} M={:.4}", c.l, c.mu, c.m_local);
    let sol = solve_reference(&problem, 1e-10)?;
    println!("f*={:.6} after {} iterations, x*={:.4}", sol.f_star, sol.iterations, sol.x_star);
    Ok(())
}
