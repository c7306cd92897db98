//! Decentralized smooth strongly convex optimization over networks.
//!
//! The crate simulates `m` agents connected by an undirected graph. Each agent
//! owns a private objective `f_i`, and together they minimize the average
//! `f(x) = (1/m) Σ f_i(x)` by exchanging vectors with their neighbours only.
//!
//! Main pieces:
//!
//! - [`graph`]: network topologies, the Laplacian mixing matrix `W` and its
//!   spectral gap.
//! - [`consensus`]: accelerated gossip ([`consensus::fastmix`]) and plain
//!   gossip over `m × d` iterate blocks.
//! - [`objective`]: local objective families (logistic regression, quadratics),
//!   smoothness constants, LIBSVM ingestion and the centralized reference
//!   solution.
//! - [`mudag`]: multi-consensus accelerated gradient tracking, in both its
//!   direct and `(x, y, s)` tracking forms, with parameter rules and
//!   Lyapunov/spectral diagnostics.
//! - [`baselines`]: centralized AGD, DGD, EXTRA and NIDS.
//! - [`harness`]: config-driven experiments, sweeps, CSV traces and SVG plots.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! spectral_gap         gap of W on named and random topologies
//! fastmix_consensus    accelerated vs plain gossip
//! mudag_quadratic      one Mudag run with its Lyapunov value
//! logistic_benchmark   Mudag against AGD, DGD, EXTRA and NIDS
//! nonconvex_locals     convex vs non-convex splits of one objective
//! theoretical_k        analysis-driven gossip depth vs tuned depths
//! libsvm_loading       LIBSVM ingestion and partitioning
//! run_experiment       config-driven run with traces, manifest and plot
//! ```
//!
//! Run one with `cargo run --release --example <name>`.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod consensus;
mod error;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod mudag;
pub mod objective;
pub mod trace;

pub use error::{Error, Result};
