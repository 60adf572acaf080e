//! Unit weights on the complete graph against the classical SIR equations.
//!
//! ```bash
//! cargo run --release --example classical_sir
//! ```

use wsir::graph::Graph;
use wsir::limit::classical_limit;
use wsir::sim::{run_replicates, GraphSource, ModelParams};
use wsir::weights::WeightDistribution;

fn main() -> wsir::Result<()> {
    let (theta, lambda) = (0.05, 2.0);
    let times: Vec<f64> = (0..=10).map(f64::from).collect();
    let ode = classical_limit(theta, lambda, &times, 1e-10)?;
    let dist = WeightDistribution::constant(1.0)?;

    for n in [500, 4000] {
        let g = Graph::complete(n);
        let params = ModelParams::new(n, 1.0, lambda, theta)?;
        let stats = run_replicates(GraphSource::Shared(&g), &dist, &params, &times, 20, 5)?;
        let worst = (0..times.len())
            .map(|i| (stats.s[i].mean - ode.s[i]).abs().max((stats.v[i].mean - ode.v[i]).abs()))
            .fold(0.0, f64::max);
        println!("n = {n:>5}: sup |mean - ODE| = {worst:.4}");
    }
    println!("final s = {:.6}, r = {:.6}", ode.s[10], ode.r[10]);
    Ok(())
}
