//! One exact realization of the weighted SIR process, printed as CSV.
//!
//! ```bash
//! cargo run --example trajectory > trajectory.csv
//! ```

use wsir::graph::generate_er;
use wsir::sim::{init_states, simulate, ModelParams};
use wsir::weights::{sample_assignment, WeightDistribution};

fn main() -> wsir::Result<()> {
    let n = 1000;
    let params = ModelParams::new(n, 0.1, 3.0, 0.2)?;
    let dist = WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)])?;

    let g = generate_er(n, params.p, 10)?;
    let w = sample_assignment(&dist, n, 11);
    let init = init_states(n, params.theta, 12);
    let obs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();

    let traj = simulate(&g, &w, &params, &init, &obs, 13)?;
    eprintln!("{} events", traj.event_count);
    traj.write_csv(std::io::stdout().lock()).expect("stdout");
    Ok(())
}
