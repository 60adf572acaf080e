//! Deterministic limit: the scalar psi equation, the per-class system and the
//! time-changed closed form, side by side.
//!
//! ```bash
//! cargo run --example limit_curves
//! ```

use wsir::limit::{
    extinction_exposure, lambda_critical, solve_component_ode, solve_psi, solve_time_change,
    uniform_grid, LimitParams,
};
use wsir::weights::WeightDistribution;

fn main() -> wsir::Result<()> {
    let dist = WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)])?;
    let lp = LimitParams::new(dist.clone(), 0.2, 0.5, 2.0)?;
    let grid = uniform_grid(10.0, 0.5);
    let tol = 1e-9;

    let a = solve_psi(&lp, &grid, tol)?;
    let b = solve_component_ode(&lp, &grid, tol)?;
    let c = solve_time_change(&lp, &grid, tol)?;

    println!("lambda_c = {}", lambda_critical(&dist, 0.5)?);
    let u_star = extinction_exposure(&lp)?;
    println!("final psi = {:.10}", (-lp.rate() * u_star).exp());
    println!("{:>5} {:>14} {:>14} {:>14} {:>10}", "t", "H_S", "H_V", "psi", "max gap");
    for i in 0..grid.len() {
        let gap = [
            (a.hs[i] - b.hs[i]).abs(),
            (a.hs[i] - c.hs[i]).abs(),
            (a.hv[i] - b.v[i]).abs(),
            (a.hv[i] - c.v[i]).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        println!("{:>5.1} {:>14.10} {:>14.10} {:>14.10} {:>10.1e}", grid[i], a.hs[i], a.hv[i], a.psi[i], gap);
    }
    Ok(())
}
