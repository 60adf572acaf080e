//! Weight distributions: moments, generalized moments, sampling and the
//! grid discretizations that bracket a continuous weight law.
//!
//! ```bash
//! cargo run --example weights
//! ```

use wsir::weights::{discretize, sample_assignment, Rounding, WeightDistribution};

fn main() -> wsir::Result<()> {
    let dist = WeightDistribution::parse_spec("1:0.5, 2:0.3, 4:0.2")?;
    println!("dist       = {}", dist.to_spec_string());
    println!("E[rho]     = {}", dist.mean());
    println!("E[rho^2]   = {}", dist.moment(2));
    println!("M1         = {}", dist.max_weight());
    for x in [0.25, 0.5, 1.0] {
        println!(
            "x = {x:<4}  E[x^rho] = {:.6}  E[rho x^rho] = {:.6}",
            dist.generalized_moment(x, false)?,
            dist.generalized_moment(x, true)?
        );
    }

    let w = sample_assignment(&dist, 10_000, 42);
    let mut counts = vec![0usize; w.num_classes()];
    for &c in w.class_of() {
        counts[c as usize] += 1;
    }
    println!("empirical class frequencies over 10000 vertices: {counts:?}");

    let samples = [0.07, 0.5, 1.33, 1.99];
    for m in [1, 4, 16] {
        println!(
            "m = {m:>2}  lower {:?}  upper {:?}",
            discretize(&samples, m, Rounding::Lower)?,
            discretize(&samples, m, Rounding::Upper)?
        );
    }
    Ok(())
}
