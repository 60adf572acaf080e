//! Continuous weights bracketed by their grid discretizations.
//!
//! ```bash
//! cargo run --release --example sandwich
//! ```

use wsir::harness::{sandwich_experiment, ExperimentConfig};

fn main() -> wsir::Result<()> {
    let cfg = ExperimentConfig::parse(
        "dist = 1:1\nrho_uniform = 0, 2\ntheta = 0.2\np = 0.1\nlambda = 3\n\
         n_list = 1000\nreplicates = 20\nobs_times = 0.5, 1\nmaster_seed = 7\n",
    )?;
    println!("{:>3} {:>4} {:>10} {:>10} {:>10} {:>8}", "m", "t", "S lower", "S", "S upper", "ordered");
    for r in sandwich_experiment(&cfg, &[1, 4, 16])? {
        println!(
            "{:>3} {:>4} {:>10.4} {:>10.4} {:>10.4} {:>8}",
            r.m, r.t, r.s_lower.mean, r.s_exact.mean, r.s_upper.mean, r.s_ordered
        );
    }
    Ok(())
}
