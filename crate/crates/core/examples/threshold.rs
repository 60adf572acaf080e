//! Final susceptible fraction across infection rates around the critical rate.
//!
//! ```bash
//! cargo run --release --example threshold
//! ```

use wsir::harness::{threshold_sweep, ExperimentConfig};

fn main() -> wsir::Result<()> {
    let cfg = ExperimentConfig::parse(
        "dist = 1:0.5, 2:0.5\ntheta = 0.01\np = 0.05\nlambda = 1\n\
         n_list = 2000\nreplicates = 10\nobs_times = 0\nmaster_seed = 2\n",
    )?;
    for r in threshold_sweep(&cfg, &[])? {
        println!(
            "lambda = {:>8.4} ({:>4.2} x lambda_c)  final S/n = {:.4} +- {:.4} {}",
            r.lambda,
            r.ratio,
            r.final_s.mean,
            r.final_s.std,
            if r.critical { "<- lambda_c" } else { "" }
        );
    }
    Ok(())
}
