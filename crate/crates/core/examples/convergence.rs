//! Law-of-large-numbers study driven by a config file.
//!
//! ```bash
//! cargo run --release --example convergence -- crates/core/configs/quick.conf
//! ```

use wsir::harness::{load_config, lln_experiment};

fn main() -> wsir::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quick.conf").into());
    let cfg = load_config(&path)?;
    let report = lln_experiment(&cfg)?;
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "max err_S", "max err_V", "mean err_S");
    for s in &report.summary {
        println!("{:>6} {:>12.5} {:>12.5} {:>12.5}", s.n, s.max_err_s, s.max_err_v, s.mean_err_s);
    }
    for b in &report.beta {
        println!("n = {:>6}: beta / n^2 = {:.5}", b.n, b.beta_over_n2);
    }
    Ok(())
}
