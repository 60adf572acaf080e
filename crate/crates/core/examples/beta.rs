//! Sampled maximal cross-edge deviation beta(c, d, n) / n^2 as n grows.
//!
//! ```bash
//! cargo run --release --example beta
//! ```

use wsir::graph::{estimate_beta, generate_er};

fn main() -> wsir::Result<()> {
    let p = 0.1;
    for n in [250, 500, 1000, 2000] {
        let g = generate_er(n, p, n as u64)?;
        let beta = estimate_beta(&g, p, 0.25, 0.25, 200, 1)?;
        println!("n = {n:>5}: beta = {beta:>9.1}, beta / n^2 = {:.6}", beta / (n * n) as f64);
    }
    Ok(())
}
