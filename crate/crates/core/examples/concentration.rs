//! Cross-edge concentration and the per-class lower bounds from one shared
//! replicate study.
//!
//! ```bash
//! cargo run --release --example concentration
//! ```

use wsir::harness::experiments::{corollary_from_study, lemma1_from_study};
use wsir::harness::{load_config, run_study};

fn main() -> wsir::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quick.conf").into());
    let cfg = load_config(&path)?;
    let study = run_study(&cfg)?;

    let corollary = corollary_from_study(&cfg, &study)?;
    for s in &corollary.sup {
        println!("n = {:>6}: mean sup_t discrepancy = {:.5}", s.n, s.sup.mean);
    }
    for row in lemma1_from_study(&cfg, &study, cfg.lemma_t)? {
        println!(
            "n = {:>6} class {} {}: bound {:.4} held in {}/{} replicates",
            row.n,
            row.class,
            row.bound.label(),
            row.threshold,
            row.satisfied,
            row.replicates
        );
    }
    Ok(())
}
