//! Run a subcommand programmatically and read back the JSON summary.
//!
//! ```bash
//! cargo run --example reports -- /tmp/wsir-reports
//! ```

use std::path::PathBuf;

use clap::Parser;
use wsir::harness::cli::{run, Cli};
use wsir::harness::load_summary;

fn main() -> wsir::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir).join("limit");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quick.conf");
    let cli = Cli::parse_from(["wsir", "limit", "--config", config, "--out", out.to_str().unwrap()]);
    for path in run(&cli)? {
        println!("wrote {}", path.display());
    }
    let summary = load_summary(&out.join("summary.json"))?;
    println!("command {} v{}, seed {}", summary.command, summary.version, summary.seeds.master_seed);
    for (k, v) in &summary.notes {
        println!("  {k} = {v}");
    }
    Ok(())
}
