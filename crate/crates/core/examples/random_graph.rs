//! Sample G(n, p), inspect degrees and cross-edge counts, and round-trip the
//! edge list.
//!
//! ```bash
//! cargo run --example random_graph -- 2000 0.05
//! ```

use wsir::graph::{cross_edges, generate_er, Graph};

fn main() -> wsir::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let p: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);

    let g = generate_er(n, p, 1)?;
    let expected = p * (n * (n - 1) / 2) as f64;
    println!("n = {n}, p = {p}: {} edges (expected {expected:.0})", g.edge_count());

    let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mean = degrees.iter().sum::<usize>() as f64 / n as f64;
    let (lo, hi) = (degrees.iter().min().unwrap(), degrees.iter().max().unwrap());
    println!("degree mean {mean:.2} (expected {:.2}), range [{lo}, {hi}]", p * (n - 1) as f64);

    let c: Vec<usize> = (0..n / 4).collect();
    let d: Vec<usize> = (n / 4..n / 2).collect();
    let alpha = cross_edges(&g, &c, &d)?;
    let mean_alpha = p * (c.len() * d.len()) as f64;
    println!("alpha(C, D) = {alpha}, |C||D|p = {mean_alpha:.0}");

    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).expect("in-memory write");
    let back = Graph::read_edge_list(buf.as_slice())?;
    println!("edge list round trip: {}", back == g);
    Ok(())
}
