//! Summary size and build time against graph size. The summary size stays
//! fixed while the time grows roughly linearly.
//!
//! cargo run --release --example scaling_bench [sizes]

use latsum::summary::SummaryConfig;
use latsum::tasks::{bench, parse_sizes};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sizes = parse_sizes(&std::env::args().nth(1).unwrap_or_else(|| "1e2..1e5".into()))?;
    println!("{:>9} {:>10} {:>14} {:>9}", "nodes", "edges", "summary_bytes", "seconds");
    for r in bench(&sizes, 10.0, &SummaryConfig::default(), 0)? {
        println!("{:>9} {:>10} {:>14} {:>9.3}", r.nodes, r.edges, r.summary_bytes, r.seconds);
    }
    Ok(())
}
