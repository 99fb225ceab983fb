//! Plant a dense ER subgraph in a background graph and rank nodes by how far
//! their embeddings move.
//!
//! cargo run --release --example anomaly_detection [inject_n] [inject_p]

use latsum::summary::SummaryConfig;
use latsum::tasks::anomaly::top_n;
use latsum::tasks::{generate_er, inject_er_subgraph, AnomalyDetector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(75), |s| s.parse())?;
    let p: f64 = args.next().map_or(Ok(0.3), |s| s.parse())?;

    let g1 = generate_er(10_000, 10.0, 1)?;
    let g2 = generate_er(10_000, 10.0, 2)?;
    let (g2, injected) = inject_er_subgraph(&g2, n, p, 3)?;
    let det = AnomalyDetector::fit(&g1, &SummaryConfig::default())?;
    let scores = det.scores(&g2)?;
    let top = top_n(&scores, 10);
    println!("ER({n}, {p}) planted in a 10^4-node background");
    for v in top {
        println!("  node {v:5}  score {:8.3}  planted {}", scores[v as usize], injected.binary_search(&v).is_ok());
    }
    println!("precision at {n}: {:.3}", det.precision(&g2, &injected)?);
    Ok(())
}
