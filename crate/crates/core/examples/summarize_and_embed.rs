//! Summarize a graph, persist the summary and derive embeddings from it,
//! for all nodes and for a small subset.
//!
//! cargo run --release --example summarize_and_embed [num_nodes]

use latsum::summary::{derive_embeddings, summarize, Summary, SummaryConfig};
use latsum::tasks::generate_er;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(5000), |s| s.parse())?;
    let g = generate_er(n, 10.0, 7)?;
    let cfg = SummaryConfig::default();
    let s = summarize(&g, &cfg)?;
    let bytes = s.to_bytes();
    println!("graph: {} nodes, {} arcs", g.num_nodes(), g.num_arcs());
    println!("summary: {} relational functions, {} levels, {} bytes", s.functions().count(), s.levels().len(), bytes.len());
    for (l, level) in s.levels().iter().enumerate() {
        println!("  level {}: H is {} x {}", l + 1, level.dim(), level.width());
    }

    let dir = std::env::temp_dir().join("latsum-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("er.mlns");
    s.save(&path)?;
    let loaded = Summary::load(&path)?;

    let all = derive_embeddings(&loaded, &g, None)?;
    println!("embeddings: {} x {}", all.len(), all.dim());
    let subset = derive_embeddings(&loaded, &g, Some(&[3, 1, 4]))?;
    for (r, &v) in subset.nodes().iter().enumerate() {
        let same = subset.row(r) == all.node_row(v).unwrap();
        println!("  node {v}: first values {:?} (matches full run: {same})", &subset.row(r)[..3]);
    }
    Ok(())
}
