//! Logarithmic binning and the typed, directional context row of a node.
//!
//! cargo run --example context_histograms

use latsum::context::{build_context_matrix, log_bin, HistogramSpec};
use latsum::hetgraph::GraphBuilder;
use latsum::relfeat::base_features;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = HistogramSpec::new(6, 2.0)?;
    let values = [0.0, 0.5, 1.0, 3.0, 4.0, 7.9, 8.0, 100.0];
    println!("bins of {values:?} under {spec}: {:?}", log_bin(&values, &spec)?);

    let mut b = GraphBuilder::new();
    b.add_node("u", Some("user"));
    b.add_node("v", Some("user"));
    b.add_node("i", Some("item"));
    b.add_edge_by_label("u", "i", Some("buys"), 1.0)?;
    b.add_edge_by_label("v", "i", Some("buys"), 1.0)?;
    b.add_edge_by_label("u", "v", Some("follows"), 1.0)?;
    let g = b.build()?;

    let x0 = base_features(&g);
    let ctx = build_context_matrix(&g, &x0, &spec)?;
    let layout = &ctx.layout;
    println!(
        "width {} = 2 directions x {} node types x {} edge types x {} features x {} bins",
        ctx.width(),
        layout.num_node_types,
        layout.num_edge_types,
        layout.num_features,
        layout.bins
    );
    let item = g.label_index()["i"] as usize;
    let row = ctx.matrix.row(item);
    println!("context row of item i (column, count): {row:?}");
    Ok(())
}
