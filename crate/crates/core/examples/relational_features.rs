//! Base degree features and two levels of relational-operator composition.
//!
//! cargo run --example relational_features

use latsum::hetgraph::GraphBuilder;
use latsum::relfeat::{apply_operator, base_features, build_level, function_count, BaseSet, Operator, OperatorSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a star with one extra spoke-to-spoke edge
    let mut b = GraphBuilder::with_identity_nodes(5).undirected(true);
    for leaf in 1..5 {
        b.add_edge(0, leaf, 0, 1.0)?;
    }
    b.add_edge(1, 2, 0, 1.0)?;
    let g = b.build()?;

    let x0 = base_features(&g);
    println!("level 0 (out, in, total):");
    for r in 0..x0.nrows() {
        println!("  node {r}: {:?}", x0.row(r));
    }

    let x1 = build_level(&g, &x0)?;
    let x2 = build_level(&g, &x1)?;
    println!("level 1 has {} columns, level 2 has {}", x1.ncols(), x2.ncols());
    for (j, d) in x1.descriptors().iter().enumerate().take(6) {
        println!("  column {j}: {d} -> {:?}", x1.column(j));
    }

    let total = x0.column(2);
    println!("max of total degree over each egonet: {:?}", apply_operator(&g, &total, Operator::Max)?);
    println!("functions for 2 levels: {}", function_count(BaseSet::default(), OperatorSet::all(), 2));
    Ok(())
}
