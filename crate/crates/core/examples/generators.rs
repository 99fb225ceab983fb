//! Seeded Erdős–Rényi and stochastic block model graphs.
//!
//! cargo run --example generators

use latsum::hetgraph::write_edge_list;
use latsum::tasks::{generate_er, generate_sbm, inject_er_subgraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = generate_er(10_000, 10.0, 42)?;
    println!("ER: {} nodes, {} edges, mean degree {:.3}", g.num_nodes(), g.num_arcs() / 2, g.num_arcs() as f64 / 1e4);

    let (planted, nodes) = inject_er_subgraph(&g, 50, 0.5, 43)?;
    println!("planting ER(50, 0.5) added {} edges among {:?}...", (planted.num_arcs() - g.num_arcs()) / 2, &nodes[..5]);

    let (sbm, blocks) = generate_sbm(&[300, 200], 0.05, 0.002, 44)?;
    let (mut inside, mut across) = (0, 0);
    for (s, a) in sbm.arcs().filter(|(s, a)| *s < a.node) {
        if blocks[s as usize] == blocks[a.node as usize] {
            inside += 1;
        } else {
            across += 1;
        }
    }
    println!("SBM: {inside} edges inside blocks, {across} across");

    let mut head = Vec::new();
    write_edge_list(&sbm, &mut head)?;
    let text = String::from_utf8(head)?;
    println!("edge list starts:\n{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
