//! Load a typed edge list, inspect egonets and round-trip the binary cache.
//!
//! cargo run --example graph_io

use latsum::hetgraph::{load_edge_list, read_graph_cache, write_graph_cache, EdgeListOptions, EgonetFilter};

const EDGES: &str = "\
# author paper relation
alice\tp1\t1\twrote
bob\tp1\t1\twrote
bob\tp2\t2\twrote
p2\tp1\t1\tcites
p1\tkdd\t1\tat
";

const TYPES: &str = "alice\tauthor\nbob\tauthor\np1\tpaper\np2\tpaper\nkdd\tvenue\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = EdgeListOptions::full();
    let g = load_edge_list(EDGES.as_bytes(), Some(TYPES.as_bytes()), opts)?;
    println!("{} nodes, {} arcs", g.num_nodes(), g.num_arcs());
    println!("node types {:?}", g.registry().node_types());
    println!("edge types {:?}", g.registry().edge_types());

    let p1 = g.label_index()["p1"];
    let ego: Vec<_> = g.egonet(p1, &EgonetFilter::default())?.into_iter().map(|v| g.label(v).into_owned()).collect();
    println!("egonet of p1: {ego:?}");
    let (out_w, in_w) = g.weighted_degrees(p1);
    println!("p1 weighted out/in degree: {out_w}/{in_w}");

    let mut buf = Vec::new();
    write_graph_cache(&g, &mut buf)?;
    let back = read_graph_cache(&buf[..])?;
    assert_eq!(back, g);
    println!("cache: {} bytes, round trip ok", buf.len());
    Ok(())
}
