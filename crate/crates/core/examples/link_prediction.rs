//! Held-out link prediction on a two-block SBM, against degree and random
//! feature baselines. Pass an edge list path to evaluate a real graph instead.
//!
//! cargo run --release --example link_prediction [edges.tsv]

use latsum::hetgraph::{load_edge_list_files, EdgeListOptions};
use latsum::summary::SummaryConfig;
use latsum::tasks::{generate_sbm, link_prediction_eval, LogRegOptions, SplitSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = match std::env::args().nth(1) {
        Some(path) => load_edge_list_files(path.as_ref(), None, EdgeListOptions { undirected: true, ..Default::default() })?,
        None => generate_sbm(&[1000, 1000], 0.1, 0.001, 1)?.0,
    };
    let r = link_prediction_eval(&g, &SplitSpec::default(), &SummaryConfig::default(), &LogRegOptions::default())?;
    println!("{} training pairs, {} test pairs", r.train_pairs, r.test_pairs);
    for (name, m) in [("embedding", r.embedding), ("degree", r.degree_baseline), ("random", r.random_baseline)] {
        println!("{name:>10}: AUC {:.4}  accuracy {:.4}  macro-F1 {:.4}", m.auc, m.acc, m.f1_macro);
    }
    Ok(())
}
