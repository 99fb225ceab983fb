//! Embed a graph the summary never saw, then compare with the training graph.
//!
//! cargo run --release --example inductive_transfer

use latsum::summary::{derive_embeddings, summarize_with_embeddings, SummaryConfig};
use latsum::tasks::{generate_er, generate_sbm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SummaryConfig { dim: 32, ..Default::default() };
    let train = generate_er(3000, 8.0, 1)?;
    let (s, e_train) = summarize_with_embeddings(&train, &cfg)?;

    // training embeddings are recovered exactly from the summary
    let again = derive_embeddings(&s, &train, None)?;
    let drift = e_train.data().iter().zip(again.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("training graph: max |U sqrt(S) - derived| = {drift:.2e}");

    let (other, blocks) = generate_sbm(&[1500, 1500], 0.008, 0.0005, 2)?;
    let e = derive_embeddings(&s, &other, None)?;
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mean_norm = |b: u32| {
        let rows: Vec<f64> = (0..e.len()).filter(|&r| blocks[r] == b).map(|r| norm(e.row(r))).collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    println!("unseen SBM graph: {} embeddings of width {}", e.len(), e.dim());
    println!("mean embedding norm per block: {:.3} / {:.3}", mean_norm(0), mean_norm(1));
    Ok(())
}
