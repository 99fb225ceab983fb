//! End-to-end checks through the library and the `latsum` binary.

use std::path::Path;
use std::process::Command;

use latsum::hetgraph::{load_edge_list_files, EdgeListOptions, NodeId};
use latsum::summary::{derive_embeddings, summarize, summarize_with_embeddings, Summary, SummaryConfig};
use latsum::tasks::{anomaly_precision, generate_er, inject_er_subgraph};

fn latsum(args: &[&str]) -> Vec<u8> {
    latsum_with(args, 1)
}

fn latsum_with(args: &[&str], workers: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_latsum"))
        .args(["--workers", &workers.to_string()])
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn cli_embeddings_match_library() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, summary, emb) = (dir.path().join("g.tsv"), dir.path().join("g.mlns"), dir.path().join("e.tsv"));
    latsum(&["generate", "er", "--num-nodes", "400", "--avg-degree", "6", "-o", p(&edges)]);
    latsum(&["summarize", "-i", p(&edges), "--weighted", "--typed-edges", "--dim", "24", "-o", p(&summary)]);
    latsum(&["embed", "-s", p(&summary), "-i", p(&edges), "--weighted", "--typed-edges", "-o", p(&emb)]);

    let g = load_edge_list_files(&edges, None, EdgeListOptions::full()).unwrap();
    let cfg = SummaryConfig { dim: 24, ..Default::default() };
    let s = summarize(&g, &cfg).unwrap();
    assert_eq!(Summary::load(&summary).unwrap().to_bytes(), s.to_bytes());

    let mut want = Vec::new();
    derive_embeddings(&s, &g, None).unwrap().write_tsv(&g, &mut want).unwrap();
    assert_eq!(std::fs::read(&emb).unwrap(), want);
}

#[test]
fn summaries_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.tsv");
    latsum(&["generate", "er", "--num-nodes", "600", "--avg-degree", "8", "--seed", "4", "-o", p(&edges)]);
    let mut runs = Vec::new();
    for workers in [1, 1, 3] {
        let out = dir.path().join(format!("s{}.mlns", runs.len()));
        latsum_with(&["summarize", "-i", p(&edges), "--weighted", "--typed-edges", "--dim", "16", "-o", p(&out)], workers);
        runs.push(std::fs::read(&out).unwrap());
    }
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn training_embeddings_are_recovered_from_summary() {
    let g = generate_er(800, 8.0, 11).unwrap();
    let (s, direct) = summarize_with_embeddings(&g, &SummaryConfig { dim: 32, ..Default::default() }).unwrap();
    let derived = derive_embeddings(&s, &g, None).unwrap();
    let worst = direct.data().iter().zip(derived.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max deviation {worst}");
}

#[test]
fn subset_rows_equal_full_rows() {
    let g = generate_er(1500, 10.0, 5).unwrap();
    let s = summarize(&g, &SummaryConfig { dim: 32, ..Default::default() }).unwrap();
    let full = derive_embeddings(&s, &g, None).unwrap();
    let picks: Vec<NodeId> = vec![1400, 3, 77, 3, 912];
    let sub = derive_embeddings(&s, &g, Some(&picks)).unwrap();
    assert_eq!(sub.nodes(), &[3, 77, 912, 1400]);
    for (r, &v) in sub.nodes().iter().enumerate() {
        assert_eq!(sub.row(r), full.node_row(v).unwrap());
    }
}

#[test]
fn anomaly_precision_survives_relabeling() {
    let cfg = SummaryConfig { dim: 32, ..Default::default() };
    let g1 = generate_er(2000, 8.0, 1).unwrap();
    let (g2, injected) = inject_er_subgraph(&generate_er(2000, 8.0, 2).unwrap(), 60, 0.5, 3).unwrap();
    let base = anomaly_precision(&g1, &g2, &injected, &cfg).unwrap();

    let n = g1.num_nodes() as NodeId;
    let perm: Vec<NodeId> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let moved: Vec<NodeId> = injected.iter().map(|&v| perm[v as usize]).collect();
    let relabeled = anomaly_precision(&g1.permuted(&perm).unwrap(), &g2.permuted(&perm).unwrap(), &moved, &cfg).unwrap();
    assert!(base > 0.5, "precision {base}");
    assert_eq!(base, relabeled);
}
