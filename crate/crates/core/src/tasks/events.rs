//! Temporal event detection over graph snapshots.
//!
//! The summary of snapshot `t-1` embeds both `t-1` and `t`; the step's score
//! is the Frobenius norm of the difference. Steps whose score lies more than
//! three standard deviations from the median of all scores are flagged.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hetgraph::io::read_edges_into;
use crate::hetgraph::{EdgeListOptions, GraphBuilder, HetGraph};
use crate::summary::{derive_embeddings, summarize, SummaryConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSeries {
    /// Snapshot index of each score (`1..T`).
    pub steps: Vec<usize>,
    pub scores: Vec<f64>,
    pub median: f64,
    /// Population standard deviation of the scores.
    pub stdev: f64,
    /// Flagged snapshot indices.
    pub flagged: Vec<usize>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn population_stdev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Applies the 3σ-from-median rule to `scores` taken at `steps`.
pub fn flag_series(steps: Vec<usize>, scores: Vec<f64>) -> EventSeries {
    let m = median(&scores);
    let sd = population_stdev(&scores);
    let flagged = steps.iter().zip(&scores).filter(|(_, &s)| (s - m).abs() > 3.0 * sd).map(|(&t, _)| t).collect();
    EventSeries { steps, scores, median: m, stdev: sd, flagged }
}

pub fn detect_events(snapshots: &[HetGraph], cfg: &SummaryConfig) -> Result<EventSeries> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 snapshots, got {}", snapshots.len())));
    }
    let n = snapshots[0].num_nodes();
    if let Some(t) = snapshots.iter().position(|g| g.num_nodes() != n) {
        return Err(Error::Validation(format!("snapshot {t} has a different node count")));
    }
    let mut scores = Vec::with_capacity(snapshots.len() - 1);
    for t in 1..snapshots.len() {
        let s = summarize(&snapshots[t - 1], cfg)?;
        let before = derive_embeddings(&s, &snapshots[t - 1], None)?;
        let after = derive_embeddings(&s, &snapshots[t], None)?;
        let d2: f64 = before.data().iter().zip(after.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        log::info!("step {t}: score {:.6e}", d2.sqrt());
        scores.push(d2.sqrt());
    }
    Ok(flag_series((1..snapshots.len()).collect(), scores))
}

/// Loads `t000.tsv, t001.tsv, …` from `dir` over one shared node space.
/// Nodes absent from a snapshot are present there as isolated nodes.
pub fn load_snapshot_dir(dir: &Path, opts: EdgeListOptions) -> Result<Vec<HetGraph>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| {
                n.len() > 5 && n.starts_with('t') && n.ends_with(".tsv") && n[1..n.len() - 4].bytes().all(|b| b.is_ascii_digit())
            })
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Validation(format!("no tNNN.tsv snapshots in {}", dir.display())));
    }
    let texts = files.iter().map(std::fs::read_to_string).collect::<std::io::Result<Vec<_>>>()?;
    let mut labels = GraphBuilder::new();
    for text in &texts {
        for line in text.lines() {
            let mut fields = line.split_ascii_whitespace();
            if let (Some(s), Some(d)) = (fields.next(), fields.next()) {
                if !(s.starts_with('#') || s.starts_with('%')) {
                    labels.add_node(s, None);
                    labels.add_node(d, None);
                }
            }
        }
    }
    let order = labels.labels().to_vec();
    texts
        .iter()
        .map(|text| {
            let mut b = GraphBuilder::new().undirected(opts.undirected);
            for l in &order {
                b.add_node(l, None);
            }
            read_edges_into(&mut b, text.as_bytes(), opts)?;
            b.build()
        })
        .collect()
}
