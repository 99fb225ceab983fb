//! Inductive anomalous-subgraph detection.
//!
//! A summary learned on a background graph `G₁` embeds both `G₁` and a
//! second graph `G₂` over the same node ids; nodes whose embeddings move
//! furthest are reported as anomalous.

use crate::error::{Error, Result};
use crate::hetgraph::{HetGraph, NodeId};
use crate::summary::{derive_embeddings, summarize, EmbeddingMatrix, Summary, SummaryConfig};

/// A summary of `G₁` with `G₁`'s own embeddings cached for repeated queries.
pub struct AnomalyDetector {
    summary: Summary,
    reference: EmbeddingMatrix,
}

impl AnomalyDetector {
    pub fn fit(g1: &HetGraph, cfg: &SummaryConfig) -> Result<Self> {
        let summary = summarize(g1, cfg)?;
        Self::from_summary(summary, g1)
    }

    pub fn from_summary(summary: Summary, g1: &HetGraph) -> Result<Self> {
        let reference = derive_embeddings(&summary, g1, None)?;
        Ok(Self { summary, reference })
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    /// Euclidean embedding displacement of every node between `G₁` and `g2`.
    pub fn scores(&self, g2: &HetGraph) -> Result<Vec<f64>> {
        if g2.num_nodes() != self.reference.len() {
            return Err(Error::Validation(format!(
                "graphs differ in node count: {} vs {}",
                self.reference.len(),
                g2.num_nodes()
            )));
        }
        let e2 = derive_embeddings(&self.summary, g2, None)?;
        Ok((0..e2.len())
            .map(|r| self.reference.row(r).iter().zip(e2.row(r)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .collect())
    }

    /// Share of the top-`|injected|` scoring nodes that were injected.
    pub fn precision(&self, g2: &HetGraph, injected: &[NodeId]) -> Result<f64> {
        Ok(precision_at(&self.scores(g2)?, injected))
    }
}

/// The `n` highest-scoring nodes; ties go to the smaller node id.
pub fn top_n(scores: &[f64], n: usize) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..scores.len() as NodeId).collect();
    order.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

/// `|top-n ∩ truth| / n` with `n = |truth|`.
pub fn precision_at(scores: &[f64], truth: &[NodeId]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let mut top = top_n(scores, truth.len());
    top.sort_unstable();
    let hits = truth.iter().filter(|v| top.binary_search(v).is_ok()).count();
    hits as f64 / truth.len() as f64
}

/// Summarizes `g1`, embeds both graphs and scores the injected set.
pub fn anomaly_precision(g1: &HetGraph, g2: &HetGraph, injected: &[NodeId], cfg: &SummaryConfig) -> Result<f64> {
    AnomalyDetector::fit(g1, cfg)?.precision(g2, injected)
}
