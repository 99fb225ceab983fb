//! Link prediction by logistic regression on concatenated node embeddings.
//!
//! A share of the edges is removed to give the residual graph `G′`, which is
//! the only graph the embeddings see. Training positives are edges of `G′`,
//! test positives are removed edges, and fakes are uniformly drawn pairs that
//! are not adjacent in the original graph.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hetgraph::{HetGraph, NodeId};
use crate::relfeat::base_features;
use crate::summary::{derive_embeddings, summarize, SummaryConfig};
use crate::tasks::logreg::{train_logreg, LogRegOptions};
use crate::tasks::metrics::{evaluate, BinaryMetrics};

/// Fewer edges than this cannot be split meaningfully.
pub const MIN_EDGES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    /// Share of edges removed from the graph.
    pub remove_frac: f64,
    /// Training positives, as a share of all edges, drawn from `G′`.
    pub train_frac: f64,
    /// Test positives, as a share of the removed edges.
    pub test_frac: f64,
    /// Fakes per positive.
    pub neg_ratio: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { remove_frac: 0.4, train_frac: 0.1, test_frac: 0.25, neg_ratio: 1, seed: 0 }
    }
}

/// An edge split. Pairs are unordered (`u < v`) when the graph is symmetric.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub residual: HetGraph,
    pub train_pos: Vec<(NodeId, NodeId)>,
    pub train_neg: Vec<(NodeId, NodeId)>,
    pub test_pos: Vec<(NodeId, NodeId)>,
    pub test_neg: Vec<(NodeId, NodeId)>,
}

impl LinkSplit {
    pub fn train(&self) -> (Vec<(NodeId, NodeId)>, Vec<bool>) {
        labeled(&self.train_pos, &self.train_neg)
    }

    pub fn test(&self) -> (Vec<(NodeId, NodeId)>, Vec<bool>) {
        labeled(&self.test_pos, &self.test_neg)
    }
}

fn labeled(pos: &[(NodeId, NodeId)], neg: &[(NodeId, NodeId)]) -> (Vec<(NodeId, NodeId)>, Vec<bool>) {
    let pairs = pos.iter().chain(neg).copied().collect();
    let y = std::iter::repeat_n(true, pos.len()).chain(std::iter::repeat_n(false, neg.len())).collect();
    (pairs, y)
}

fn key(u: NodeId, v: NodeId, undirected: bool) -> (NodeId, NodeId) {
    if undirected && v < u {
        (v, u)
    } else {
        (u, v)
    }
}

pub fn split_edges(g: &HetGraph, spec: &SplitSpec) -> Result<LinkSplit> {
    for (name, f) in [("remove", spec.remove_frac), ("train", spec.train_frac), ("test", spec.test_frac)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("{name} fraction must lie in (0, 1), got {f}")));
        }
    }
    if spec.neg_ratio == 0 {
        return Err(Error::Config("neg_ratio must be at least 1".into()));
    }
    let undirected = g.is_symmetric();
    let mut edges: Vec<(NodeId, NodeId)> = g
        .arcs()
        .filter(|(s, a)| *s != a.node && (!undirected || *s < a.node))
        .map(|(s, a)| (s, a.node))
        .collect();
    edges.dedup();
    if edges.len() < MIN_EDGES {
        return Err(Error::InsufficientData(format!("{} edges, need at least {MIN_EDGES}", edges.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    edges.shuffle(&mut rng);
    let n_removed = (spec.remove_frac * edges.len() as f64).round() as usize;
    let (removed, retained) = edges.split_at(n_removed);
    let n_train = ((spec.train_frac * edges.len() as f64).round() as usize).min(retained.len());
    let n_test = (spec.test_frac * removed.len() as f64).round() as usize;
    let train_pos = retained[..n_train].to_vec();
    let test_pos = removed[..n_test].to_vec();

    let removed_set: HashSet<_> = removed.iter().copied().collect();
    let residual = g.filter_arcs(|s, a| !removed_set.contains(&key(s, a.node, undirected)));

    let n = g.num_nodes() as NodeId;
    let pairs = if undirected { n as f64 * (n as f64 - 1.0) / 2.0 } else { n as f64 * (n as f64 - 1.0) };
    let wanted = spec.neg_ratio * (n_train + n_test);
    if (wanted + edges.len()) as f64 > 0.5 * pairs {
        return Err(Error::InsufficientData("graph is too dense to draw fake edges".into()));
    }
    let mut taken: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(wanted);
    let mut fakes = Vec::with_capacity(wanted);
    while fakes.len() < wanted {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u == v || g.has_arc(u, v) || (undirected && g.has_arc(v, u)) {
            continue;
        }
        let k = key(u, v, undirected);
        if taken.insert(k) {
            fakes.push(k);
        }
    }
    let test_neg = fakes.split_off(spec.neg_ratio * n_train);
    Ok(LinkSplit { residual, train_pos, train_neg: fakes, test_pos, test_neg })
}

/// Rows `[x(u), x(v)]` for each pair, where `x` maps a node to its features.
pub fn pair_features<'a>(pairs: &[(NodeId, NodeId)], dim: usize, x: impl Fn(NodeId) -> &'a [f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(pairs.len() * 2 * dim);
    for &(u, v) in pairs {
        out.extend_from_slice(x(u));
        out.extend_from_slice(x(v));
    }
    out
}

/// Column means and standard deviations of a row-major matrix; constant
/// columns get a scale of 1.
pub fn column_stats(x: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = (x.len() / d.max(1)).max(1) as f64;
    let mut mean = vec![0.0; d];
    for row in x.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut sd = vec![0.0; d];
    for row in x.chunks_exact(d) {
        for ((s, v), m) in sd.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut sd {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    (mean, sd)
}

pub fn standardize(x: &mut [f64], mean: &[f64], sd: &[f64]) {
    for row in x.chunks_exact_mut(mean.len()) {
        for ((v, m), s) in row.iter_mut().zip(mean).zip(sd) {
            *v = (*v - m) / s;
        }
    }
}

/// Fits on the training rows (standardized with training statistics) and
/// scores the test rows.
pub fn fit_and_score(
    mut train_x: Vec<f64>,
    train_y: &[bool],
    mut test_x: Vec<f64>,
    test_y: &[bool],
    d: usize,
    opts: &LogRegOptions,
) -> Result<BinaryMetrics> {
    let (mean, sd) = column_stats(&train_x, d);
    standardize(&mut train_x, &mean, &sd);
    standardize(&mut test_x, &mean, &sd);
    let model = train_logreg(&train_x, d, train_y, opts)?;
    if !model.converged {
        log::warn!("logistic regression stopped after {} iterations", model.iterations);
    }
    let p: Vec<f64> = test_x.chunks_exact(d).map(|r| model.predict_proba(r)).collect();
    evaluate(&p, test_y)
}

/// Evaluates per-node features `x` (row `i` is node `i`, `dim` wide) on a split.
pub fn evaluate_node_features(split: &LinkSplit, x: &[f64], dim: usize, opts: &LogRegOptions) -> Result<BinaryMetrics> {
    let row = |v: NodeId| &x[v as usize * dim..(v as usize + 1) * dim];
    let (train, train_y) = split.train();
    let (test, test_y) = split.test();
    fit_and_score(pair_features(&train, dim, row), &train_y, pair_features(&test, dim, row), &test_y, 2 * dim, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkPredReport {
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub residual_arcs: usize,
    pub embedding: BinaryMetrics,
    /// Out-, in- and total degree in `G′` as node features.
    pub degree_baseline: BinaryMetrics,
    /// Gaussian noise of the embedding's width.
    pub random_baseline: BinaryMetrics,
}

/// Splits `g`, summarizes `G′` and compares the embeddings against degree and
/// random-feature baselines on the same split.
pub fn link_prediction_eval(
    g: &HetGraph,
    spec: &SplitSpec,
    cfg: &SummaryConfig,
    opts: &LogRegOptions,
) -> Result<LinkPredReport> {
    let split = split_edges(g, spec)?;
    let summary = summarize(&split.residual, cfg)?;
    let emb = derive_embeddings(&summary, &split.residual, None)?;
    let embedding = evaluate_node_features(&split, emb.data(), emb.dim(), opts)?;

    let degrees = base_features(&split.residual);
    let degree_baseline = evaluate_node_features(&split, degrees.data(), degrees.ncols(), opts)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let noise: Vec<f64> = (0..emb.len() * emb.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let random_baseline = evaluate_node_features(&split, &noise, emb.dim(), opts)?;

    let (train, _) = split.train();
    let (test, _) = split.test();
    Ok(LinkPredReport {
        train_pairs: train.len(),
        test_pairs: test.len(),
        residual_arcs: split.residual.num_arcs(),
        embedding,
        degree_baseline,
        random_baseline,
    })
}
