//! Logarithmic-histogram context matrices.
//!
//! Each node's row concatenates, for every feature column, a histogram of
//! that feature's values over a restricted neighborhood. In full mode the
//! neighborhoods are split by edge type, direction and neighbor node type,
//! nested in that order (then feature, then bin). Direction blocks are strict:
//! the ego is never counted. Simple mode uses a single block over the
//! default egonet (out-neighbors plus the ego).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hetgraph::{EgonetFilter, HetGraph, NodeId, TypeMap};
use crate::lowrank::{SparseMatrix, SparseRows};
use crate::relfeat::{FeatureMatrix, RowSet};

/// Geometric bin edges `1, a, a², …, a^(c-2)`; values below 1 share bin 0 and
/// values at or above `a^(c-2)` share the last bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    bins: usize,
    log_base: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { bins: 32, log_base: 2.0 }
    }
}

impl fmt::Display for HistogramSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c={} a={}", self.bins, self.log_base)
    }
}

impl HistogramSpec {
    /// Bin indices are stored in a byte, so `bins` is capped at 256.
    pub fn new(bins: usize, log_base: f64) -> Result<Self> {
        if !(2..=256).contains(&bins) {
            return Err(Error::Config(format!("bin count must be in 2..=256, got {bins}")));
        }
        if !(log_base.is_finite() && log_base > 1.0) {
            return Err(Error::Config(format!("log base must be a finite number > 1, got {log_base}")));
        }
        Ok(Self { bins, log_base })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn log_base(&self) -> f64 {
        self.log_base
    }

    pub fn bin_index(&self, v: f64) -> Result<usize> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Validation(format!("cannot bin value {v}: must be finite and non-negative")));
        }
        Ok(self.bin_unchecked(v))
    }

    #[inline]
    fn bin_unchecked(&self, v: f64) -> usize {
        if v < 1.0 {
            return 0;
        }
        let a = self.log_base;
        let mut k = if a == 2.0 { v.log2().floor() } else { (v.ln() / a.ln()).floor() };
        // repair rounding at exact powers of a
        if a.powi(k as i32) > v {
            k -= 1.0;
        } else if a.powi(k as i32 + 1) <= v {
            k += 1.0;
        }
        let last = self.bins - 1;
        if k + 1.0 >= last as f64 {
            last
        } else {
            k as usize + 1
        }
    }
}

/// Histogram of `values` under `spec`.
pub fn log_bin(values: &[f64], spec: &HistogramSpec) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; spec.bins];
    for &v in values {
        counts[spec.bin_index(v)?] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ContextMode {
    /// Blocks per edge type, direction and node type.
    #[default]
    Full,
    /// One block over the default egonet, ignoring types and direction.
    Simple,
}

impl ContextMode {
    pub fn name(self) -> &'static str {
        match self {
            ContextMode::Full => "full",
            ContextMode::Simple => "simple",
        }
    }
}

impl FromStr for ContextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ContextMode::Full),
            "simple" => Ok(ContextMode::Simple),
            other => Err(Error::Config(format!("unknown context mode {other:?} (expected full|simple)"))),
        }
    }
}

/// Column arithmetic of a context matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextLayout {
    pub mode: ContextMode,
    pub num_edge_types: usize,
    pub num_node_types: usize,
    pub num_features: usize,
    pub bins: usize,
}

impl ContextLayout {
    pub fn width(&self) -> usize {
        self.num_blocks() * self.num_features * self.bins
    }

    pub fn num_blocks(&self) -> usize {
        match self.mode {
            ContextMode::Full => 2 * self.num_edge_types * self.num_node_types,
            ContextMode::Simple => 1,
        }
    }

    /// Block index of (edge type, direction, node type); direction 0 is in, 1 is out.
    #[inline]
    pub fn block(&self, edge_type: usize, direction: usize, node_type: usize) -> usize {
        (edge_type * 2 + direction) * self.num_node_types + node_type
    }

    #[inline]
    pub fn column(&self, block: usize, feature: usize, bin: usize) -> usize {
        (block * self.num_features + feature) * self.bins + bin
    }
}

/// Per-node bin indices of a set of feature columns.
#[derive(Debug, Clone)]
pub struct BinnedFeatures {
    rows: RowSet,
    num_features: usize,
    bins: Vec<u8>,
}

impl BinnedFeatures {
    /// Bins the horizontal concatenation of `parts`, for the rows of the last
    /// part. Every earlier part must cover those rows.
    pub fn from_matrices(parts: &[&FeatureMatrix], spec: &HistogramSpec) -> Result<Self> {
        let last = parts.last().ok_or_else(|| Error::Validation("no feature matrices to bin".into()))?;
        let rows = last.rows().clone();
        let num_features: usize = parts.iter().map(|p| p.ncols()).sum();
        let mut bins = vec![0u8; rows.len() * num_features];
        if num_features == 0 {
            return Ok(Self { rows, num_features, bins });
        }
        bins.par_chunks_mut(num_features).enumerate().try_for_each(|(r, out)| -> Result<()> {
            let node = rows.node(r);
            let mut k = 0;
            for p in parts {
                let row = p
                    .node_row(node)
                    .ok_or_else(|| Error::Validation(format!("feature level {} lacks node {node}", p.level)))?;
                for &v in row {
                    out[k] = spec.bin_index(v)? as u8;
                    k += 1;
                }
            }
            Ok(())
        })?;
        Ok(Self { rows, num_features, bins })
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn rows(&self) -> &RowSet {
        &self.rows
    }

    #[inline]
    fn node_bins(&self, node: NodeId) -> &[u8] {
        let r = self.rows.row_of(node).expect("neighbor features checked at construction");
        &self.bins[r * self.num_features..(r + 1) * self.num_features]
    }
}

/// Lazily computed context rows for a set of target nodes.
pub struct ContextRows<'a> {
    g: &'a HetGraph,
    feats: &'a BinnedFeatures,
    layout: ContextLayout,
    types: TypeMap,
    targets: RowSet,
}

pub struct ContextScratch {
    buckets: Vec<Vec<NodeId>>,
    ego: Vec<NodeId>,
    /// Per (feature, bin) member counts.
    counts: Vec<u32>,
    /// Per feature, four words flagging the occupied bins.
    masks: Vec<u64>,
}

impl<'a> ContextRows<'a> {
    /// `types` translates the graph's type ids into the column layout's.
    pub fn new(
        g: &'a HetGraph,
        feats: &'a BinnedFeatures,
        mode: ContextMode,
        bins: usize,
        types: TypeMap,
        targets: RowSet,
    ) -> Result<Self> {
        if types.node.len() != g.registry().num_node_types() || types.edge.len() != g.registry().num_edge_types() {
            return Err(Error::TypeMismatch("type map does not match the graph's registries".into()));
        }
        let missing = (0..targets.len()).into_par_iter().any(|r| {
            let i = targets.node(r);
            let covered = |v: NodeId| feats.rows.row_of(v).is_some();
            !covered(i) || !g.out_arcs(i).iter().all(|a| covered(a.node)) || !g.in_arcs(i).iter().all(|a| covered(a.node))
        });
        if missing {
            return Err(Error::Validation("binned features do not cover every target neighborhood".into()));
        }
        let layout = ContextLayout {
            mode,
            num_edge_types: types.num_edge_types,
            num_node_types: types.num_node_types,
            num_features: feats.num_features,
            bins,
        };
        Ok(Self { g, feats, layout, types, targets })
    }

    pub fn layout(&self) -> &ContextLayout {
        &self.layout
    }

    pub fn targets(&self) -> &RowSet {
        &self.targets
    }

    /// Appends the histograms of `members` over every feature. Counts and
    /// occupancy masks are left zeroed for the next block.
    fn emit_block(&self, block: usize, members: &[NodeId], s: &mut ContextScratch, cols: &mut Vec<u32>, vals: &mut Vec<f64>) {
        let nf = self.feats.num_features;
        let bins = self.layout.bins;
        for &j in members {
            for (f, &b) in self.feats.node_bins(j).iter().enumerate() {
                s.counts[f * bins + b as usize] += 1;
                s.masks[f * 4 + (b >> 6) as usize] |= 1 << (b & 63);
            }
        }
        let base = self.layout.column(block, 0, 0) as u32;
        for f in 0..nf {
            for w in 0..4 {
                let mut m = std::mem::take(&mut s.masks[f * 4 + w]);
                while m != 0 {
                    let b = w * 64 + m.trailing_zeros() as usize;
                    let slot = f * bins + b;
                    cols.push(base + slot as u32);
                    vals.push(s.counts[slot] as f64);
                    s.counts[slot] = 0;
                    m &= m - 1;
                }
            }
        }
    }
}

impl SparseRows for ContextRows<'_> {
    type Scratch = ContextScratch;

    fn nrows(&self) -> usize {
        self.targets.len()
    }

    fn ncols(&self) -> usize {
        self.layout.width()
    }

    fn scratch(&self) -> ContextScratch {
        let nf = self.layout.num_features;
        ContextScratch {
            buckets: vec![Vec::new(); self.layout.num_blocks()],
            ego: Vec::new(),
            counts: vec![0; nf * self.layout.bins],
            masks: vec![0; nf * 4],
        }
    }

    fn row_into(&self, r: usize, s: &mut ContextScratch, cols: &mut Vec<u32>, vals: &mut Vec<f64>) {
        cols.clear();
        vals.clear();
        let i = self.targets.node(r);
        match self.layout.mode {
            ContextMode::Simple => {
                self.g.egonet_into(i, &EgonetFilter::default(), &mut s.ego);
                let ego = std::mem::take(&mut s.ego);
                self.emit_block(0, &ego, s, cols, vals);
                s.ego = ego;
            }
            ContextMode::Full => {
                for b in &mut s.buckets {
                    b.clear();
                }
                for (d, arcs) in [(0, self.g.in_arcs(i)), (1, self.g.out_arcs(i))] {
                    for a in arcs {
                        if a.node == i {
                            continue;
                        }
                        let tau = self.types.edge[a.edge_type as usize] as usize;
                        let t = self.types.node[self.g.node_type(a.node) as usize] as usize;
                        s.buckets[self.layout.block(tau, d, t)].push(a.node);
                    }
                }
                let mut buckets = std::mem::take(&mut s.buckets);
                for (block, members) in buckets.iter_mut().enumerate() {
                    if !members.is_empty() {
                        self.emit_block(block, members, s, cols, vals);
                    }
                }
                s.buckets = buckets;
            }
        }
    }
}

/// A materialized context matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMatrix {
    pub level: usize,
    pub layout: ContextLayout,
    pub matrix: SparseMatrix,
}

impl ContextMatrix {
    pub fn width(&self) -> usize {
        self.layout.width()
    }
}

/// Full-mode context of every node from a feature matrix covering all nodes.
pub fn build_context_matrix(g: &HetGraph, x: &FeatureMatrix, spec: &HistogramSpec) -> Result<ContextMatrix> {
    build_context_matrix_with(g, &[x], spec, ContextMode::Full, &TypeMap::identity(g.registry()), None)
}

/// Context matrix over the concatenated `parts`. `targets` defaults to the
/// rows of the last part.
pub fn build_context_matrix_with(
    g: &HetGraph,
    parts: &[&FeatureMatrix],
    spec: &HistogramSpec,
    mode: ContextMode,
    types: &TypeMap,
    targets: Option<&RowSet>,
) -> Result<ContextMatrix> {
    let feats = BinnedFeatures::from_matrices(parts, spec)?;
    let targets = targets.cloned().unwrap_or_else(|| feats.rows.clone());
    let rows = ContextRows::new(g, &feats, mode, spec.bins, types.clone(), targets)?;
    let matrix = SparseMatrix::from_rows(&rows);
    Ok(ContextMatrix { level: parts.last().map_or(0, |p| p.level), layout: rows.layout, matrix })
}

/// Full-mode context row of node `i` as `(column, count)` pairs.
pub fn node_context_row(
    g: &HetGraph,
    x: &FeatureMatrix,
    i: NodeId,
    spec: &HistogramSpec,
) -> Result<Vec<(u32, f64)>> {
    g.check_node(i)?;
    let feats = BinnedFeatures::from_matrices(&[x], spec)?;
    let rows = ContextRows::new(
        g,
        &feats,
        ContextMode::Full,
        spec.bins,
        TypeMap::identity(g.registry()),
        RowSet::subset(g.num_nodes(), vec![i]),
    )?;
    let (mut cols, mut vals) = (Vec::new(), Vec::new());
    rows.row_into(0, &mut rows.scratch(), &mut cols, &mut vals);
    Ok(cols.into_iter().zip(vals).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetgraph::GraphBuilder;
    use crate::relfeat::base_features;

    #[test]
    fn bin_rule_examples() {
        let spec = HistogramSpec::new(4, 2.0).unwrap();
        assert_eq!(log_bin(&[0.0, 1.0, 2.0, 5.0], &spec).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(log_bin(&[3.0; 5], &spec).unwrap(), vec![0, 0, 5, 0]);
        assert_eq!(log_bin(&[], &spec).unwrap(), vec![0; 4]);
        assert_eq!(spec.bin_index(0.999).unwrap(), 0);
        assert_eq!(spec.bin_index(4.0).unwrap(), 3);
        assert_eq!(spec.bin_index(1e300).unwrap(), 3);
    }

    #[test]
    fn bin_edges_at_exact_powers() {
        for a in [2.0, 3.0, 10.0, 1.5] {
            let spec = HistogramSpec::new(40, a).unwrap();
            for k in 0..30 {
                let v = f64::powi(a, k);
                assert_eq!(spec.bin_index(v).unwrap(), (k as usize + 1).min(39), "a={a} k={k}");
            }
        }
    }

    #[test]
    fn rejects_bad_values_and_specs() {
        let spec = HistogramSpec::default();
        assert!(spec.bin_index(-0.5).is_err());
        assert!(spec.bin_index(f64::NAN).is_err());
        assert!(spec.bin_index(f64::INFINITY).is_err());
        assert!(HistogramSpec::new(1, 2.0).is_err());
        assert!(HistogramSpec::new(4, 1.0).is_err());
        assert!(HistogramSpec::new(300, 2.0).is_err());
    }

    #[test]
    fn homogeneous_width() {
        let mut b = GraphBuilder::with_identity_nodes(3);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let spec = HistogramSpec::new(8, 2.0).unwrap();
        let y = build_context_matrix(&g, &base_features(&g), &spec).unwrap();
        assert_eq!(y.width(), 2 * 8 * 3);
        assert_eq!(y.matrix.cols(), y.width());
    }

    #[test]
    fn no_in_edges_means_empty_in_blocks() {
        let mut b = GraphBuilder::with_identity_nodes(3);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        b.add_edge(0, 2, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let spec = HistogramSpec::default();
        let row = node_context_row(&g, &base_features(&g), 0, &spec).unwrap();
        let in_width = 3 * spec.bins();
        assert!(row.iter().all(|&(c, _)| c as usize >= in_width));
        assert_eq!(row.iter().map(|p| p.1).sum::<f64>(), 2.0 * 3.0);
    }

    #[test]
    fn simple_mode_shape() {
        let mut b = GraphBuilder::with_identity_nodes(4);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        b.add_edge(2, 3, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let x = base_features(&g);
        let spec = HistogramSpec::new(6, 2.0).unwrap();
        // two features, single block
        let two = crate::relfeat::base_features_with(&g, "out,in".parse().unwrap(), &RowSet::all(4));
        let y = build_context_matrix_with(&g, &[&two], &spec, ContextMode::Simple, &TypeMap::identity(g.registry()), None)
            .unwrap();
        assert_eq!((y.matrix.rows(), y.width()), (4, 2 * 6));
        let y3 = build_context_matrix_with(&g, &[&x], &spec, ContextMode::Simple, &TypeMap::identity(g.registry()), None)
            .unwrap();
        // node 0: egonet {0,1}, three features
        assert_eq!(y3.matrix.row_sum(0), 6.0);
    }

    #[test]
    fn isolated_nodes_have_zero_full_rows_but_ego_simple_rows() {
        let g = GraphBuilder::with_identity_nodes(3).build().unwrap();
        let x = base_features(&g);
        let spec = HistogramSpec::default();
        let full = build_context_matrix(&g, &x, &spec).unwrap();
        assert_eq!(full.matrix.nnz(), 0);
        let simple =
            build_context_matrix_with(&g, &[&x], &spec, ContextMode::Simple, &TypeMap::identity(g.registry()), None)
                .unwrap();
        // ego only, every degree 0 lands in bin 0
        for r in 0..3 {
            let (cols, vals) = simple.matrix.row(r);
            assert_eq!(cols, &[0, spec.bins() as u32, 2 * spec.bins() as u32]);
            assert_eq!(vals, &[1.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn typed_blocks_partition_star() {
        // center 0 with leaves of two types
        let mut b = GraphBuilder::new().undirected(true);
        b.add_node("c", Some("hub"));
        for (leaf, t) in [("a", "x"), ("b", "y"), ("d", "x"), ("e", "y"), ("f", "x")] {
            b.add_node(leaf, Some(t));
            b.add_edge_by_label("c", leaf, None, 1.0).unwrap();
        }
        let g = b.build().unwrap();
        let x = base_features(&g);
        let spec = HistogramSpec::default();
        let y = build_context_matrix(&g, &x, &spec).unwrap();
        let layout = y.layout;
        let c = g.label_index()["c"];
        let (cols, vals) = y.matrix.row(c as usize);
        let block_of = |col: u32| col as usize / (layout.num_features * layout.bins);
        for d in 0..2 {
            let mut total = 0.0;
            for t in 0..g.registry().num_node_types() {
                let blk = layout.block(0, d, t);
                let per_type: f64 = cols.iter().zip(vals).filter(|(&c, _)| block_of(c) == blk).map(|p| p.1).sum();
                let brute = g.out_arcs(c).iter().filter(|a| g.node_type(a.node) as usize == t).count() as f64;
                assert_eq!(per_type, brute * 3.0);
                total += per_type;
            }
            assert_eq!(total, 5.0 * 3.0);
        }
    }

    #[test]
    fn type_map_rejects_wrong_registry() {
        let g = GraphBuilder::with_identity_nodes(2).build().unwrap();
        let x = base_features(&g);
        let feats = BinnedFeatures::from_matrices(&[&x], &HistogramSpec::default()).unwrap();
        let bad = TypeMap { node: vec![0, 1], edge: vec![0], num_node_types: 2, num_edge_types: 1 };
        assert!(ContextRows::new(&g, &feats, ContextMode::Full, 32, bad, RowSet::all(2)).is_err());
    }
}
