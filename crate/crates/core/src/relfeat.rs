//! Base degree features and recursive relational-operator composition.
//!
//! Level 0 holds the weighted out/in/total degree of every node. Level `ℓ`
//! applies every enabled operator to every column of level `ℓ-1` over each
//! node's egonet (out-neighbors plus the node itself). Columns are laid out
//! operator-major: column `k * F_prev + j` is operator `k` applied to
//! previous column `j`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hetgraph::{EgonetFilter, HetGraph, NodeId};

/// Highest supported composition order.
pub const MAX_LEVELS: usize = 4;

/// Relational operator aggregating a feature over an egonet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Max,
    Min,
    Sum,
    Mean,
    Variance,
    L1Dist,
    L2Dist,
}

impl Operator {
    pub const ALL: [Operator; 7] = [
        Operator::Max,
        Operator::Min,
        Operator::Sum,
        Operator::Mean,
        Operator::Variance,
        Operator::L1Dist,
        Operator::L2Dist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Max => "max",
            Operator::Min => "min",
            Operator::Sum => "sum",
            Operator::Mean => "mean",
            Operator::Variance => "variance",
            Operator::L1Dist => "l1dist",
            Operator::L2Dist => "l2dist",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Folds `values` (the egonet's feature values, ascending node order);
    /// `ego` is the value at the center node. Empty input yields 0.
    pub fn fold(self, ego: f64, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        let n = values.len() as f64;
        match self {
            Operator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Operator::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Operator::Sum => values.iter().sum(),
            Operator::Mean => values.iter().sum::<f64>() / n,
            Operator::Variance => {
                let (s, s2) = values.iter().fold((0.0, 0.0), |(s, s2), &x| (s + x, s2 + x * x));
                variance(s, s2, n)
            }
            Operator::L1Dist => values.iter().map(|&x| (ego - x).abs()).sum(),
            Operator::L2Dist => values.iter().map(|&x| (ego - x) * (ego - x)).sum(),
        }
    }
}

#[inline]
fn variance(sum: f64, sumsq: f64, n: f64) -> f64 {
    let mean = sum / n;
    (sumsq / n - mean * mean).max(0.0)
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "max" => Operator::Max,
            "min" => Operator::Min,
            "sum" => Operator::Sum,
            "mean" => Operator::Mean,
            "variance" | "var" => Operator::Variance,
            "l1dist" | "l1" => Operator::L1Dist,
            "l2dist" | "l2" => Operator::L2Dist,
            other => return Err(Error::Config(format!("unknown operator {other:?}"))),
        })
    }
}

/// Enabled operators, always iterated in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorSet(u8);

impl Default for OperatorSet {
    fn default() -> Self {
        Self::all()
    }
}

impl OperatorSet {
    pub fn all() -> Self {
        Self(0x7f)
    }

    pub fn from_ops(ops: &[Operator]) -> Result<Self> {
        let bits = ops.iter().fold(0u8, |b, op| b | (1 << op.index()));
        Self::from_bits(bits)
    }

    pub fn from_bits(bits: u8) -> Result<Self> {
        if bits == 0 || bits & 0x80 != 0 {
            return Err(Error::Config("operator set must be a non-empty subset of the seven operators".into()));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Operator> {
        Operator::ALL.into_iter().filter(move |op| self.0 & (1 << op.index()) != 0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl FromStr for OperatorSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(Self::all());
        }
        let ops = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
        Self::from_ops(&ops)
    }
}

impl fmt::Display for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Operator::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Initial feature vectors fed to the base function (a weighted-degree sum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFeature {
    /// Row of the adjacency matrix: weighted out-degree.
    OutDegree,
    /// Column of the adjacency matrix: weighted in-degree.
    InDegree,
    /// Row of `A + Aᵀ`: weighted total degree.
    TotalDegree,
}

impl BaseFeature {
    pub const ALL: [BaseFeature; 3] = [BaseFeature::OutDegree, BaseFeature::InDegree, BaseFeature::TotalDegree];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BaseFeature::OutDegree => "out",
            BaseFeature::InDegree => "in",
            BaseFeature::TotalDegree => "total",
        }
    }
}

/// Enabled base features, in canonical (out, in, total) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseSet(u8);

impl Default for BaseSet {
    fn default() -> Self {
        Self(0b111)
    }
}

impl BaseSet {
    pub fn from_bits(bits: u8) -> Result<Self> {
        if bits == 0 || bits & !0b111 != 0 {
            return Err(Error::Config("base feature set must be a non-empty subset of {out,in,total}".into()));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = BaseFeature> {
        BaseFeature::ALL.into_iter().filter(move |b| self.0 & (1 << b.index()) != 0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl FromStr for BaseSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u8;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let b = match part {
                "out" | "b1" => BaseFeature::OutDegree,
                "in" | "b2" => BaseFeature::InDegree,
                "total" | "b3" => BaseFeature::TotalDegree,
                "all" => {
                    bits |= 0b111;
                    continue;
                }
                other => return Err(Error::Config(format!("unknown base feature {other:?}"))),
            };
            bits |= 1 << b.index();
        }
        Self::from_bits(bits)
    }
}

impl fmt::Display for BaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(BaseFeature::name).collect();
        f.write_str(&names.join(","))
    }
}

/// A relational function: a base feature followed by operators applied in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionDescriptor {
    pub base_index: u8,
    pub op_sequence: Vec<Operator>,
}

impl FunctionDescriptor {
    pub fn order(&self) -> usize {
        self.op_sequence.len()
    }
}

impl fmt::Display for FunctionDescriptor {
    /// `base_index:op,op,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.base_index)?;
        for (i, op) in self.op_sequence.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(op.name())?;
        }
        Ok(())
    }
}

impl FromStr for FunctionDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, ops) =
            s.split_once(':').ok_or_else(|| Error::Config(format!("bad function descriptor {s:?}")))?;
        let base_index: u8 = base.parse().map_err(|_| Error::Config(format!("bad base index in {s:?}")))?;
        if base_index as usize >= BaseFeature::ALL.len() {
            return Err(Error::Config(format!("base index out of range in {s:?}")));
        }
        let op_sequence = if ops.is_empty() {
            Vec::new()
        } else {
            ops.split(',').map(str::parse).collect::<Result<Vec<_>>>()?
        };
        if op_sequence.len() > MAX_LEVELS {
            return Err(Error::Config(format!("descriptor {s:?} exceeds the maximum order")));
        }
        Ok(Self { base_index, op_sequence })
    }
}

/// Which nodes a feature matrix has rows for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSet {
    num_nodes: usize,
    nodes: Option<Vec<NodeId>>,
    pos: Option<Vec<u32>>,
}

impl RowSet {
    pub fn all(num_nodes: usize) -> Self {
        Self { num_nodes, nodes: None, pos: None }
    }

    /// Rows for the given nodes, sorted and deduplicated.
    pub fn subset(num_nodes: usize, mut nodes: Vec<NodeId>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() == num_nodes {
            return Self::all(num_nodes);
        }
        let mut pos = vec![u32::MAX; num_nodes];
        for (r, &v) in nodes.iter().enumerate() {
            pos[v as usize] = r as u32;
        }
        Self { num_nodes, nodes: Some(nodes), pos: Some(pos) }
    }

    pub fn len(&self) -> usize {
        self.nodes.as_ref().map_or(self.num_nodes, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_all(&self) -> bool {
        self.nodes.is_none()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn node(&self, row: usize) -> NodeId {
        self.nodes.as_ref().map_or(row as NodeId, |v| v[row])
    }

    #[inline]
    pub fn row_of(&self, node: NodeId) -> Option<usize> {
        match &self.pos {
            None => ((node as usize) < self.num_nodes).then_some(node as usize),
            Some(pos) => {
                let p = pos[node as usize];
                (p != u32::MAX).then_some(p as usize)
            }
        }
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        (0..self.len()).map(|r| self.node(r)).collect()
    }
}

/// Dense feature block `X⁽ˡ⁾` (row-major) with one descriptor per column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub level: usize,
    ncols: usize,
    data: Vec<f64>,
    descriptors: Vec<FunctionDescriptor>,
    rows: RowSet,
}

impl FeatureMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn descriptors(&self) -> &[FunctionDescriptor] {
        &self.descriptors
    }

    pub fn rows(&self) -> &RowSet {
        &self.rows
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    /// Feature values of `node`, if this matrix has a row for it.
    pub fn node_row(&self, node: NodeId) -> Option<&[f64]> {
        self.rows.row_of(node).map(|r| self.row(r))
    }

    /// Full column `j` (requires rows for every node).
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.data[r * self.ncols + j]).collect()
    }
}

/// Level-0 matrix with all three degree features for every node.
pub fn base_features(g: &HetGraph) -> FeatureMatrix {
    base_features_with(g, BaseSet::default(), &RowSet::all(g.num_nodes()))
}

pub fn base_features_with(g: &HetGraph, bases: BaseSet, rows: &RowSet) -> FeatureMatrix {
    let kinds: Vec<BaseFeature> = bases.iter().collect();
    let ncols = kinds.len();
    let mut data = vec![0.0; rows.len() * ncols];
    data.par_chunks_mut(ncols).enumerate().for_each(|(r, out)| {
        let (o, i) = g.weighted_degrees(rows.node(r));
        for (slot, kind) in out.iter_mut().zip(&kinds) {
            *slot = match kind {
                BaseFeature::OutDegree => o,
                BaseFeature::InDegree => i,
                BaseFeature::TotalDegree => o + i,
            };
        }
    });
    let descriptors = kinds
        .iter()
        .map(|k| FunctionDescriptor { base_index: k.index() as u8, op_sequence: Vec::new() })
        .collect();
    FeatureMatrix { level: 0, ncols, data, descriptors, rows: rows.clone() }
}

/// Applies `op` over every node's default egonet.
pub fn apply_operator(g: &HetGraph, x: &[f64], op: Operator) -> Result<Vec<f64>> {
    if x.len() != g.num_nodes() {
        return Err(Error::Validation(format!(
            "feature vector has {} entries, graph has {} nodes",
            x.len(),
            g.num_nodes()
        )));
    }
    let mut out = vec![0.0; x.len()];
    let filter = EgonetFilter::default();
    out.par_iter_mut().enumerate().for_each_init(
        || (Vec::new(), Vec::new()),
        |(ego_buf, vals), (i, slot)| {
            g.egonet_into(i as NodeId, &filter, ego_buf);
            vals.clear();
            vals.extend(ego_buf.iter().map(|&j| x[j as usize]));
            *slot = op.fold(x[i], vals);
        },
    );
    Ok(out)
}

/// Next level with every operator, for every node.
pub fn build_level(g: &HetGraph, prev: &FeatureMatrix) -> Result<FeatureMatrix> {
    build_level_with(g, prev, OperatorSet::all(), &RowSet::all(g.num_nodes()))
}

/// Next level for the nodes in `target`, using only `ops`.
///
/// `prev` must have rows for every member of every target node's egonet.
pub fn build_level_with(
    g: &HetGraph,
    prev: &FeatureMatrix,
    ops: OperatorSet,
    target: &RowSet,
) -> Result<FeatureMatrix> {
    let level = prev.level + 1;
    if level > MAX_LEVELS {
        return Err(Error::LevelOverflow { level, max: MAX_LEVELS });
    }
    let fp = prev.ncols;
    let ops_list: Vec<Operator> = ops.iter().collect();
    let ncols = fp * ops_list.len();
    let mut data = vec![0.0; target.len() * ncols];
    let filter = EgonetFilter::default();

    let missing = std::sync::atomic::AtomicBool::new(false);
    data.par_chunks_mut(ncols.max(1)).enumerate().for_each_init(
        || (Vec::new(), Vec::new()),
        |(ego_buf, rows_buf): &mut (Vec<NodeId>, Vec<usize>), (r, out)| {
            let i = target.node(r);
            g.egonet_into(i, &filter, ego_buf);
            rows_buf.clear();
            for &j in ego_buf.iter() {
                match prev.rows.row_of(j) {
                    Some(pr) => rows_buf.push(pr),
                    None => {
                        missing.store(true, std::sync::atomic::Ordering::Relaxed);
                        return;
                    }
                }
            }
            let ego_row = prev.rows.row_of(i).expect("ego is part of its egonet");
            let n = rows_buf.len() as f64;
            for c in 0..fp {
                let ego = prev.data[ego_row * fp + c];
                let (mut sum, mut sumsq) = (0.0, 0.0);
                let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
                let (mut l1, mut l2) = (0.0, 0.0);
                for &pr in rows_buf.iter() {
                    let x = prev.data[pr * fp + c];
                    sum += x;
                    sumsq += x * x;
                    max = max.max(x);
                    min = min.min(x);
                    l1 += (ego - x).abs();
                    l2 += (ego - x) * (ego - x);
                }
                for (k, op) in ops_list.iter().enumerate() {
                    out[k * fp + c] = match op {
                        Operator::Max => max,
                        Operator::Min => min,
                        Operator::Sum => sum,
                        Operator::Mean => sum / n,
                        Operator::Variance => variance(sum, sumsq, n),
                        Operator::L1Dist => l1,
                        Operator::L2Dist => l2,
                    };
                }
            }
        },
    );
    if missing.into_inner() {
        return Err(Error::Validation("previous level lacks rows required by the target egonets".into()));
    }

    let mut descriptors = Vec::with_capacity(ncols);
    for op in &ops_list {
        for d in &prev.descriptors {
            let mut seq = d.op_sequence.clone();
            seq.push(*op);
            descriptors.push(FunctionDescriptor { base_index: d.base_index, op_sequence: seq });
        }
    }
    Ok(FeatureMatrix { level, ncols, data, descriptors, rows: target.clone() })
}

/// Node sets needed to compute levels `0..=levels` for `targets`.
///
/// Returns one set per level; set `ℓ` is the rows needed at level `ℓ`. The
/// last set equals `targets`, and each earlier set adds the out-neighbors of
/// the next one.
pub fn required_rows(g: &HetGraph, targets: &[NodeId], levels: usize) -> Vec<RowSet> {
    let n = g.num_nodes();
    let mut mark = vec![false; n];
    let mut current: Vec<NodeId> = Vec::with_capacity(targets.len());
    for &t in targets {
        if !std::mem::replace(&mut mark[t as usize], true) {
            current.push(t);
        }
    }
    let mut sets = vec![RowSet::subset(n, current.clone())];
    for _ in 0..levels {
        let mut next = current.clone();
        for &v in &current {
            for a in g.out_arcs(v) {
                if !std::mem::replace(&mut mark[a.node as usize], true) {
                    next.push(a.node);
                }
            }
        }
        sets.push(RowSet::subset(n, next.clone()));
        current = next;
    }
    sets.reverse();
    sets
}

/// Total number of relational functions up to level `levels`: `|B| Σ_{ℓ≤L} |Φ|^ℓ`.
pub fn function_count(bases: BaseSet, ops: OperatorSet, levels: usize) -> usize {
    (0..=levels).map(|l| bases.len() * ops.len().pow(l as u32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetgraph::GraphBuilder;

    fn graph(edges: &[(u32, u32, f64)], undirected: bool) -> HetGraph {
        let n = edges.iter().map(|e| e.0.max(e.1)).max().unwrap() as usize + 1;
        let mut b = GraphBuilder::with_identity_nodes(n).undirected(undirected);
        for &(s, d, w) in edges {
            b.add_edge(s, d, 0, w).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn path_degrees() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0)], false);
        let x = base_features(&g);
        // naive degree count
        let mut expect = vec![[0.0; 3]; 3];
        for (s, d) in [(0usize, 1usize), (1, 2)] {
            expect[s][0] += 1.0;
            expect[d][1] += 1.0;
        }
        for row in &mut expect {
            row[2] = row[0] + row[1];
        }
        for (i, row) in expect.iter().enumerate() {
            assert_eq!(x.row(i), row);
        }
        assert_eq!(expect, vec![[1.0, 0.0, 1.0], [1.0, 1.0, 2.0], [0.0, 1.0, 1.0]]);
    }

    #[test]
    fn isolated_node_has_zero_degrees() {
        let mut b = GraphBuilder::with_identity_nodes(3);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        let x = base_features(&b.build().unwrap());
        assert_eq!(x.row(2), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn weighted_out_degree() {
        let g = graph(&[(0, 1, 2.5)], false);
        assert_eq!(base_features(&g).row(0)[0], 2.5);
    }

    #[test]
    fn sum_over_undirected_path() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0)], true);
        let x = [1.0, 2.0, 1.0];
        let s = apply_operator(&g, &x, Operator::Sum).unwrap();
        assert_eq!(s[1], 4.0);
    }

    #[test]
    fn variance_of_singleton_is_zero() {
        assert_eq!(Operator::Variance.fold(3.0, &[3.0]), 0.0);
        let mut b = GraphBuilder::with_identity_nodes(1);
        b.add_edge(0, 0, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let v = apply_operator(&g, &[7.5], Operator::Variance).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn empty_fold_is_zero() {
        for op in Operator::ALL {
            assert_eq!(op.fold(1.0, &[]), 0.0);
        }
    }

    #[test]
    fn column_count_law() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], false);
        let x0 = base_features(&g);
        let x1 = build_level(&g, &x0).unwrap();
        let x2 = build_level(&g, &x1).unwrap();
        assert_eq!(x1.ncols(), 21);
        assert_eq!(x2.ncols(), 147);
        assert_eq!(function_count(BaseSet::default(), OperatorSet::all(), 2), 171);
    }

    #[test]
    fn operator_major_layout() {
        let g = graph(&[(0, 1, 1.0)], false);
        let x1 = build_level(&g, &base_features(&g)).unwrap();
        assert_eq!(x1.descriptors()[0].to_string(), "0:max");
        assert_eq!(x1.descriptors()[1].to_string(), "1:max");
        assert_eq!(x1.descriptors()[3].to_string(), "0:min");
        assert_eq!(x1.descriptors()[20].to_string(), "2:l2dist");
    }

    #[test]
    fn all_zero_input_stays_zero() {
        let mut b = GraphBuilder::with_identity_nodes(4);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let zero = FeatureMatrix {
            level: 0,
            ncols: 2,
            data: vec![0.0; 8],
            descriptors: vec![
                FunctionDescriptor { base_index: 0, op_sequence: vec![] },
                FunctionDescriptor { base_index: 1, op_sequence: vec![] },
            ],
            rows: RowSet::all(4),
        };
        let x1 = build_level(&g, &zero).unwrap();
        assert!(x1.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_node_graph_levels() {
        let mut b = GraphBuilder::new();
        b.add_node("solo", None);
        let g = b.build().unwrap();
        let x0 = base_features(&g);
        let x1 = build_level(&g, &x0).unwrap();
        // singleton egonet {i}: max=min=sum=mean=x_i, variance=l1=l2=0
        for (k, op) in Operator::ALL.iter().enumerate() {
            for c in 0..3 {
                assert_eq!(x1.row(0)[k * 3 + c], op.fold(x0.row(0)[c], &[x0.row(0)[c]]));
            }
        }
    }

    #[test]
    fn level_overflow() {
        let g = graph(&[(0, 1, 1.0)], false);
        let mut x = base_features(&g);
        for _ in 0..MAX_LEVELS {
            x = build_level_with(&g, &x, OperatorSet::from_ops(&[Operator::Sum]).unwrap(), &RowSet::all(2))
                .unwrap();
        }
        assert!(matches!(build_level(&g, &x), Err(Error::LevelOverflow { .. })));
    }

    #[test]
    fn descriptor_round_trip() {
        for s in ["0:", "2:max,l2dist", "1:variance,sum,mean"] {
            let d: FunctionDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("5:max".parse::<FunctionDescriptor>().is_err());
        assert!("0:bogus".parse::<FunctionDescriptor>().is_err());
    }

    #[test]
    fn subset_levels_match_full() {
        let g = graph(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.0), (1, 3, 1.0), (4, 0, 1.0)], false);
        let full1 = build_level(&g, &base_features(&g)).unwrap();
        let full2 = build_level(&g, &full1).unwrap();
        let sets = required_rows(&g, &[2], 2);
        let x0 = base_features_with(&g, BaseSet::default(), &sets[0]);
        let x1 = build_level_with(&g, &x0, OperatorSet::all(), &sets[1]).unwrap();
        let x2 = build_level_with(&g, &x1, OperatorSet::all(), &sets[2]).unwrap();
        assert_eq!(x2.node_row(2).unwrap(), full2.node_row(2).unwrap());
        assert!(x2.node_row(0).is_none());
    }

    #[test]
    fn set_parsing() {
        let ops: OperatorSet = "max,sum".parse().unwrap();
        assert_eq!(ops.len(), 2);
        assert_eq!(ops.to_string(), "max,sum");
        let b: BaseSet = "total,out".parse().unwrap();
        assert_eq!(b.to_string(), "out,total");
        assert!("".parse::<OperatorSet>().is_err());
    }
}
