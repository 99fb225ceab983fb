//! Typed, directed, weighted graph with egonet queries.
//!
//! Nodes are dense indices `0..N`. Adjacency is stored twice in CSR form
//! (outgoing and incoming), each list sorted by `(neighbor, edge_type)`, so
//! every egonet query is a linear scan over one or two slices.

mod builder;
pub(crate) mod cache;
pub(crate) mod io;

use std::borrow::Cow;
use std::collections::HashMap;

pub use builder::GraphBuilder;
pub use cache::{read_graph_cache, write_graph_cache, GRAPH_CACHE_MAGIC, GRAPH_CACHE_VERSION};
pub use io::{
    load_edge_list, load_edge_list_files, write_edge_list, write_node_types, EdgeListOptions,
};

use crate::error::{Error, Result};

/// Dense node index.
pub type NodeId = u32;

/// Name of the implicit type used when no type information is supplied.
pub const DEFAULT_TYPE: &str = "0";

/// Ordered node-type and edge-type names. Indices into these lists are the
/// type ids used throughout the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRegistry {
    node_types: Vec<String>,
    edge_types: Vec<String>,
}

impl Default for TypeRegistry {
    fn default() -> Self {
        Self::homogeneous()
    }
}

impl TypeRegistry {
    /// One node type and one edge type, both named `"0"`.
    pub fn homogeneous() -> Self {
        Self {
            node_types: vec![DEFAULT_TYPE.to_string()],
            edge_types: vec![DEFAULT_TYPE.to_string()],
        }
    }

    pub fn new(node_types: Vec<String>, edge_types: Vec<String>) -> Result<Self> {
        fn check(kind: &str, names: &[String]) -> Result<()> {
            if names.is_empty() {
                return Err(Error::Validation(format!("at least one {kind} type is required")));
            }
            let mut seen = std::collections::HashSet::new();
            for n in names {
                if !seen.insert(n.as_str()) {
                    return Err(Error::Validation(format!("duplicate {kind} type {n:?}")));
                }
            }
            Ok(())
        }
        check("node", &node_types)?;
        check("edge", &edge_types)?;
        Ok(Self { node_types, edge_types })
    }

    pub fn node_types(&self) -> &[String] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[String] {
        &self.edge_types
    }

    pub fn num_node_types(&self) -> usize {
        self.node_types.len()
    }

    pub fn num_edge_types(&self) -> usize {
        self.edge_types.len()
    }

    pub fn node_type_id(&self, name: &str) -> Option<u32> {
        self.node_types.iter().position(|t| t == name).map(|p| p as u32)
    }

    pub fn edge_type_id(&self, name: &str) -> Option<u32> {
        self.edge_types.iter().position(|t| t == name).map(|p| p as u32)
    }

    /// Maps this registry's type ids onto `target`'s ids by name.
    ///
    /// Fails if any type of `self` is unknown to `target`.
    pub fn map_into(&self, target: &TypeRegistry) -> Result<TypeMap> {
        let map = |kind: &str, ours: &[String], theirs: &[String]| -> Result<Vec<u32>> {
            ours.iter()
                .map(|name| {
                    theirs
                        .iter()
                        .position(|t| t == name)
                        .map(|p| p as u32)
                        .ok_or_else(|| {
                            Error::TypeMismatch(format!("{kind} type {name:?} is not in the summary"))
                        })
                })
                .collect()
        };
        Ok(TypeMap {
            node: map("node", &self.node_types, &target.node_types)?,
            edge: map("edge", &self.edge_types, &target.edge_types)?,
            num_node_types: target.num_node_types(),
            num_edge_types: target.num_edge_types(),
        })
    }
}

/// Translation of one graph's type ids into a reference registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMap {
    pub node: Vec<u32>,
    pub edge: Vec<u32>,
    pub num_node_types: usize,
    pub num_edge_types: usize,
}

impl TypeMap {
    pub fn identity(reg: &TypeRegistry) -> Self {
        Self {
            node: (0..reg.num_node_types() as u32).collect(),
            edge: (0..reg.num_edge_types() as u32).collect(),
            num_node_types: reg.num_node_types(),
            num_edge_types: reg.num_edge_types(),
        }
    }
}

/// One adjacency entry: the neighbor on the other end, the edge type and the
/// (strictly positive) weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub node: NodeId,
    pub edge_type: u32,
    pub weight: f64,
}

/// Edge direction relative to the ego node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Restriction applied to an egonet query.
///
/// The default filter is the plain egonet: out-neighbors plus the node itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EgonetFilter {
    pub node_type: Option<u32>,
    pub edge_type: Option<u32>,
    pub direction: Direction,
    pub include_ego: bool,
}

impl Default for EgonetFilter {
    fn default() -> Self {
        Self { node_type: None, edge_type: None, direction: Direction::Out, include_ego: true }
    }
}

impl EgonetFilter {
    /// Strict directional neighborhood: neighbors across `direction` only,
    /// never the ego itself.
    pub fn directional(direction: Direction) -> Self {
        Self { node_type: None, edge_type: None, direction, include_ego: false }
    }

    pub fn with_node_type(mut self, t: u32) -> Self {
        self.node_type = Some(t);
        self
    }

    pub fn with_edge_type(mut self, t: u32) -> Self {
        self.edge_type = Some(t);
        self
    }
}

/// Dense-id to original-label mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels {
    /// Label of node `i` is its decimal index.
    Identity,
    Names(Vec<String>),
}

/// Heterogeneous graph `G = (V, E, θ, ξ)`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct HetGraph {
    out_offsets: Vec<usize>,
    out_arcs: Vec<Arc>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<Arc>,
    node_type: Vec<u32>,
    registry: TypeRegistry,
    labels: Labels,
}

impl HetGraph {
    /// Builds a graph from already-deduplicated, validated arcs.
    ///
    /// `arcs` are `(src, dst, edge_type, weight)`; they are sorted here.
    pub(crate) fn from_arcs(
        node_type: Vec<u32>,
        registry: TypeRegistry,
        labels: Labels,
        mut arcs: Vec<(NodeId, NodeId, u32, f64)>,
    ) -> Self {
        let n = node_type.len();
        arcs.sort_unstable_by_key(|a| (a.0, a.1, a.2));

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_counts = vec![0usize; n + 1];
        for &(s, d, _, _) in &arcs {
            out_offsets[s as usize + 1] += 1;
            in_counts[d as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_counts[i + 1] += in_counts[i];
        }
        let in_offsets = in_counts.clone();
        let mut cursor = in_counts;
        let out_arcs: Vec<Arc> =
            arcs.iter().map(|&(_, d, t, w)| Arc { node: d, edge_type: t, weight: w }).collect();
        let mut in_arcs = vec![Arc { node: 0, edge_type: 0, weight: 0.0 }; arcs.len()];
        // arcs are sorted by source, so each in-list fills in (source, type) order
        for &(s, d, t, w) in &arcs {
            let slot = &mut cursor[d as usize];
            in_arcs[*slot] = Arc { node: s, edge_type: t, weight: w };
            *slot += 1;
        }
        Self { out_offsets, out_arcs, in_offsets, in_arcs, node_type, registry, labels }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_type.len()
    }

    /// Number of stored directed arcs.
    pub fn num_arcs(&self) -> usize {
        self.out_arcs.len()
    }

    pub fn registry(&self) -> &TypeRegistry {
        &self.registry
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn node_type(&self, i: NodeId) -> u32 {
        self.node_type[i as usize]
    }

    pub fn node_types(&self) -> &[u32] {
        &self.node_type
    }

    pub fn label(&self, i: NodeId) -> Cow<'_, str> {
        match &self.labels {
            Labels::Identity => Cow::Owned(i.to_string()),
            Labels::Names(v) => Cow::Borrowed(&v[i as usize]),
        }
    }

    /// Label to dense id lookup table.
    pub fn label_index(&self) -> HashMap<String, NodeId> {
        (0..self.num_nodes() as NodeId).map(|i| (self.label(i).into_owned(), i)).collect()
    }

    #[inline]
    pub fn out_arcs(&self, i: NodeId) -> &[Arc] {
        let i = i as usize;
        &self.out_arcs[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    #[inline]
    pub fn in_arcs(&self, i: NodeId) -> &[Arc] {
        let i = i as usize;
        &self.in_arcs[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub(crate) fn out_offsets(&self) -> &[usize] {
        &self.out_offsets
    }

    pub(crate) fn all_out_arcs(&self) -> &[Arc] {
        &self.out_arcs
    }

    /// Iterates every arc as `(src, arc)` in source order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, &Arc)> + '_ {
        (0..self.num_nodes() as NodeId).flat_map(move |s| self.out_arcs(s).iter().map(move |a| (s, a)))
    }

    /// True when every arc `u→v` has a reverse arc `v→u` of the same type and weight.
    pub fn is_symmetric(&self) -> bool {
        self.arcs().all(|(s, a)| {
            self.out_arcs(a.node)
                .binary_search_by(|b| (b.node, b.edge_type).cmp(&(s, a.edge_type)))
                .map(|p| self.out_arcs(a.node)[p].weight == a.weight)
                .unwrap_or(false)
        })
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        let arcs = self.out_arcs(u);
        let p = arcs.partition_point(|a| a.node < v);
        p < arcs.len() && arcs[p].node == v
    }

    /// Egonet of `i` under `filter`, sorted ascending and deduplicated.
    pub fn egonet(&self, i: NodeId, filter: &EgonetFilter) -> Result<Vec<NodeId>> {
        self.check_node(i)?;
        let mut out = Vec::new();
        self.egonet_into(i, filter, &mut out);
        Ok(out)
    }

    pub(crate) fn check_node(&self, i: NodeId) -> Result<()> {
        if (i as usize) < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: i as usize, n: self.num_nodes() })
        }
    }

    /// Allocation-reusing variant of [`HetGraph::egonet`]. `i` must be in range.
    pub fn egonet_into(&self, i: NodeId, filter: &EgonetFilter, out: &mut Vec<NodeId>) {
        out.clear();
        let keep = |a: &Arc| {
            filter.edge_type.is_none_or(|t| a.edge_type == t)
                && filter.node_type.is_none_or(|t| self.node_type[a.node as usize] == t)
        };
        match filter.direction {
            Direction::Out => push_dedup(out, self.out_arcs(i).iter().filter(|a| keep(a)).map(|a| a.node)),
            Direction::In => push_dedup(out, self.in_arcs(i).iter().filter(|a| keep(a)).map(|a| a.node)),
            Direction::Both => {
                push_dedup(out, self.out_arcs(i).iter().filter(|a| keep(a)).map(|a| a.node));
                push_dedup(out, self.in_arcs(i).iter().filter(|a| keep(a)).map(|a| a.node));
                out.sort_unstable();
                out.dedup();
            }
        }
        if filter.include_ego && filter.node_type.is_none_or(|t| self.node_type[i as usize] == t) {
            if let Err(p) = out.binary_search(&i) {
                out.insert(p, i);
            }
        } else if !filter.include_ego {
            // strict neighborhoods exclude the ego even when a self-loop exists
            if let Ok(p) = out.binary_search(&i) {
                out.remove(p);
            }
        }
    }

    /// Weighted out-degree, in-degree.
    pub fn weighted_degrees(&self, i: NodeId) -> (f64, f64) {
        let out = self.out_arcs(i).iter().map(|a| a.weight).sum();
        let inn = self.in_arcs(i).iter().map(|a| a.weight).sum();
        (out, inn)
    }

    /// Returns a copy keeping only the arcs for which `keep(src, arc)` holds.
    /// The node set is unchanged.
    pub fn filter_arcs(&self, mut keep: impl FnMut(NodeId, &Arc) -> bool) -> Self {
        let arcs = self
            .arcs()
            .filter(|(s, a)| keep(*s, a))
            .map(|(s, a)| (s, a.node, a.edge_type, a.weight))
            .collect();
        Self::from_arcs(self.node_type.clone(), self.registry.clone(), self.labels.clone(), arcs)
    }

    /// Returns a copy with extra arcs; arcs already present gain the added weight.
    pub fn with_added_arcs(&self, extra: impl IntoIterator<Item = (NodeId, NodeId, u32, f64)>) -> Result<Self> {
        let n = self.num_nodes();
        let mut arcs: Vec<(NodeId, NodeId, u32, f64)> =
            self.arcs().map(|(s, a)| (s, a.node, a.edge_type, a.weight)).collect();
        for (s, d, t, w) in extra {
            for v in [s, d] {
                self.check_node(v)?;
            }
            if t as usize >= self.registry.num_edge_types() {
                return Err(Error::Validation(format!("unknown edge type id {t}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!("edge weight must be positive, got {w}")));
            }
            arcs.push((s, d, t, w));
        }
        arcs.sort_by_key(|a| (a.0, a.1, a.2));
        let mut merged: Vec<(NodeId, NodeId, u32, f64)> = Vec::with_capacity(arcs.len());
        for arc in arcs {
            match merged.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (arc.0, arc.1, arc.2) => last.3 += arc.3,
                _ => merged.push(arc),
            }
        }
        debug_assert!(merged.iter().all(|a| (a.0 as usize) < n));
        Ok(Self::from_arcs(self.node_type.clone(), self.registry.clone(), self.labels.clone(), merged))
    }

    /// Returns a copy with every node relabeled by `perm` (old id -> new id).
    pub fn permuted(&self, perm: &[NodeId]) -> Result<Self> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::Validation("permutation length differs from node count".into()));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p as usize >= n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::Validation("not a permutation".into()));
            }
        }
        let mut node_type = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            node_type[new as usize] = self.node_type[old];
        }
        let labels = match &self.labels {
            Labels::Identity => Labels::Identity,
            Labels::Names(names) => {
                let mut v = vec![String::new(); n];
                for (old, &new) in perm.iter().enumerate() {
                    v[new as usize] = names[old].clone();
                }
                Labels::Names(v)
            }
        };
        let arcs = self
            .arcs()
            .map(|(s, a)| (perm[s as usize], perm[a.node as usize], a.edge_type, a.weight))
            .collect();
        Ok(Self::from_arcs(node_type, self.registry.clone(), labels, arcs))
    }
}

/// Appends a sorted run, skipping consecutive duplicates.
fn push_dedup(out: &mut Vec<NodeId>, it: impl Iterator<Item = NodeId>) {
    let start = out.len();
    for v in it {
        if out.len() == start || *out.last().unwrap() != v {
            out.push(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> HetGraph {
        let mut b = GraphBuilder::new();
        b.add_edge_by_label("0", "1", None, 1.0).unwrap();
        b.add_edge_by_label("1", "2", None, 1.0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn path_egonet_default_out() {
        let g = path();
        assert_eq!(g.egonet(1, &EgonetFilter::default()).unwrap(), vec![1, 2]);
    }

    #[test]
    fn star_egonet() {
        let mut b = GraphBuilder::new();
        for leaf in ["1", "2", "3"] {
            b.add_edge_by_label("0", leaf, None, 1.0).unwrap();
        }
        let g = b.build().unwrap();
        assert_eq!(g.egonet(0, &EgonetFilter::default()).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(g.egonet(0, &EgonetFilter::directional(Direction::In)).unwrap(), Vec::<u32>::new());
        assert_eq!(g.egonet(2, &EgonetFilter::directional(Direction::In)).unwrap(), vec![0]);
    }

    #[test]
    fn isolated_node() {
        let mut b = GraphBuilder::new();
        b.add_node("a", None);
        b.add_edge_by_label("b", "c", None, 1.0).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.egonet(0, &EgonetFilter::default()).unwrap(), vec![0]);
        assert!(g.egonet(0, &EgonetFilter::directional(Direction::Out)).unwrap().is_empty());
        assert!(g.egonet(0, &EgonetFilter::directional(Direction::In)).unwrap().is_empty());
    }

    #[test]
    fn out_of_range() {
        let g = path();
        assert!(matches!(g.egonet(7, &EgonetFilter::default()), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn typed_egonet_includes_ego_only_when_type_matches() {
        let mut b = GraphBuilder::new();
        b.add_node("u", Some("user"));
        b.add_node("i", Some("item"));
        b.add_node("v", Some("user"));
        b.add_edge_by_label("u", "i", None, 1.0).unwrap();
        b.add_edge_by_label("u", "v", None, 1.0).unwrap();
        let g = b.build().unwrap();
        let user = g.registry().node_type_id("user").unwrap();
        let item = g.registry().node_type_id("item").unwrap();
        assert_eq!(g.egonet(0, &EgonetFilter::default().with_node_type(user)).unwrap(), vec![0, 2]);
        assert_eq!(g.egonet(0, &EgonetFilter::default().with_node_type(item)).unwrap(), vec![1]);
    }

    #[test]
    fn both_direction_unions_and_dedups() {
        let mut b = GraphBuilder::new();
        b.add_edge_by_label("0", "1", None, 1.0).unwrap();
        b.add_edge_by_label("1", "0", None, 1.0).unwrap();
        b.add_edge_by_label("2", "0", None, 1.0).unwrap();
        let g = b.build().unwrap();
        let f = EgonetFilter { direction: Direction::Both, ..EgonetFilter::default() };
        assert_eq!(g.egonet(0, &f).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn self_loop_excluded_from_strict_neighborhood() {
        let mut b = GraphBuilder::new();
        b.add_edge_by_label("0", "0", None, 1.0).unwrap();
        b.add_edge_by_label("0", "1", None, 1.0).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.egonet(0, &EgonetFilter::directional(Direction::Out)).unwrap(), vec![1]);
        assert_eq!(g.egonet(0, &EgonetFilter::default()).unwrap(), vec![0, 1]);
    }

    #[test]
    fn symmetry_detection() {
        let g = path();
        assert!(!g.is_symmetric());
        let mut b = GraphBuilder::new().undirected(true);
        b.add_edge_by_label("0", "1", None, 2.0).unwrap();
        assert!(b.build().unwrap().is_symmetric());
    }
}
