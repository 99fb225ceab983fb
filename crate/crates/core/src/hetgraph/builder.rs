use std::collections::HashMap;

use super::{HetGraph, Labels, NodeId, TypeRegistry, DEFAULT_TYPE};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }
}

/// Incremental graph construction with label remapping and duplicate merging.
///
/// Node ids are assigned densely in first-appearance order. Duplicate
/// `(src, dst, edge_type)` arcs are merged by summing their weights.
#[derive(Debug)]
pub struct GraphBuilder {
    undirected: bool,
    identity_nodes: Option<usize>,
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    node_type: Vec<u32>,
    node_types: Interner,
    edge_types: Interner,
    arcs: Vec<(NodeId, NodeId, u32, f64)>,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self {
            undirected: false,
            identity_nodes: None,
            labels: Vec::new(),
            label_index: HashMap::new(),
            node_type: Vec::new(),
            node_types: Interner::default(),
            edge_types: Interner::default(),
            arcs: Vec::new(),
        }
    }

    /// Builder over nodes `0..n` labeled by their index, all of the default type.
    pub fn with_identity_nodes(n: usize) -> Self {
        let mut b = Self::new();
        let t = b.node_types.intern(DEFAULT_TYPE);
        b.identity_nodes = Some(n);
        b.node_type = vec![t; n];
        b
    }

    /// Store every added edge as two opposite arcs.
    pub fn undirected(mut self, yes: bool) -> Self {
        self.undirected = yes;
        self
    }

    /// Labels of the nodes added so far, in id order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_nodes(&self) -> usize {
        self.node_type.len()
    }

    /// Registers `label` (if new) and returns its dense id. A given type
    /// overrides the node's current type.
    pub fn add_node(&mut self, label: &str, node_type: Option<&str>) -> NodeId {
        assert!(self.identity_nodes.is_none(), "identity builders have a fixed node set");
        let id = match self.label_index.get(label) {
            Some(&id) => id,
            None => {
                let id = self.labels.len() as NodeId;
                self.labels.push(label.to_string());
                self.label_index.insert(label.to_string(), id);
                let t = self.node_types.intern(node_type.unwrap_or(DEFAULT_TYPE));
                self.node_type.push(t);
                return id;
            }
        };
        if let Some(t) = node_type {
            self.node_type[id as usize] = self.node_types.intern(t);
        }
        id
    }

    pub fn edge_type_id(&mut self, name: &str) -> u32 {
        self.edge_types.intern(name)
    }

    pub fn add_edge_by_label(
        &mut self,
        src: &str,
        dst: &str,
        edge_type: Option<&str>,
        weight: f64,
    ) -> Result<()> {
        let s = self.add_node(src, None);
        let d = self.add_node(dst, None);
        let t = self.edge_types.intern(edge_type.unwrap_or(DEFAULT_TYPE));
        self.add_edge(s, d, t, weight)
    }

    /// Adds an arc between existing dense ids. `edge_type` must come from
    /// [`GraphBuilder::edge_type_id`] (id 0 is created on demand).
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId, edge_type: u32, weight: f64) -> Result<()> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Validation(format!("edge weight must be positive, got {weight}")));
        }
        let n = self.num_nodes();
        for v in [src, dst] {
            if v as usize >= n {
                return Err(Error::NodeOutOfRange { node: v as usize, n });
            }
        }
        if edge_type as usize >= self.edge_types.names.len() {
            if edge_type == 0 && self.edge_types.names.is_empty() {
                self.edge_types.intern(DEFAULT_TYPE);
            } else {
                return Err(Error::Validation(format!("unknown edge type id {edge_type}")));
            }
        }
        self.arcs.push((src, dst, edge_type, weight));
        if self.undirected && src != dst {
            self.arcs.push((dst, src, edge_type, weight));
        }
        Ok(())
    }

    pub fn build(mut self) -> Result<HetGraph> {
        if self.num_nodes() == 0 {
            return Err(Error::EmptyGraph);
        }
        if self.node_types.names.is_empty() {
            self.node_types.intern(DEFAULT_TYPE);
        }
        if self.edge_types.names.is_empty() {
            self.edge_types.intern(DEFAULT_TYPE);
        }
        self.arcs.sort_unstable_by_key(|a| (a.0, a.1, a.2));
        let mut merged: Vec<(NodeId, NodeId, u32, f64)> = Vec::with_capacity(self.arcs.len());
        let mut duplicates = 0usize;
        for arc in self.arcs {
            match merged.last_mut() {
                Some(last) if (last.0, last.1, last.2) == (arc.0, arc.1, arc.2) => {
                    last.3 += arc.3;
                    duplicates += 1;
                }
                _ => merged.push(arc),
            }
        }
        if duplicates > 0 {
            log::info!("merged {duplicates} duplicate arcs by summing weights");
        }
        let registry = TypeRegistry::new(self.node_types.names, self.edge_types.names)?;
        let labels = match self.identity_nodes {
            Some(_) => Labels::Identity,
            None => Labels::Names(self.labels),
        };
        Ok(HetGraph::from_arcs(self.node_type, registry, labels, merged))
    }
}
