//! Edge-list and node-type TSV ingestion.
//!
//! Edge lines are `src dst [weight] [edge_type]`, node-type lines are
//! `node type`. Fields are separated by tabs (any ASCII whitespace is
//! accepted). Blank lines and lines starting with `#` or `%` are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{GraphBuilder, HetGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Third column carries the edge weight.
    pub weighted: bool,
    /// Last column carries the edge type name.
    pub typed_edges: bool,
    /// Store each line as two opposite arcs.
    pub undirected: bool,
}

impl EdgeListOptions {
    /// Options matching the output of [`write_edge_list`].
    pub fn full() -> Self {
        Self { weighted: true, typed_edges: true, undirected: false }
    }
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

/// Parses an edge list (and optional node-type list) into a graph.
///
/// Nodes listed in the node-type source receive ids first, in file order;
/// remaining nodes are numbered by first appearance in the edge list.
pub fn load_edge_list<R: BufRead, T: BufRead>(
    edges: R,
    node_types: Option<T>,
    opts: EdgeListOptions,
) -> Result<HetGraph> {
    let mut b = GraphBuilder::new().undirected(opts.undirected);
    if let Some(types) = node_types {
        for (no, line) in types.lines().enumerate() {
            let line = line?;
            if is_skipped(&line) {
                continue;
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: no + 1,
                    msg: format!("expected `node<TAB>type`, found {} fields", fields.len()),
                });
            }
            b.add_node(fields[0], Some(fields[1]));
        }
    }

    read_edges_into(&mut b, edges, opts)?;
    b.build()
}

/// Parses edge lines into an existing builder, so callers can fix node ids
/// up front.
pub(crate) fn read_edges_into<R: BufRead>(b: &mut GraphBuilder, edges: R, opts: EdgeListOptions) -> Result<()> {
    let expected = 2 + opts.weighted as usize + opts.typed_edges as usize;
    for (no, line) in edges.lines().enumerate() {
        let line = line?;
        if is_skipped(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                line: no + 1,
                msg: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let weight = if opts.weighted {
            fields[2].parse::<f64>().map_err(|e| Error::Parse {
                line: no + 1,
                msg: format!("bad weight {:?}: {e}", fields[2]),
            })?
        } else {
            1.0
        };
        let edge_type = opts.typed_edges.then(|| fields[expected - 1]);
        b.add_edge_by_label(fields[0], fields[1], edge_type, weight).map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("line {}: {msg}", no + 1)),
            other => other,
        })?;
    }
    Ok(())
}

pub fn load_edge_list_files(
    edges: &Path,
    node_types: Option<&Path>,
    opts: EdgeListOptions,
) -> Result<HetGraph> {
    let e = BufReader::new(File::open(edges)?);
    match node_types {
        Some(p) => load_edge_list(e, Some(BufReader::new(File::open(p)?)), opts),
        None => load_edge_list(e, None::<BufReader<File>>, opts),
    }
}

/// Writes every arc as `src<TAB>dst<TAB>weight<TAB>edge_type`.
pub fn write_edge_list<W: Write>(g: &HetGraph, mut w: W) -> Result<()> {
    let et = g.registry().edge_types();
    for (s, a) in g.arcs() {
        writeln!(w, "{}\t{}\t{}\t{}", g.label(s), g.label(a.node), a.weight, et[a.edge_type as usize])?;
    }
    Ok(())
}

/// Writes `label<TAB>type` for every node in dense-id order.
pub fn write_node_types<W: Write>(g: &HetGraph, mut w: W) -> Result<()> {
    let nt = g.registry().node_types();
    for i in 0..g.num_nodes() as u32 {
        writeln!(w, "{}\t{}", g.label(i), nt[g.node_type(i) as usize])?;
    }
    Ok(())
}
