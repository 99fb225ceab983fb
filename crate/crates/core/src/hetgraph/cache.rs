//! Binary graph cache: `LSGR` magic, u16 version, then little-endian CSR arrays.
//!
//! ```text
//! magic "LSGR" | version u16 | n u64 | m u64
//! node types: count u32, (len u32, utf8)*   edge types: same
//! node_type u32 * n | out_offsets u64 * (n+1) | arcs (dst u32, type u32, weight f64) * m
//! labels: tag u8 (0 = identity, 1 = names) [, (len u32, utf8) * n]
//! ```

use std::io::{self, Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{HetGraph, Labels, TypeRegistry};
use crate::error::{Error, Result};

pub const GRAPH_CACHE_MAGIC: &[u8; 4] = b"LSGR";
pub const GRAPH_CACHE_VERSION: u16 = 1;

pub(crate) fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub(crate) fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LE>().map_err(eof)? as usize;
    if len > 1 << 24 {
        return Err(Error::corrupt(format!("string length {len} is implausible")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(eof)?;
    String::from_utf8(buf).map_err(|_| Error::corrupt("string is not valid UTF-8"))
}

/// Turns short reads into corruption errors; other I/O errors pass through.
pub(crate) fn eof(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::corrupt("unexpected end of data (truncated file)")
    } else {
        Error::Io(e)
    }
}

pub fn write_graph_cache<W: Write>(g: &HetGraph, mut w: W) -> Result<()> {
    w.write_all(GRAPH_CACHE_MAGIC)?;
    w.write_u16::<LE>(GRAPH_CACHE_VERSION)?;
    w.write_u64::<LE>(g.num_nodes() as u64)?;
    w.write_u64::<LE>(g.num_arcs() as u64)?;
    for names in [g.registry().node_types(), g.registry().edge_types()] {
        w.write_u32::<LE>(names.len() as u32)?;
        for s in names {
            write_str(&mut w, s)?;
        }
    }
    for &t in g.node_types() {
        w.write_u32::<LE>(t)?;
    }
    for &o in g.out_offsets() {
        w.write_u64::<LE>(o as u64)?;
    }
    for a in g.all_out_arcs() {
        w.write_u32::<LE>(a.node)?;
        w.write_u32::<LE>(a.edge_type)?;
        w.write_f64::<LE>(a.weight)?;
    }
    match g.labels() {
        Labels::Identity => w.write_u8(0)?,
        Labels::Names(names) => {
            w.write_u8(1)?;
            for s in names {
                write_str(&mut w, s)?;
            }
        }
    }
    Ok(())
}

pub fn read_graph_cache<R: Read>(mut r: R) -> Result<HetGraph> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(eof)?;
    if &magic != GRAPH_CACHE_MAGIC {
        return Err(Error::corrupt("bad magic, not a graph cache"));
    }
    let version = r.read_u16::<LE>().map_err(eof)?;
    if version != GRAPH_CACHE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = r.read_u64::<LE>().map_err(eof)? as usize;
    let m = r.read_u64::<LE>().map_err(eof)? as usize;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut regs = Vec::with_capacity(2);
    for _ in 0..2 {
        let count = r.read_u32::<LE>().map_err(eof)? as usize;
        let names = (0..count).map(|_| read_str(&mut r)).collect::<Result<Vec<_>>>()?;
        regs.push(names);
    }
    let edge_types = regs.pop().unwrap();
    let node_types = regs.pop().unwrap();
    let registry = TypeRegistry::new(node_types, edge_types).map_err(|e| Error::corrupt(e.to_string()))?;

    let mut node_type = Vec::with_capacity(n);
    for _ in 0..n {
        let t = r.read_u32::<LE>().map_err(eof)?;
        if t as usize >= registry.num_node_types() {
            return Err(Error::corrupt("node type index out of range"));
        }
        node_type.push(t);
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(r.read_u64::<LE>().map_err(eof)? as usize);
    }
    if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::corrupt("inconsistent adjacency offsets"));
    }
    let mut arcs = Vec::with_capacity(m);
    for s in 0..n {
        for _ in offsets[s]..offsets[s + 1] {
            let d = r.read_u32::<LE>().map_err(eof)?;
            let t = r.read_u32::<LE>().map_err(eof)?;
            let w = r.read_f64::<LE>().map_err(eof)?;
            if d as usize >= n || t as usize >= registry.num_edge_types() || !(w.is_finite() && w > 0.0) {
                return Err(Error::corrupt("invalid arc record"));
            }
            arcs.push((s as u32, d, t, w));
        }
    }
    let labels = match r.read_u8().map_err(eof)? {
        0 => Labels::Identity,
        1 => Labels::Names((0..n).map(|_| read_str(&mut r)).collect::<Result<Vec<_>>>()?),
        t => return Err(Error::corrupt(format!("unknown label tag {t}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::corrupt("trailing bytes after graph cache"));
    }
    Ok(HetGraph::from_arcs(node_type, registry, labels, arcs))
}
