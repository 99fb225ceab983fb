//! Latent summaries: function descriptors plus per-level factor matrices.
//!
//! For each level the context matrix `Y` is factored as `U Σ Vᵀ` and only
//! `H = √Σ Vᵀ` (and its pseudo-inverse) is kept. Embeddings of any graph
//! whose types map into the summary's registry are `Y' H†`, recomputed from
//! the graph on demand. Nothing stored depends on the node or edge count.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "MLNS" | version u16
//! config: levels u32 | dim u32 | per-level dims u32*L | bins u32 | log_base f64
//!         | bases u8 | operators u8 | context mode u8
//!         | svd method u8 | oversample u32 | power iterations u32 | seed u64
//! registries: node types, edge types (count u32, then length-prefixed utf8)
//! per level: width u64 | descriptor count u32 | descriptors
//!            | H (k x width, row-major f64) | H† (width x k, row-major f64)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;

use crate::context::{BinnedFeatures, ContextLayout, ContextMatrix, ContextMode, ContextRows, HistogramSpec};
use crate::error::{Error, Result};
use crate::hetgraph::cache::{eof, read_str, write_str};
use crate::hetgraph::{HetGraph, NodeId, TypeMap, TypeRegistry};
use crate::lowrank::{
    mul_dense, pseudo_inverse, truncated_svd, truncated_svd_right, Dense, SparseMatrix, SparseRows, SvdMethod,
    SvdOptions,
};
use crate::relfeat::{
    base_features_with, build_level_with, required_rows, BaseSet, FeatureMatrix, FunctionDescriptor, OperatorSet,
    RowSet, MAX_LEVELS,
};

pub const SUMMARY_MAGIC: &[u8; 4] = b"MLNS";
pub const SUMMARY_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryConfig {
    pub levels: usize,
    /// Total embedding dimension, split across levels by [`SummaryConfig::level_dims`].
    pub dim: usize,
    pub histogram: HistogramSpec,
    pub bases: BaseSet,
    pub operators: OperatorSet,
    pub context_mode: ContextMode,
    pub svd: SvdOptions,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self {
            levels: 2,
            dim: 128,
            histogram: HistogramSpec::default(),
            bases: BaseSet::default(),
            operators: OperatorSet::all(),
            context_mode: ContextMode::Full,
            svd: SvdOptions::default(),
        }
    }
}

impl SummaryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::Config(format!("levels must be in 1..={MAX_LEVELS}, got {}", self.levels)));
        }
        if self.dim < self.levels {
            return Err(Error::Config(format!(
                "dimension {} cannot be split across {} levels",
                self.dim, self.levels
            )));
        }
        Ok(())
    }

    /// Equal split of `dim`; the remainder goes to the earliest levels.
    pub fn level_dims(&self) -> Vec<usize> {
        let (q, r) = (self.dim / self.levels, self.dim % self.levels);
        (0..self.levels).map(|l| q + usize::from(l < r)).collect()
    }

    /// Number of binned feature columns feeding the context of `level` (1-based).
    pub fn context_features(&self, level: usize) -> usize {
        let per = |l: usize| self.bases.len() * self.operators.len().pow(l as u32);
        if level == 1 {
            per(0) + per(1)
        } else {
            per(level)
        }
    }

    pub fn layout(&self, level: usize, registry: &TypeRegistry) -> ContextLayout {
        ContextLayout {
            mode: self.context_mode,
            num_edge_types: registry.num_edge_types(),
            num_node_types: registry.num_node_types(),
            num_features: self.context_features(level),
            bins: self.histogram.bins(),
        }
    }

    fn level_svd(&self, level: usize) -> SvdOptions {
        SvdOptions { seed: self.svd.seed.wrapping_add(level as u64), ..self.svd }
    }
}

/// One level of a summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLevel {
    /// Descriptors of the binned feature columns, in context order.
    pub descriptors: Vec<FunctionDescriptor>,
    /// `k x width`.
    pub h: DMatrix<f64>,
    /// `width x k`.
    pub h_pinv: DMatrix<f64>,
}

impl SummaryLevel {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn width(&self) -> usize {
        self.h.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    config: SummaryConfig,
    registry: TypeRegistry,
    levels: Vec<SummaryLevel>,
}

impl Summary {
    pub fn config(&self) -> &SummaryConfig {
        &self.config
    }

    pub fn registry(&self) -> &TypeRegistry {
        &self.registry
    }

    pub fn levels(&self) -> &[SummaryLevel] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().map(SummaryLevel::dim).sum()
    }

    /// Every relational function used, across all levels.
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDescriptor> {
        self.levels.iter().flat_map(|l| l.descriptors.iter())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let s = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return Err(Error::corrupt("trailing bytes after summary"));
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let s = Self::read_from(&mut r)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::corrupt("trailing bytes after summary"));
        }
        Ok(s)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let c = &self.config;
        w.write_all(SUMMARY_MAGIC)?;
        w.write_u16::<LE>(SUMMARY_VERSION)?;
        w.write_u32::<LE>(c.levels as u32)?;
        w.write_u32::<LE>(c.dim as u32)?;
        for k in c.level_dims() {
            w.write_u32::<LE>(k as u32)?;
        }
        w.write_u32::<LE>(c.histogram.bins() as u32)?;
        w.write_f64::<LE>(c.histogram.log_base())?;
        w.write_u8(c.bases.bits())?;
        w.write_u8(c.operators.bits())?;
        w.write_u8(match c.context_mode {
            ContextMode::Full => 0,
            ContextMode::Simple => 1,
        })?;
        w.write_u8(match c.svd.method {
            SvdMethod::Auto => 0,
            SvdMethod::Randomized => 1,
            SvdMethod::Exact => 2,
        })?;
        w.write_u32::<LE>(c.svd.oversample as u32)?;
        w.write_u32::<LE>(c.svd.power_iters as u32)?;
        w.write_u64::<LE>(c.svd.seed)?;
        for names in [self.registry.node_types(), self.registry.edge_types()] {
            w.write_u32::<LE>(names.len() as u32)?;
            for s in names {
                write_str(&mut w, s)?;
            }
        }
        for level in &self.levels {
            w.write_u64::<LE>(level.width() as u64)?;
            w.write_u32::<LE>(level.descriptors.len() as u32)?;
            for d in &level.descriptors {
                write_str(&mut w, &d.to_string())?;
            }
            write_row_major(&mut w, &level.h)?;
            write_row_major(&mut w, &level.h_pinv)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(eof)?;
        if &magic != SUMMARY_MAGIC {
            return Err(Error::corrupt("bad magic, not a summary file"));
        }
        let version = r.read_u16::<LE>().map_err(eof)?;
        if version != SUMMARY_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let levels = r.read_u32::<LE>().map_err(eof)? as usize;
        let dim = r.read_u32::<LE>().map_err(eof)? as usize;
        if !(1..=MAX_LEVELS).contains(&levels) {
            return Err(Error::corrupt(format!("level count {levels} out of range")));
        }
        let dims = (0..levels).map(|_| r.read_u32::<LE>().map(|k| k as usize)).collect::<std::io::Result<Vec<_>>>();
        let dims = dims.map_err(eof)?;
        let bins = r.read_u32::<LE>().map_err(eof)? as usize;
        let log_base = r.read_f64::<LE>().map_err(eof)?;
        let histogram = HistogramSpec::new(bins, log_base).map_err(|e| Error::corrupt(e.to_string()))?;
        let bases = BaseSet::from_bits(r.read_u8().map_err(eof)?).map_err(|e| Error::corrupt(e.to_string()))?;
        let operators =
            OperatorSet::from_bits(r.read_u8().map_err(eof)?).map_err(|e| Error::corrupt(e.to_string()))?;
        let context_mode = match r.read_u8().map_err(eof)? {
            0 => ContextMode::Full,
            1 => ContextMode::Simple,
            t => return Err(Error::corrupt(format!("unknown context mode tag {t}"))),
        };
        let method = match r.read_u8().map_err(eof)? {
            0 => SvdMethod::Auto,
            1 => SvdMethod::Randomized,
            2 => SvdMethod::Exact,
            t => return Err(Error::corrupt(format!("unknown svd method tag {t}"))),
        };
        let oversample = r.read_u32::<LE>().map_err(eof)? as usize;
        let power_iters = r.read_u32::<LE>().map_err(eof)? as usize;
        let seed = r.read_u64::<LE>().map_err(eof)?;
        let config = SummaryConfig {
            levels,
            dim,
            histogram,
            bases,
            operators,
            context_mode,
            svd: SvdOptions { method, oversample, power_iters, seed },
        };
        config.validate().map_err(|e| Error::corrupt(e.to_string()))?;
        if config.level_dims() != dims {
            return Err(Error::corrupt("per-level dimensions disagree with the total"));
        }
        let mut regs = Vec::with_capacity(2);
        for _ in 0..2 {
            let count = r.read_u32::<LE>().map_err(eof)? as usize;
            regs.push((0..count).map(|_| read_str(&mut r)).collect::<Result<Vec<_>>>()?);
        }
        let edge_types = regs.pop().unwrap();
        let registry =
            TypeRegistry::new(regs.pop().unwrap(), edge_types).map_err(|e| Error::corrupt(e.to_string()))?;

        let mut out = Vec::with_capacity(levels);
        for (l, &k) in dims.iter().enumerate() {
            let width = r.read_u64::<LE>().map_err(eof)? as usize;
            let expected = config.layout(l + 1, &registry);
            if width != expected.width() {
                return Err(Error::corrupt(format!("level {} width {width} does not match its layout", l + 1)));
            }
            let nd = r.read_u32::<LE>().map_err(eof)? as usize;
            if nd != expected.num_features {
                return Err(Error::corrupt(format!("level {} descriptor count mismatch", l + 1)));
            }
            let descriptors = (0..nd)
                .map(|_| read_str(&mut r)?.parse().map_err(|e: Error| Error::corrupt(e.to_string())))
                .collect::<Result<Vec<FunctionDescriptor>>>()?;
            let h = read_row_major(&mut r, k, width)?;
            let h_pinv = read_row_major(&mut r, width, k)?;
            out.push(SummaryLevel { descriptors, h, h_pinv });
        }
        Ok(Self { config, registry, levels: out })
    }
}

fn write_row_major<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    let mut buf = Vec::with_capacity(m.ncols() * 8);
    for r in 0..m.nrows() {
        buf.clear();
        for c in 0..m.ncols() {
            buf.write_f64::<LE>(m[(r, c)])?;
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_row_major<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let mut data = vec![0.0; rows * cols];
    r.read_f64_into::<LE>(&mut data).map_err(eof)?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::corrupt("non-finite factor entry"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// Dense node embeddings; column blocks are ordered by level.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    nodes: Vec<NodeId>,
    dim: usize,
    data: Vec<f64>,
    spans: Vec<Range<usize>>,
}

impl EmbeddingMatrix {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column range of each level's block.
    pub fn level_spans(&self) -> &[Range<usize>] {
        &self.spans
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    /// Row of `node`, if present.
    pub fn node_row(&self, node: NodeId) -> Option<&[f64]> {
        self.nodes.binary_search(&node).ok().map(|r| self.row(r))
    }

    /// Scales every nonzero row to unit Euclidean length.
    pub fn normalize_rows(&mut self) {
        for row in self.data.chunks_mut(self.dim.max(1)) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    /// `label<TAB>v1<TAB>…<TAB>vK`, values with 9 significant digits.
    pub fn write_tsv<W: Write>(&self, g: &HetGraph, mut w: W) -> Result<()> {
        let mut line = String::new();
        for (r, &node) in self.nodes.iter().enumerate() {
            line.clear();
            line.push_str(&g.label(node));
            for &v in self.row(r) {
                line.push('\t');
                line.push_str(&format_sig(v, 9));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    fn from_blocks(nodes: Vec<NodeId>, blocks: Vec<Dense>) -> Self {
        let dim: usize = blocks.iter().map(|b| b.cols).sum();
        let mut spans = Vec::with_capacity(blocks.len());
        let mut start = 0;
        for b in &blocks {
            spans.push(start..start + b.cols);
            start += b.cols;
        }
        let mut data = Vec::with_capacity(nodes.len() * dim);
        for r in 0..nodes.len() {
            for b in &blocks {
                data.extend_from_slice(b.row(r));
            }
        }
        Self { nodes, dim, data, spans }
    }
}

/// Formats like C's `%.{sig}g`.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Options for [`derive_embeddings_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmbedOptions {
    /// Row-normalize the output to unit length.
    pub normalize: bool,
    /// Histogram spec the caller expects; must equal the summary's.
    pub histogram: Option<HistogramSpec>,
}

/// Feature levels with their binned context inputs, computed one level at a
/// time so at most two dense feature levels are alive at once.
fn for_each_level(
    g: &HetGraph,
    cfg: &SummaryConfig,
    sets: &[RowSet],
    mut visit: impl FnMut(usize, &BinnedFeatures, Vec<FunctionDescriptor>) -> Result<()>,
) -> Result<()> {
    let x0 = base_features_with(g, cfg.bases, &sets[0]);
    let mut prev: Option<FeatureMatrix> = None;
    for level in 1..=cfg.levels {
        let start = std::time::Instant::now();
        let xl = build_level_with(g, prev.as_ref().unwrap_or(&x0), cfg.operators, &sets[level])?;
        let parts: Vec<&FeatureMatrix> = if level == 1 { vec![&x0, &xl] } else { vec![&xl] };
        let feats = BinnedFeatures::from_matrices(&parts, &cfg.histogram)?;
        let descriptors = parts.iter().flat_map(|p| p.descriptors().iter().cloned()).collect();
        log::debug!("level {level}: features in {:.2?}", start.elapsed());
        // the dense level is only needed to build the next one
        prev = (level < cfg.levels).then_some(xl);
        visit(level, &feats, descriptors)?;
    }
    Ok(())
}

fn build_summary(g: &HetGraph, cfg: &SummaryConfig, want_embeddings: bool) -> Result<(Summary, Option<EmbeddingMatrix>)> {
    cfg.validate()?;
    let n = g.num_nodes();
    let registry = g.registry().clone();
    let types = TypeMap::identity(&registry);
    let all = RowSet::all(n);
    let sets = vec![all.clone(); cfg.levels + 1];
    let dims = cfg.level_dims();
    let mut levels = Vec::with_capacity(cfg.levels);
    let mut blocks = Vec::new();
    for_each_level(g, cfg, &sets, |level, feats, descriptors| {
        let rows = ContextRows::new(g, feats, cfg.context_mode, cfg.histogram.bins(), types.clone(), all.clone())?;
        let width = rows.ncols();
        let k = dims[level - 1];
        if k > width {
            return Err(Error::LevelRank { level, k, width });
        }
        // graphs with fewer nodes than k leave trailing rows of H at zero
        let rank = k.min(n);
        let opts = cfg.level_svd(level);
        let start = std::time::Instant::now();
        let f = if want_embeddings { truncated_svd(&rows, rank, &opts)? } else { truncated_svd_right(&rows, rank, &opts)? };
        let mut h = DMatrix::zeros(k, width);
        for j in 0..rank {
            let s = f.sigma[j].sqrt();
            for c in 0..width {
                h[(j, c)] = s * f.v[(c, j)];
            }
        }
        if let Some(u) = &f.u {
            let mut b = Dense::zeros(n, k);
            for r in 0..n {
                for j in 0..rank {
                    b.data[r * k + j] = u[(r, j)] * f.sigma[j].sqrt();
                }
            }
            blocks.push(b);
        }
        log::debug!(
            "level {level}: width {width}, rank {rank}, sigma_max {:.4e}, svd in {:.2?}",
            f.sigma.first().copied().unwrap_or(0.0),
            start.elapsed()
        );
        let h_pinv = pseudo_inverse(&h);
        levels.push(SummaryLevel { descriptors, h, h_pinv });
        Ok(())
    })?;
    let summary = Summary { config: cfg.clone(), registry, levels };
    let emb = want_embeddings.then(|| EmbeddingMatrix::from_blocks((0..n as NodeId).collect(), blocks));
    Ok((summary, emb))
}

/// Materializes the context matrix of every level, for inspection.
pub fn context_matrices(g: &HetGraph, cfg: &SummaryConfig) -> Result<Vec<ContextMatrix>> {
    cfg.validate()?;
    let types = TypeMap::identity(g.registry());
    let all = RowSet::all(g.num_nodes());
    let sets = vec![all.clone(); cfg.levels + 1];
    let mut out = Vec::with_capacity(cfg.levels);
    for_each_level(g, cfg, &sets, |level, feats, _| {
        let rows = ContextRows::new(g, feats, cfg.context_mode, cfg.histogram.bins(), types.clone(), all.clone())?;
        let matrix = SparseMatrix::from_rows(&rows);
        out.push(ContextMatrix { level, layout: cfg.layout(level, g.registry()), matrix });
        Ok(())
    })?;
    Ok(out)
}

/// Summarizes `g`. Feature and context matrices are transient.
pub fn summarize(g: &HetGraph, cfg: &SummaryConfig) -> Result<Summary> {
    build_summary(g, cfg, false).map(|(s, _)| s)
}

/// Summarizes `g` and also returns the training embeddings `U√Σ` per level.
pub fn summarize_with_embeddings(g: &HetGraph, cfg: &SummaryConfig) -> Result<(Summary, EmbeddingMatrix)> {
    build_summary(g, cfg, true).map(|(s, e)| (s, e.expect("requested")))
}

/// Embeds `subset` (all nodes when `None`) of `g` through the summary.
pub fn derive_embeddings(s: &Summary, g: &HetGraph, subset: Option<&[NodeId]>) -> Result<EmbeddingMatrix> {
    derive_embeddings_with(s, g, subset, &EmbedOptions::default())
}

/// Rows are returned in ascending node order, without duplicates.
pub fn derive_embeddings_with(
    s: &Summary,
    g: &HetGraph,
    subset: Option<&[NodeId]>,
    opts: &EmbedOptions,
) -> Result<EmbeddingMatrix> {
    let cfg = &s.config;
    if let Some(spec) = opts.histogram {
        if spec != cfg.histogram {
            return Err(Error::HistogramMismatch { expected: cfg.histogram.to_string(), found: spec.to_string() });
        }
    }
    let types = g.registry().map_into(&s.registry)?;
    let n = g.num_nodes();
    let (targets, sets) = match subset {
        None => (RowSet::all(n), vec![RowSet::all(n); cfg.levels + 1]),
        Some(nodes) => {
            for &v in nodes {
                g.check_node(v)?;
            }
            let targets = RowSet::subset(n, nodes.to_vec());
            // contexts read features of in- and out-neighbors
            let mut reach = targets.nodes();
            for &v in &targets.nodes() {
                reach.extend(g.out_arcs(v).iter().map(|a| a.node));
                reach.extend(g.in_arcs(v).iter().map(|a| a.node));
            }
            reach.sort_unstable();
            reach.dedup();
            (targets, required_rows(g, &reach, cfg.levels))
        }
    };
    let mut blocks = Vec::with_capacity(cfg.levels);
    for_each_level(g, cfg, &sets, |level, feats, _| {
        let rows = ContextRows::new(g, feats, cfg.context_mode, cfg.histogram.bins(), types.clone(), targets.clone())?;
        let lv = &s.levels[level - 1];
        if rows.ncols() != lv.width() {
            return Err(Error::TypeMismatch(format!(
                "level {level} context width {} differs from the summary's {}",
                rows.ncols(),
                lv.width()
            )));
        }
        blocks.push(mul_dense(&rows, &Dense::from_matrix(&lv.h_pinv)));
        Ok(())
    })?;
    let mut emb = EmbeddingMatrix::from_blocks(targets.nodes(), blocks);
    if opts.normalize {
        emb.normalize_rows();
    }
    Ok(emb)
}

/// Sidecar map `dense_id<TAB>label`, one line per node.
pub fn write_label_map<W: Write>(g: &HetGraph, mut w: W) -> Result<()> {
    for i in 0..g.num_nodes() as NodeId {
        writeln!(w, "{i}\t{}", g.label(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetgraph::GraphBuilder;

    fn ring_with_chords(n: u32) -> HetGraph {
        let mut b = GraphBuilder::with_identity_nodes(n as usize);
        for i in 0..n {
            b.add_edge(i, (i + 1) % n, 0, 1.0).unwrap();
            if i % 3 == 0 {
                b.add_edge(i, (i * 7 + 2) % n, 0, 1.0).unwrap();
            }
        }
        b.build().unwrap()
    }

    fn small_cfg() -> SummaryConfig {
        SummaryConfig { dim: 8, histogram: HistogramSpec::new(8, 2.0).unwrap(), ..Default::default() }
    }

    #[test]
    fn level_split() {
        let cfg = SummaryConfig { dim: 7, levels: 3, ..Default::default() };
        assert_eq!(cfg.level_dims(), vec![3, 2, 2]);
        assert_eq!(SummaryConfig::default().level_dims(), vec![64, 64]);
        assert!(SummaryConfig { dim: 1, levels: 2, ..Default::default() }.validate().is_err());
        assert!(SummaryConfig { levels: 5, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn context_feature_counts() {
        let cfg = SummaryConfig::default();
        assert_eq!(cfg.context_features(1), 24);
        assert_eq!(cfg.context_features(2), 147);
        assert_eq!(cfg.layout(2, &TypeRegistry::homogeneous()).width(), 2 * 32 * 147);
    }

    #[test]
    fn self_consistency_on_training_graph() {
        let g = ring_with_chords(40);
        let (s, train) = summarize_with_embeddings(&g, &small_cfg()).unwrap();
        let derived = derive_embeddings(&s, &g, None).unwrap();
        let err = train.data().iter().zip(derived.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn subset_rows_match_full_rows() {
        let g = ring_with_chords(60);
        let s = summarize(&g, &small_cfg()).unwrap();
        let full = derive_embeddings(&s, &g, None).unwrap();
        let sub = derive_embeddings(&s, &g, Some(&[17, 3, 42, 3])).unwrap();
        assert_eq!(sub.nodes(), &[3, 17, 42]);
        for &v in sub.nodes() {
            assert_eq!(sub.node_row(v).unwrap(), full.node_row(v).unwrap());
        }
    }

    #[test]
    fn single_edge_graph_pads_rank() {
        let mut b = GraphBuilder::with_identity_nodes(2);
        b.add_edge(0, 1, 0, 1.0).unwrap();
        let g = b.build().unwrap();
        let s = summarize(&g, &small_cfg()).unwrap();
        for lv in s.levels() {
            assert_eq!(lv.dim(), 4);
            // at most two nonzero rows with two nodes
            let nonzero = (0..lv.dim()).filter(|&r| lv.h.row(r).iter().any(|&v| v != 0.0)).count();
            assert!(nonzero <= 2);
        }
    }

    #[test]
    fn rank_exceeding_width_names_level() {
        let g = ring_with_chords(10);
        let cfg = SummaryConfig {
            levels: 1,
            dim: 100,
            histogram: HistogramSpec::new(2, 2.0).unwrap(),
            bases: "out".parse().unwrap(),
            operators: "max".parse().unwrap(),
            ..Default::default()
        };
        // width = 2 * 2 bins * (1 + 1) features = 8
        assert!(matches!(summarize(&g, &cfg), Err(Error::LevelRank { level: 1, k: 100, width: 8 })));
    }

    #[test]
    fn byte_round_trip_and_corruption() {
        let g = ring_with_chords(30);
        let s = summarize(&g, &small_cfg()).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"MLNS");
        assert_eq!(Summary::from_bytes(&bytes).unwrap(), s);
        for cut in [2, 40, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(Summary::from_bytes(&bytes[..cut]), Err(Error::Corrupt(_))), "cut {cut}");
        }
        let mut bad = bytes.clone();
        bad[4] = 7;
        assert!(matches!(Summary::from_bytes(&bad), Err(Error::UnsupportedVersion(7))));
    }

    #[test]
    fn deterministic_bytes() {
        let g = ring_with_chords(50);
        assert_eq!(summarize(&g, &small_cfg()).unwrap().to_bytes(), summarize(&g, &small_cfg()).unwrap().to_bytes());
    }

    #[test]
    fn unknown_type_is_rejected() {
        let g = ring_with_chords(20);
        let s = summarize(&g, &small_cfg()).unwrap();
        let mut b = GraphBuilder::new();
        b.add_edge_by_label("a", "b", Some("cites"), 1.0).unwrap();
        let other = b.build().unwrap();
        assert!(matches!(derive_embeddings(&s, &other, None), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn histogram_mismatch_is_rejected() {
        let g = ring_with_chords(20);
        let s = summarize(&g, &small_cfg()).unwrap();
        let opts = EmbedOptions { histogram: Some(HistogramSpec::default()), ..Default::default() };
        assert!(matches!(derive_embeddings_with(&s, &g, None, &opts), Err(Error::HistogramMismatch { .. })));
    }

    #[test]
    fn isolated_node_embeds_to_zero() {
        let mut b = GraphBuilder::with_identity_nodes(12);
        for i in 0..10 {
            b.add_edge(i, (i + 1) % 10, 0, 1.0).unwrap();
        }
        let g = b.build().unwrap();
        let s = summarize(&g, &small_cfg()).unwrap();
        let e = derive_embeddings(&s, &g, Some(&[11])).unwrap();
        assert!(e.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_rows_have_unit_length() {
        let g = ring_with_chords(30);
        let s = summarize(&g, &small_cfg()).unwrap();
        let e = derive_embeddings_with(&s, &g, None, &EmbedOptions { normalize: true, ..Default::default() }).unwrap();
        for r in 0..e.len() {
            let norm: f64 = e.row(r).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12 || norm == 0.0);
        }
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(1.0, 9), "1");
        assert_eq!(format_sig(-0.125, 9), "-0.125");
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(123456789.4, 9), "123456789");
        assert_eq!(format_sig(1234567891.0, 9), "1.23456789e+09");
        assert_eq!(format_sig(0.00001234, 9), "1.234e-05");
    }
}
