//! Sparse matrices, truncated SVD and the Moore–Penrose pseudo-inverse.
//!
//! Large context matrices are never materialized during summarization: the
//! SVD consumes any [`SparseRows`] source and recomputes rows on demand.
//! Every reduction over rows runs over fixed-size chunks combined in chunk
//! order, so results are bit-identical for any worker count.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per reduction chunk. Fixed so reductions do not depend on threading.
const CHUNK_ROWS: usize = 8192;
/// Chunks reduced concurrently before folding into the accumulator.
const CHUNKS_PER_BATCH: usize = 4;
/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// A row-wise source of sparse rows with ascending column indices.
pub trait SparseRows: Sync {
    type Scratch: Send;

    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn scratch(&self) -> Self::Scratch;
    /// Replaces `cols`/`vals` with row `r`'s nonzeros.
    fn row_into(&self, r: usize, scratch: &mut Self::Scratch, cols: &mut Vec<u32>, vals: &mut Vec<f64>);
}

/// Compressed sparse rows; indices sorted within each row, no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize, indptr: Vec<usize>, indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Validation(format!("invalid CSR matrix: {m}")));
        if indptr.len() != rows + 1 || indptr[0] != 0 || *indptr.last().unwrap() != indices.len() {
            return bad("index pointer shape");
        }
        if indices.len() != values.len() {
            return bad("indices and values differ in length");
        }
        for r in 0..rows {
            if indptr[r] > indptr[r + 1] {
                return bad("index pointer decreases");
            }
            let idx = &indices[indptr[r]..indptr[r + 1]];
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&c| c as usize >= cols) {
                return bad("column indices unsorted or out of range");
            }
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return bad("explicit zero or non-finite value");
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    /// Sums duplicate entries and drops zeros.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut t = triplets.to_vec();
        if let Some(&(r, c, _)) = t.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::Validation(format!("triplet ({r}, {c}) outside {rows}x{cols}")));
        }
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; rows + 1];
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        let mut k = 0;
        while k < t.len() {
            let (r, c) = (t[k].0, t[k].1);
            let mut v = 0.0;
            while k < t.len() && (t[k].0, t[k].1) == (r, c) {
                v += t[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(c as u32);
                values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self::new(rows, cols, indptr, indices, values)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                t.push((r, c, m[(r, c)]));
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t).expect("dense entries are in range")
    }

    /// Materializes every row of `src`.
    pub fn from_rows<S: SparseRows>(src: &S) -> Self {
        let n = src.nrows();
        let chunks: Vec<(Vec<usize>, Vec<u32>, Vec<f64>)> = (0..n.div_ceil(CHUNK_ROWS))
            .into_par_iter()
            .map(|c| {
                let mut scratch = src.scratch();
                let (mut cols, mut vals) = (Vec::new(), Vec::new());
                let (mut lens, mut idx, mut val) = (Vec::new(), Vec::new(), Vec::new());
                for r in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n) {
                    src.row_into(r, &mut scratch, &mut cols, &mut vals);
                    let before = idx.len();
                    for (&j, &v) in cols.iter().zip(&vals) {
                        if v != 0.0 {
                            idx.push(j);
                            val.push(v);
                        }
                    }
                    lens.push(idx.len() - before);
                }
                (lens, idx, val)
            })
            .collect();
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        for (lens, idx, val) in chunks {
            for l in lens {
                indptr.push(indptr.last().unwrap() + l);
            }
            indices.extend(idx);
            values.extend(val);
        }
        Self { rows: n, cols: src.ncols(), indptr, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let s = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[s.clone()], &self.values[s])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        idx.binary_search(&(c as u32)).map_or(0.0, |p| val[p])
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).1.iter().sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                m[(r, c as usize)] = v;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Matrix Market coordinate format (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.rows, self.cols, self.nnz())?;
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

impl SparseRows for SparseMatrix {
    type Scratch = ();

    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn scratch(&self) {}

    fn row_into(&self, r: usize, _: &mut (), cols: &mut Vec<u32>, vals: &mut Vec<f64>) {
        let (idx, val) = self.row(r);
        cols.clear();
        cols.extend_from_slice(idx);
        vals.clear();
        vals.extend_from_slice(val);
    }
}

/// Dense row-major matrix used for tall intermediate blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut d = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                d.data[r * m.ncols() + c] = m[(r, c)];
            }
        }
        d
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
        Self { rows, cols, data }
    }

    /// `selfᵀ self`, reduced over fixed row chunks.
    fn gram(&self) -> DMatrix<f64> {
        let l = self.cols;
        let partial = |c: usize| {
            let lo = c * CHUNK_ROWS;
            let hi = ((c + 1) * CHUNK_ROWS).min(self.rows);
            let mut g = vec![0.0; l * l];
            let a = &self.data[lo * l..hi * l];
            // SAFETY: `a` holds (hi-lo) x l row-major values and `g` holds l x l.
            unsafe {
                matrixmultiply::dgemm(
                    l,
                    hi - lo,
                    l,
                    1.0,
                    a.as_ptr(),
                    1,
                    l as isize,
                    a.as_ptr(),
                    l as isize,
                    1,
                    0.0,
                    g.as_mut_ptr(),
                    l as isize,
                    1,
                );
            }
            g
        };
        let acc = chunked_sum(self.rows, l * l, partial);
        DMatrix::from_row_slice(l, l, &acc)
    }

    /// `self · t` with `t` small and dense.
    fn mul_small(&self, t: &DMatrix<f64>) -> Dense {
        let (l, r) = (self.cols, t.ncols());
        assert_eq!(t.nrows(), l);
        let tr = Dense::from_matrix(t);
        let mut out = Dense::zeros(self.rows, r);
        if r == 0 || l == 0 {
            return out;
        }
        out.data.par_chunks_mut(CHUNK_ROWS * r).zip(self.data.par_chunks(CHUNK_ROWS * l)).for_each(|(o, a)| {
            let b = a.len() / l;
            // SAFETY: `a` is b x l, `tr` is l x r, `o` is b x r, all row-major.
            unsafe {
                matrixmultiply::dgemm(
                    b,
                    l,
                    r,
                    1.0,
                    a.as_ptr(),
                    l as isize,
                    1,
                    tr.data.as_ptr(),
                    r as isize,
                    1,
                    0.0,
                    o.as_mut_ptr(),
                    r as isize,
                    1,
                );
            }
        });
        out
    }

    fn append_cols(&mut self, other: &Dense) {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        self.cols = cols;
        self.data = data;
    }
}

/// Sums per-chunk partial vectors of length `len` in chunk order.
fn chunked_sum(rows: usize, len: usize, partial: impl Fn(usize) -> Vec<f64> + Sync) -> Vec<f64> {
    let nchunks = rows.div_ceil(CHUNK_ROWS);
    let mut acc = vec![0.0; len];
    for batch in (0..nchunks).collect::<Vec<_>>().chunks(CHUNKS_PER_BATCH) {
        let parts: Vec<Vec<f64>> = batch.par_iter().map(|&c| partial(c)).collect();
        for p in parts {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
    }
    acc
}

/// `Y · z` where `z` is `ncols(Y) x l`.
pub fn mul_dense<S: SparseRows>(y: &S, z: &Dense) -> Dense {
    assert_eq!(z.rows, y.ncols());
    let l = z.cols;
    let mut out = Dense::zeros(y.nrows(), l);
    if l == 0 {
        return out;
    }
    out.data.par_chunks_mut(l).enumerate().for_each_init(
        || (y.scratch(), Vec::new(), Vec::new()),
        |(s, cols, vals), (r, o)| {
            y.row_into(r, s, cols, vals);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                for (acc, &zz) in o.iter_mut().zip(z.row(c as usize)) {
                    *acc += v * zz;
                }
            }
        },
    );
    out
}

/// `Yᵀ · q` where `q` is `nrows(Y) x l`.
pub fn mul_transpose_dense<S: SparseRows>(y: &S, q: &Dense) -> Dense {
    assert_eq!(q.rows, y.nrows());
    let (n, d, l) = (y.nrows(), y.ncols(), q.cols);
    let partial = |c: usize| {
        let mut acc = vec![0.0; d * l];
        let mut s = y.scratch();
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for r in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n) {
            y.row_into(r, &mut s, &mut cols, &mut vals);
            let qr = q.row(r);
            for (&col, &v) in cols.iter().zip(&vals) {
                let o = &mut acc[col as usize * l..(col as usize + 1) * l];
                for (a, &qq) in o.iter_mut().zip(qr) {
                    *a += v * qq;
                }
            }
        }
        acc
    };
    Dense { rows: d, cols: l, data: chunked_sum(n, d * l, partial) }
}

/// Orthonormalizes the columns of `m` in place (SVQB). Directions that
/// collapse numerically are replaced by random ones orthogonal to the rest,
/// so the result always has `m.cols` orthonormal columns (requires
/// `rows >= cols`).
fn orthonormalize(m: &mut Dense, rng: &mut ChaCha8Rng) {
    let l = m.cols;
    assert!(m.rows >= l, "cannot fit {l} orthonormal columns in {} rows", m.rows);
    for _ in 0..4 {
        let g = m.gram();
        let off = (0..l)
            .flat_map(|i| (0..l).map(move |j| (i, j)))
            .map(|(i, j)| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        if off < 1e-13 {
            return;
        }
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let lmax = eig.eigenvalues[order[0]].max(0.0);
        let keep: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > 1e-13 * lmax && lmax > 0.0).collect();
        let mut t = DMatrix::zeros(l, keep.len());
        for (k, &i) in keep.iter().enumerate() {
            let s = eig.eigenvalues[i].sqrt();
            for r in 0..l {
                t[(r, k)] = eig.eigenvectors[(r, i)] / s;
            }
        }
        *m = m.mul_small(&t);
        if keep.len() < l {
            let mut fresh = Dense::gaussian(m.rows, l - keep.len(), rng);
            for _ in 0..2 {
                if m.cols > 0 {
                    let proj = mul_transpose_dense(&*m, &fresh);
                    let back = m.mul_small(&proj.to_matrix());
                    for (f, b) in fresh.data.iter_mut().zip(back.data) {
                        *f -= b;
                    }
                }
            }
            m.append_cols(&fresh);
        }
    }
}

/// Dense matrices are sparse-row sources too (used for projections).
impl SparseRows for Dense {
    type Scratch = ();

    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn scratch(&self) {}

    fn row_into(&self, r: usize, _: &mut (), cols: &mut Vec<u32>, vals: &mut Vec<f64>) {
        cols.clear();
        vals.clear();
        for (c, &v) in self.row(r).iter().enumerate() {
            if v != 0.0 {
                cols.push(c as u32);
                vals.push(v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvdMethod {
    /// Exact dense SVD for small problems, randomized otherwise.
    #[default]
    Auto,
    Randomized,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvdOptions {
    pub method: SvdMethod,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self { method: SvdMethod::Auto, oversample: 10, power_iters: 2, seed: 0 }
    }
}

/// Rank-K factors; `u` is absent when only the right side was requested.
/// `v` is orthonormal. For nonzero `σⱼ`, column `j` of `u` is `Y vⱼ / σⱼ`,
/// which is orthonormal only up to the approximation error of the
/// randomized range.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: Option<DMatrix<f64>>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let u = self.u.as_ref().expect("left factors were not computed");
        let mut us = u.clone();
        for (k, &s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(s);
        }
        us * self.v.transpose()
    }
}

/// Auto mode only considers the dense path for at most this many rows...
const EXACT_MAX_ROWS: usize = 600;
/// ...and takes it when rows x active columns x smaller side stays below this.
const EXACT_MAX_WORK: usize = 50_000_000;

pub fn truncated_svd<S: SparseRows>(y: &S, k: usize, opts: &SvdOptions) -> Result<SvdFactors> {
    svd_impl(y, k, opts, true)
}

/// Like [`truncated_svd`] but skips the left factors.
pub fn truncated_svd_right<S: SparseRows>(y: &S, k: usize, opts: &SvdOptions) -> Result<SvdFactors> {
    svd_impl(y, k, opts, false)
}

fn svd_impl<S: SparseRows>(y: &S, k: usize, opts: &SvdOptions, want_u: bool) -> Result<SvdFactors> {
    let (n, d) = (y.nrows(), y.ncols());
    if k > n.min(d) {
        return Err(Error::RankTooLarge { k, rows: n, cols: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let exact = match opts.method {
        SvdMethod::Exact => true,
        SvdMethod::Randomized => false,
        SvdMethod::Auto => n <= EXACT_MAX_ROWS,
    };
    let active = if exact { Some(active_columns(y)) } else { None };
    let f = match active {
        Some(act) if opts.method == SvdMethod::Exact || n * act.len() * n.min(act.len()) <= EXACT_MAX_WORK => {
            exact_svd(y, k, &act, want_u)
        }
        _ => randomized_svd(y, k, opts, want_u, &mut rng),
    };
    Ok(finish(f, k, n, d, &mut rng))
}

fn active_columns<S: SparseRows>(y: &S) -> Vec<usize> {
    let d = y.ncols();
    let mut seen = vec![false; d];
    let mut s = y.scratch();
    let (mut cols, mut vals) = (Vec::new(), Vec::new());
    for r in 0..y.nrows() {
        y.row_into(r, &mut s, &mut cols, &mut vals);
        for (&c, &v) in cols.iter().zip(&vals) {
            if v != 0.0 {
                seen[c as usize] = true;
            }
        }
    }
    (0..d).filter(|&c| seen[c]).collect()
}

/// Factors possibly narrower than requested, before padding and cleanup.
struct Partial {
    u: Option<DMatrix<f64>>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

fn exact_svd<S: SparseRows>(y: &S, k: usize, active: &[usize], want_u: bool) -> Partial {
    let (n, d) = (y.nrows(), y.ncols());
    let mut pos = vec![usize::MAX; d];
    for (p, &c) in active.iter().enumerate() {
        pos[c] = p;
    }
    let mut a = DMatrix::zeros(n, active.len());
    let mut s = y.scratch();
    let (mut cols, mut vals) = (Vec::new(), Vec::new());
    for r in 0..n {
        y.row_into(r, &mut s, &mut cols, &mut vals);
        for (&c, &v) in cols.iter().zip(&vals) {
            a[(r, pos[c as usize])] += v;
        }
    }
    if active.is_empty() {
        return Partial { u: want_u.then(|| DMatrix::zeros(n, 0)), sigma: Vec::new(), v: DMatrix::zeros(d, 0) };
    }
    let svd = thin_svd(&a);
    let take = svd.rank(RANK_TOL).min(k);
    let mut v = DMatrix::zeros(d, take);
    for j in 0..take {
        for (p, &c) in active.iter().enumerate() {
            v[(c, j)] = svd.v[(p, j)];
        }
    }
    let u = want_u.then(|| svd.u.columns(0, take).into_owned());
    let sigma = svd.sigma[..take].to_vec();
    Partial { u, sigma, v }
}

fn randomized_svd<S: SparseRows>(y: &S, k: usize, opts: &SvdOptions, want_u: bool, rng: &mut ChaCha8Rng) -> Partial {
    let (n, d) = (y.nrows(), y.ncols());
    let l = (k + opts.oversample).min(n).min(d);
    let omega = Dense::gaussian(d, l, rng);
    let mut q = mul_dense(y, &omega);
    orthonormalize(&mut q, rng);
    for _ in 0..opts.power_iters {
        let mut z = mul_transpose_dense(y, &q);
        orthonormalize(&mut z, rng);
        q = mul_dense(y, &z);
        orthonormalize(&mut q, rng);
    }
    // Bᵀ = Yᵀ Q, with all-zero rows dropped before the small SVD
    let bt = mul_transpose_dense(y, &q);
    let active: Vec<usize> = (0..d).filter(|&c| bt.row(c).iter().any(|&v| v != 0.0)).collect();
    if active.is_empty() {
        return Partial { u: want_u.then(|| DMatrix::zeros(n, 0)), sigma: Vec::new(), v: DMatrix::zeros(d, 0) };
    }
    let small = DMatrix::from_fn(active.len(), l, |p, j| bt.data[active[p] * l + j]);
    let svd = thin_svd(&small);
    let take = svd.rank(RANK_TOL).min(k);
    let mut v = DMatrix::zeros(d, take);
    for j in 0..take {
        for (p, &c) in active.iter().enumerate() {
            v[(c, j)] = svd.u[(p, j)];
        }
    }
    let sigma: Vec<f64> = svd.sigma[..take].to_vec();
    // U = Y V Σ⁻¹ rather than Q X, so that U Σ Vᵀ V = Y V holds exactly even
    // where Y has energy outside the sampled range
    let u = want_u.then(|| {
        let mut yv = mul_dense(y, &Dense::from_matrix(&v));
        for row in yv.data.chunks_exact_mut(take.max(1)) {
            for (x, s) in row.iter_mut().zip(&sigma) {
                *x /= s;
            }
        }
        yv.to_matrix()
    });
    Partial { u, sigma, v }
}

fn descending(s: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order
}

/// Zeroes negligible singular values and pads to exactly `k` columns with
/// orthonormal completions paired with zero singular values.
fn finish(p: Partial, k: usize, n: usize, d: usize, rng: &mut ChaCha8Rng) -> SvdFactors {
    let mut sigma = p.sigma;
    let smax = sigma.first().copied().unwrap_or(0.0);
    for s in &mut sigma {
        if *s <= RANK_TOL * smax || *s < 0.0 {
            *s = 0.0;
        }
    }
    sigma.resize(k, 0.0);
    let v = complete(p.v, k, d, rng);
    let u = p.u.map(|u| complete(u, k, n, rng));
    SvdFactors { u, sigma, v }
}

fn complete(m: DMatrix<f64>, k: usize, rows: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if m.ncols() >= k {
        return m;
    }
    let head = Dense::from_matrix(&m);
    let mut tail = Dense::gaussian(rows, k - m.ncols(), rng);
    for _ in 0..2 {
        if head.cols > 0 {
            let proj = mul_transpose_dense(&head, &tail);
            let back = head.mul_small(&proj.to_matrix());
            for (t, b) in tail.data.iter_mut().zip(back.data) {
                *t -= b;
            }
        }
        orthonormalize(&mut tail, rng);
    }
    let mut out = head;
    out.append_cols(&tail);
    out.to_matrix()
}

/// Thin SVD `A = U diag(σ) Vᵀ` with `r = min(m, n)` columns and `σ`
/// descending. Columns paired with a zero singular value may be zero on one
/// side; [`ThinSvd::rank`] bounds the meaningful ones.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().take_while(|&&s| s > rel_tol * smax && s > 0.0).count()
    }
}

/// Column-pivoted QR, then one-sided Jacobi on `Rᵀ`. The pivoting makes the
/// Jacobi sweeps converge in a handful of passes and keeps rank-deficient
/// inputs accurate.
pub fn thin_svd(a: &DMatrix<f64>) -> ThinSvd {
    let (m, n) = a.shape();
    if m < n {
        let t = thin_svd(&a.transpose());
        return ThinSvd { u: t.v, sigma: t.sigma, v: t.u };
    }
    if n == 0 {
        return ThinSvd { u: DMatrix::zeros(m, 0), sigma: Vec::new(), v: DMatrix::zeros(0, 0) };
    }
    let qr = a.clone().col_piv_qr();
    let q = qr.q();
    let r = qr.r();
    let mut perm = DMatrix::<f64>::identity(n, n);
    qr.p().inv_permute_rows(&mut perm);
    // Rᵀ W = X with orthogonal columns; then R = W Σ Uₓᵀ
    let mut x = r.transpose();
    let mut w = DMatrix::<f64>::identity(n, n);
    jacobi_sweeps(x.as_mut_slice(), w.as_mut_slice(), n);
    let norms: Vec<f64> = (0..n).map(|j| x.column(j).norm()).collect();
    let order = descending(&norms);
    let u = &q * DMatrix::from_fn(n, n, |i, j| w[(i, order[j])]);
    let ux = DMatrix::from_fn(n, n, |i, j| {
        let s = norms[order[j]];
        if s > 0.0 {
            x[(i, order[j])] / s
        } else {
            0.0
        }
    });
    let v = perm * ux;
    ThinSvd { u, sigma: order.iter().map(|&j| norms[j]).collect(), v }
}

/// Rotates pairs of the `n` columns (length `n`, column-major) of `x` until
/// they are mutually orthogonal, applying the same rotations to `w`.
fn jacobi_sweeps(x: &mut [f64], w: &mut [f64], n: usize) {
    fn pair(m: &mut [f64], n: usize, p: usize, c: usize) -> (&mut [f64], &mut [f64]) {
        let (head, tail) = m.split_at_mut(c * n);
        (&mut head[p * n..(p + 1) * n], &mut tail[..n])
    }
    fn rotate(a: &mut [f64], b: &mut [f64], cs: f64, sn: f64) {
        for (u, v) in a.iter_mut().zip(b.iter_mut()) {
            let (pu, pv) = (*u, *v);
            *u = cs * pu - sn * pv;
            *v = sn * pu + cs * pv;
        }
    }
    let mut norms: Vec<f64> = x.chunks_exact(n).map(|c| c.iter().map(|v| v * v).sum()).collect();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n - 1 {
            for c in p + 1..n {
                let (alpha, beta) = (norms[p], norms[c]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (xp, xc) = pair(x, n, p, c);
                let gamma: f64 = xp.iter().zip(xc.iter()).map(|(a, b)| a * b).sum();
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(xp, xc, cs, sn);
                norms[p] = xp.iter().map(|v| v * v).sum();
                norms[c] = xc.iter().map(|v| v * v).sum();
                let (wp, wc) = pair(w, n, p, c);
                rotate(wp, wc, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Moore–Penrose pseudo-inverse with the default relative tolerance.
pub fn pseudo_inverse(h: &DMatrix<f64>) -> DMatrix<f64> {
    pseudo_inverse_with_tol(h, RANK_TOL)
}

/// Singular values at or below `rel_tol · σ_max` are treated as zero. All-zero
/// columns of `h` are dropped before the decomposition (their rows of `h†`
/// are zero).
pub fn pseudo_inverse_with_tol(h: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (k, d) = h.shape();
    let active: Vec<usize> = (0..d).filter(|&c| h.column(c).iter().any(|&v| v != 0.0)).collect();
    let mut out = DMatrix::zeros(d, k);
    if active.is_empty() || k == 0 {
        return out;
    }
    let compact = DMatrix::from_fn(k, active.len(), |r, p| h[(r, active[p])]);
    let svd = thin_svd(&compact);
    for i in 0..svd.rank(rel_tol) {
        let s = svd.sigma[i];
        for (p, &c) in active.iter().enumerate() {
            let vi = svd.v[(p, i)] / s;
            for j in 0..k {
                out[(c, j)] += vi * svd.u[(j, i)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::Rng;

    fn opts(method: SvdMethod) -> SvdOptions {
        SvdOptions { method, ..Default::default() }
    }

    fn random_sparse(rows: usize, cols: usize, density: f64, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if rng.random::<f64>() < density {
                    t.push((r, c, rng.random_range(1..6) as f64));
                }
            }
        }
        SparseMatrix::from_triplets(rows, cols, &t).unwrap()
    }

    fn orthonormal_err(m: &DMatrix<f64>) -> f64 {
        let g = m.transpose() * m;
        (g - DMatrix::identity(m.ncols(), m.ncols())).amax()
    }

    #[test]
    fn diagonal_case() {
        let y = SparseMatrix::from_triplets(3, 3, &[(0, 0, 3.0), (1, 1, 2.0), (2, 2, 1.0)]).unwrap();
        for m in [SvdMethod::Exact, SvdMethod::Randomized] {
            let f = truncated_svd(&y, 2, &opts(m)).unwrap();
            assert!((f.sigma[0] - 3.0).abs() < 1e-12 && (f.sigma[1] - 2.0).abs() < 1e-12, "{m:?} {:?}", f.sigma);
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [1.0, 2.0, 0.0, 3.0];
        let v = [0.5, 0.0, 4.0];
        let dense = DMatrix::from_fn(4, 3, |r, c| u[r] * v[c]);
        let y = SparseMatrix::from_dense(&dense);
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        for m in [SvdMethod::Exact, SvdMethod::Randomized] {
            let f = truncated_svd(&y, 1, &opts(m)).unwrap();
            assert!((f.sigma[0] - norm(&u) * norm(&v)).abs() < 1e-10);
            assert!((f.reconstruct() - &dense).amax() < 1e-8);
        }
    }

    #[test]
    fn rank_too_large() {
        let y = random_sparse(5, 3, 0.5, 1);
        assert!(matches!(truncated_svd(&y, 4, &SvdOptions::default()), Err(Error::RankTooLarge { .. })));
    }

    #[test]
    fn zero_matrix_gives_orthonormal_padding() {
        let y = SparseMatrix::from_triplets(6, 4, &[]).unwrap();
        for m in [SvdMethod::Exact, SvdMethod::Randomized] {
            let f = truncated_svd(&y, 3, &opts(m)).unwrap();
            assert_eq!(f.sigma, vec![0.0; 3]);
            assert!(orthonormal_err(&f.v) < 1e-12);
            assert!(orthonormal_err(f.u.as_ref().unwrap()) < 1e-12);
        }
    }

    #[test]
    fn randomized_matches_oracle_optimum() {
        let y = random_sparse(300, 200, 0.05, 7);
        let dense = y.to_dense();
        let s = dense.clone().singular_values();
        let mut sv: Vec<f64> = s.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let k = 16;
        let optimal = sv[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let f = truncated_svd(&y, k, &opts(SvdMethod::Randomized)).unwrap();
        let err = (f.reconstruct() - &dense).norm();
        assert!(err <= 1.05 * optimal, "{err} vs {optimal}");
        assert!(orthonormal_err(&f.v) < 1e-8);
        // U is Y V Σ⁻¹ exactly, so U Σ Vᵀ is the projection of Y onto span(V)
        let u = f.u.as_ref().unwrap();
        let yv = &dense * &f.v;
        for j in 0..k {
            assert!((u.column(j) * f.sigma[j] - yv.column(j)).amax() < 1e-10);
        }
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_deficient_randomized_is_orthonormal() {
        // rank 2 matrix, ask for 8 with oversampling far beyond the rank
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(60, 2, |_, _| rng.random_range(0..4) as f64);
        let b = DMatrix::from_fn(2, 40, |_, _| rng.random_range(0..3) as f64);
        let dense = &a * &b;
        let y = SparseMatrix::from_dense(&dense);
        let f = truncated_svd(&y, 8, &opts(SvdMethod::Randomized)).unwrap();
        assert!(f.sigma[2..].iter().all(|&s| s == 0.0), "{:?}", f.sigma);
        assert!(orthonormal_err(&f.v) < 1e-8);
        assert!(orthonormal_err(f.u.as_ref().unwrap()) < 1e-8);
        assert!((f.reconstruct() - dense).amax() < 1e-8);
    }

    #[test]
    fn seed_determinism() {
        let y = random_sparse(120, 90, 0.08, 11);
        let a = truncated_svd(&y, 5, &opts(SvdMethod::Randomized)).unwrap();
        let b = truncated_svd(&y, 5, &opts(SvdMethod::Randomized)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let y = random_sparse(3 * CHUNK_ROWS / 2, 40, 0.05, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| truncated_svd_right(&y, 6, &opts(SvdMethod::Randomized)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn pinv_small_cases() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((pseudo_inverse(&i) - &i).amax() < 1e-15);
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pseudo_inverse(&h);
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn pinv_penrose_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = DMatrix::from_fn(16, 400, |_, c| if c % 7 == 0 { 0.0 } else { rng.random::<f64>() - 0.5 });
        let p = pseudo_inverse(&h);
        assert!((&h * &p * &h - &h).amax() < 1e-8);
        assert!((&p * &h * &p - &p).amax() < 1e-8);
        let hp = &h * &p;
        let ph = &p * &h;
        assert!((&hp - hp.transpose()).amax() < 1e-8);
        assert!((&ph - ph.transpose()).amax() < 1e-8);
    }

    #[test]
    fn csr_validation_and_access() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 2, 1.5), (1, 0, 4.0), (1, 1, 0.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 2), 2.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(SparseMatrix::new(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(1, 2, vec![0, 1], vec![0], vec![0.0]).is_err());
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("2 3 2\n1 3 2.5\n2 1 4\n"));
    }

    fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = DMatrix::from_fn(rows, rank, |_, _| rng.random_range(-1.0..1.0));
        let r = DMatrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0));
        l * r
    }

    #[test]
    fn thin_svd_reconstructs_rank_deficient_inputs() {
        // shapes on which a bidiagonal QR iteration was seen to lose accuracy
        for (rows, cols, rank, seed) in [(25, 44, 3, 1), (40, 57, 3, 2), (45, 35, 4, 3), (30, 30, 30, 4), (200, 7, 7, 5), (1, 9, 1, 6)] {
            let a = low_rank(rows, cols, rank, seed);
            let f = thin_svd(&a);
            assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(f.rank(1e-10), rank);
            let k = f.rank(1e-10);
            let (u, v) = (f.u.columns(0, k), f.v.columns(0, k));
            let rec = u * DMatrix::from_diagonal(&DVector::from_row_slice(&f.sigma[..k])) * v.transpose();
            assert!((rec - &a).amax() < 1e-12 * a.amax().max(1.0) * 100.0, "{rows}x{cols} r{rank}");
            assert!((u.transpose() * u - DMatrix::identity(k, k)).amax() < 1e-12);
            assert!((v.transpose() * v - DMatrix::identity(k, k)).amax() < 1e-12);
        }
    }

    #[test]
    fn thin_svd_matches_known_singular_values() {
        let a = DMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 4.0, 0.0, 0.0]);
        let f = thin_svd(&a);
        assert!((f.sigma[0] - 4.0).abs() < 1e-15 && (f.sigma[1] - 3.0).abs() < 1e-15);
        assert!(thin_svd(&DMatrix::zeros(4, 3)).sigma.iter().all(|&s| s == 0.0));
    }

}
