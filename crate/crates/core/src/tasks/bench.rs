//! Summary size and build time against graph size on ER graphs.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summary::{summarize, SummaryConfig};
use crate::tasks::generate::generate_er;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub edges: usize,
    pub summary_bytes: usize,
    /// Wall time of the summarization alone.
    pub seconds: f64,
}

/// Parses `1e2..1e6` (each power of ten in range) or a comma list such as
/// `1000,5e3`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| -> Result<usize> {
        let v: f64 = t.trim().parse().map_err(|_| Error::Config(format!("bad size {t:?}")))?;
        if !(v >= 1.0 && v.fract() == 0.0 && v < 1e12) {
            return Err(Error::Config(format!("bad size {t:?}")));
        }
        Ok(v as usize)
    };
    if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (num(a)?, num(b)?);
        if lo > hi {
            return Err(Error::Config(format!("empty size range {s:?}")));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            out.push(v);
            v = v.checked_mul(10).ok_or_else(|| Error::Config("size overflow".into()))?;
        }
        Ok(out)
    } else {
        s.split(',').map(num).collect()
    }
}

/// Summarizes an ER graph of average degree `avg_degree` at each size.
pub fn bench(sizes: &[usize], avg_degree: f64, cfg: &SummaryConfig, seed: u64) -> Result<Vec<BenchRow>> {
    sizes
        .iter()
        .map(|&n| {
            let g = generate_er(n, avg_degree, seed)?;
            let start = Instant::now();
            let s = summarize(&g, cfg)?;
            let seconds = start.elapsed().as_secs_f64();
            let row = BenchRow { nodes: n, edges: g.num_arcs() / 2, summary_bytes: s.to_bytes().len(), seconds };
            log::info!("{row:?}");
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_grammar() {
        assert_eq!(parse_sizes("1e2..1e4").unwrap(), vec![100, 1000, 10000]);
        assert_eq!(parse_sizes("1000, 5e3").unwrap(), vec![1000, 5000]);
        assert!(parse_sizes("1e4..1e2").is_err());
        assert!(parse_sizes("1.5").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn bench_rows_are_reproducible_apart_from_time() {
        let cfg = SummaryConfig { dim: 8, ..Default::default() };
        let a = bench(&[100, 200], 4.0, &cfg, 1).unwrap();
        let b = bench(&[100, 200], 4.0, &cfg, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.nodes, x.edges, x.summary_bytes), (y.nodes, y.edges, y.summary_bytes));
        }
        assert!(a[0].summary_bytes > 0);
    }
}
