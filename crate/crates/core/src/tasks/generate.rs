//! Seeded random graph generators.
//!
//! Pair sampling uses geometric skipping, so generation costs `O(N + M)`
//! rather than `O(N²)`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hetgraph::{GraphBuilder, HetGraph, NodeId};

/// Calls `emit(k)` for each index `k < total` kept independently with probability `p`.
fn skip_sample(total: u64, p: f64, rng: &mut impl Rng, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k: u64 = 0;
    loop {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total - k) as f64 {
            return;
        }
        k += skip as u64;
        emit(k);
        k += 1;
        if k >= total {
            return;
        }
    }
}

/// Pair `(i, j)` with `j < i` at position `k` of the lower-triangle order.
fn triangle_pair(k: u64) -> (u64, u64) {
    let mut i = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as u64;
    while i * (i - 1) / 2 > k {
        i -= 1;
    }
    while (i + 1) * i / 2 <= k {
        i += 1;
    }
    (i, k - i * (i - 1) / 2)
}

/// Undirected simple `G(n, p)` with `p = avg_degree / (n - 1)`, stored as
/// symmetric unit-weight arcs.
pub fn generate_er(n: usize, avg_degree: f64, seed: u64) -> Result<HetGraph> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
    }
    let p = avg_degree / (n - 1) as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::with_identity_nodes(n).undirected(true);
    let total = n as u64 * (n as u64 - 1) / 2;
    let mut result = Ok(());
    skip_sample(total, p, &mut rng, |k| {
        let (i, j) = triangle_pair(k);
        if result.is_ok() {
            result = b.add_edge(i as NodeId, j as NodeId, 0, 1.0);
        }
    });
    result?;
    b.build()
}

/// Undirected stochastic block model. Returns the graph and each node's block.
pub fn generate_sbm(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(HetGraph, Vec<u32>)> {
    let n: usize = sizes.iter().sum();
    if n < 2 {
        return Err(Error::Config("SBM needs at least 2 nodes".into()));
    }
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("edge probability {p} outside [0, 1]")));
        }
    }
    let mut starts = Vec::with_capacity(sizes.len());
    let mut block = Vec::with_capacity(n);
    let mut acc = 0u64;
    for (bi, &s) in sizes.iter().enumerate() {
        starts.push(acc);
        acc += s as u64;
        block.extend(std::iter::repeat_n(bi as u32, s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for a in 0..sizes.len() {
        let sa = sizes[a] as u64;
        skip_sample(sa * sa.saturating_sub(1) / 2, p_in, &mut rng, |k| {
            let (i, j) = triangle_pair(k);
            pairs.push((starts[a] + i, starts[a] + j));
        });
        for b in a + 1..sizes.len() {
            let sb = sizes[b] as u64;
            skip_sample(sa * sb, p_out, &mut rng, |k| pairs.push((starts[a] + k / sb, starts[b] + k % sb)));
        }
    }
    let mut builder = GraphBuilder::with_identity_nodes(n).undirected(true);
    for (u, v) in pairs {
        builder.add_edge(u as NodeId, v as NodeId, 0, 1.0)?;
    }
    Ok((builder.build()?, block))
}

/// Picks `n` distinct nodes and joins each unordered pair among them with
/// probability `p` (both directions, unit weight, edge type 0). Pairs that
/// are already adjacent gain weight. Returns the new graph and the sorted
/// chosen nodes.
pub fn inject_er_subgraph(g: &HetGraph, n: usize, p: f64, seed: u64) -> Result<(HetGraph, Vec<NodeId>)> {
    if n > g.num_nodes() {
        return Err(Error::Config(format!("cannot choose {n} of {} nodes", g.num_nodes())));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<NodeId> = index::sample(&mut rng, g.num_nodes(), n).into_iter().map(|v| v as NodeId).collect();
    chosen.sort_unstable();
    let mut extra = Vec::new();
    for a in 0..chosen.len() {
        for b in a + 1..chosen.len() {
            if rng.random::<f64>() < p {
                extra.push((chosen[a], chosen[b], 0, 1.0));
                extra.push((chosen[b], chosen[a], 0, 1.0));
            }
        }
    }
    Ok((g.with_added_arcs(extra)?, chosen))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_indexing_is_a_bijection() {
        let n = 40u64;
        let mut seen = std::collections::HashSet::new();
        for k in 0..n * (n - 1) / 2 {
            let (i, j) = triangle_pair(k);
            assert!(j < i && i < n);
            assert!(seen.insert((i, j)));
        }
    }

    #[test]
    fn er_edge_count_concentrates() {
        let mut total = 0.0;
        for seed in 0..10 {
            let g = generate_er(10_000, 10.0, seed).unwrap();
            assert!(g.is_symmetric());
            total += g.num_arcs() as f64 / 10_000.0;
        }
        let mean_degree = total / 10.0;
        assert!((mean_degree - 10.0).abs() < 0.5, "{mean_degree}");
    }

    #[test]
    fn er_edge_cases() {
        assert_eq!(generate_er(50, 0.0, 1).unwrap().num_arcs(), 0);
        assert_eq!(generate_er(6, 5.0, 1).unwrap().num_arcs(), 30);
        assert!(generate_er(5, 10.0, 1).is_err());
        assert!(generate_er(1, 0.0, 1).is_err());
        assert_eq!(generate_er(500, 4.0, 9).unwrap(), generate_er(500, 4.0, 9).unwrap());
    }

    #[test]
    fn injection_clique_and_noop() {
        let g = generate_er(200, 3.0, 2).unwrap();
        let (h, nodes) = inject_er_subgraph(&g, 5, 1.0, 3).unwrap();
        assert_eq!(nodes.len(), 5);
        for &a in &nodes {
            for &b in &nodes {
                if a != b {
                    assert!(h.has_arc(a, b));
                }
            }
        }
        let (same, _) = inject_er_subgraph(&g, 20, 0.0, 3).unwrap();
        assert_eq!(same, g);
    }

    #[test]
    fn injection_edge_count_matches_binomial() {
        let g = generate_er(1000, 0.0, 0).unwrap();
        let mut total = 0.0;
        for seed in 0..10 {
            let (h, _) = inject_er_subgraph(&g, 100, 0.3, seed).unwrap();
            total += (h.num_arcs() / 2) as f64;
        }
        let expected = 0.3 * 4950.0;
        assert!((total / 10.0 - expected).abs() < 0.1 * expected);
    }

    #[test]
    fn sbm_block_densities() {
        let (g, block) = generate_sbm(&[500, 500], 0.1, 0.001, 4).unwrap();
        let (mut inside, mut across) = (0usize, 0usize);
        for (s, a) in g.arcs() {
            if block[s as usize] == block[a.node as usize] {
                inside += 1;
            } else {
                across += 1;
            }
        }
        let exp_in = 2.0 * 2.0 * 0.1 * (500.0 * 499.0 / 2.0);
        let exp_out = 2.0 * 0.001 * 250_000.0;
        assert!((inside as f64 - exp_in).abs() < 0.05 * exp_in, "{inside}");
        assert!((across as f64 - exp_out).abs() < 0.3 * exp_out, "{across}");
    }
}
