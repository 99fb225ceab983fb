//! Property tests: each invariant is checked against a naive oracle on
//! generated graphs and matrices.

use latsum::context::HistogramSpec;
use latsum::hetgraph::{read_graph_cache, write_graph_cache, GraphBuilder, HetGraph, NodeId};
use latsum::lowrank::pseudo_inverse;
use latsum::relfeat::{apply_operator, base_features, build_level, Operator};
use latsum::summary::{context_matrices, derive_embeddings, summarize, Summary, SummaryConfig};
use latsum::tasks::auc;
use nalgebra::DMatrix;
use proptest::prelude::*;

type Edges = Vec<(usize, usize, u8, u8)>;

fn graph_parts(max_nodes: usize, types: usize) -> impl Strategy<Value = (usize, Vec<usize>, Edges)> {
    (1..=max_nodes).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(0..types, n),
            prop::collection::vec((0..n, 0..n, 0..types as u8, 1..=8u8), 0..=4 * n),
        )
    })
}

fn build((n, node_types, edges): &(usize, Vec<usize>, Edges)) -> HetGraph {
    let mut b = GraphBuilder::new();
    for i in 0..*n {
        b.add_node(&i.to_string(), Some(&format!("v{}", node_types[i])));
    }
    for &(u, v, t, w) in edges {
        b.add_edge_by_label(&u.to_string(), &v.to_string(), Some(&format!("e{t}")), w as f64 * 0.25).unwrap();
    }
    b.build().unwrap()
}

fn homogeneous(max_nodes: usize) -> impl Strategy<Value = HetGraph> {
    graph_parts(max_nodes, 1).prop_map(|p| build(&p))
}

/// Ego plus out-neighbors, ascending.
fn naive_egonet(g: &HetGraph, i: usize) -> Vec<usize> {
    (0..g.num_nodes()).filter(|&j| j == i || g.has_arc(i as NodeId, j as NodeId)).collect()
}

fn naive_fold(op: Operator, ego: f64, v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    match op {
        Operator::Max => v.iter().cloned().fold(f64::MIN, f64::max),
        Operator::Min => v.iter().cloned().fold(f64::MAX, f64::min),
        Operator::Sum => v.iter().sum(),
        Operator::Mean => mean,
        Operator::Variance => v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n,
        Operator::L1Dist => v.iter().map(|x| (ego - x).abs()).sum(),
        Operator::L2Dist => v.iter().map(|x| (ego - x).powi(2)).sum(),
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0) * 64.0
}

fn small_cfg() -> SummaryConfig {
    SummaryConfig { dim: 8, histogram: HistogramSpec::new(8, 2.0).unwrap(), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_match_naive_folds(g in homogeneous(30), seed in any::<u64>()) {
        let x: Vec<f64> = (0..g.num_nodes()).map(|i| ((seed >> (i % 48)) % 97) as f64 * 0.5).collect();
        for op in Operator::ALL {
            let got = apply_operator(&g, &x, op).unwrap();
            for i in 0..g.num_nodes() {
                let vals: Vec<f64> = naive_egonet(&g, i).into_iter().map(|j| x[j]).collect();
                let scale = vals.iter().map(|v| v * v).sum::<f64>() + x[i] * x[i] * vals.len() as f64;
                let want = naive_fold(op, x[i], &vals);
                prop_assert!(close(got[i], want, scale), "{op} at node {i}: {} vs {want}", got[i]);
            }
        }
    }

    #[test]
    fn max_of_max_reaches_two_hops(g in homogeneous(30)) {
        let x0 = base_features(&g);
        let x1 = build_level(&g, &x0).unwrap();
        let x2 = build_level(&g, &x1).unwrap();
        for b in 0..3 {
            let j = x2.descriptors().iter().position(|d| d.to_string() == format!("{b}:max,max")).unwrap();
            let col = x2.column(j);
            for i in 0..g.num_nodes() {
                let reach: Vec<usize> = naive_egonet(&g, i).into_iter().flat_map(|k| naive_egonet(&g, k)).collect();
                let want = reach.into_iter().map(|k| x0.row(k)[b]).fold(f64::MIN, f64::max);
                prop_assert_eq!(col[i], want);
            }
        }
    }

    #[test]
    fn context_width_and_conservation(parts in graph_parts(25, 3)) {
        let g = build(&parts);
        let cfg = small_cfg();
        let (tv, te) = (g.registry().num_node_types(), g.registry().num_edge_types());
        for m in context_matrices(&g, &cfg).unwrap() {
            let f = cfg.context_features(m.level);
            prop_assert_eq!(m.width(), 2 * tv * te * cfg.histogram.bins() * f);
            for i in 0..g.num_nodes() {
                let node = i as NodeId;
                let arcs = g.out_arcs(node).iter().chain(g.in_arcs(node)).filter(|a| a.node != node).count();
                prop_assert_eq!(m.matrix.row_sum(i), (arcs * f) as f64);
            }
        }
    }

    #[test]
    fn scaling_by_base_shifts_one_bin(v in 1.0f64..1e6, bins in 4usize..40, a in prop::sample::select(vec![2.0, 3.0, 10.0])) {
        let spec = HistogramSpec::new(bins, a).unwrap();
        let b = spec.bin_index(v).unwrap();
        let shifted = spec.bin_index(v * a).unwrap();
        prop_assert_eq!(shifted, (b + 1).min(bins - 1));
        if v >= a && b < bins - 1 {
            prop_assert_eq!(spec.bin_index(v / a).unwrap(), b - 1);
        }
    }

    #[test]
    fn pseudo_inverse_satisfies_penrose(k in 1usize..12, d in 1usize..40, rank in 1usize..12, seed in any::<u64>()) {
        let rank = rank.min(k).min(d);
        let mut s = seed | 1;
        let mut next = move || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s % 2001) as f64 / 1000.0 - 1.0 };
        let l = DMatrix::from_fn(k, rank, |_, _| next());
        let r = DMatrix::from_fn(rank, d, |_, _| next());
        let h = &l * &r;
        let x = pseudo_inverse(&h);
        let (hx, xh) = (&h * &x, &x * &h);
        let scale = h.norm().max(1.0) * x.norm().max(1.0);
        prop_assert!((&hx * &h - &h).amax() <= 1e-8 * scale);
        prop_assert!((&xh * &x - &x).amax() <= 1e-8 * scale);
        prop_assert!((&hx - hx.transpose()).amax() <= 1e-8);
        prop_assert!((&xh - xh.transpose()).amax() <= 1e-8);
    }

    #[test]
    fn auc_ignores_monotone_transforms(scores in prop::collection::vec(-5.0f64..5.0, 2..60), flip in any::<u64>()) {
        let labels: Vec<bool> = (0..scores.len()).map(|i| (flip >> (i % 64)) & 1 == 1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let base = auc(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 7.0).collect();
        prop_assert!((auc(&warped, &labels).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn graph_cache_round_trips(parts in graph_parts(25, 3)) {
        let g = build(&parts);
        let mut buf = Vec::new();
        write_graph_cache(&g, &mut buf).unwrap();
        prop_assert_eq!(read_graph_cache(&buf[..]).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn summary_round_trips(parts in graph_parts(40, 2)) {
        let g = build(&parts);
        let s = summarize(&g, &small_cfg()).unwrap();
        let bytes = s.to_bytes();
        let back = Summary::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn embeddings_follow_node_relabeling(g in homogeneous(40), seed in any::<u64>()) {
        let n = g.num_nodes();
        let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
        let mut s = seed | 1;
        for i in (1..n).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            perm.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let summary = summarize(&g, &small_cfg()).unwrap();
        let e = derive_embeddings(&summary, &g, None).unwrap();
        let ep = derive_embeddings(&summary, &g.permuted(&perm).unwrap(), None).unwrap();
        for i in 0..n {
            let (a, b) = (e.row(i), ep.row(perm[i] as usize));
            let scale = a.iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * scale));
        }
    }
}
