//! Counting the small stopping sets that dominate burst failures.

use super::graph::TannerGraph;
use std::collections::HashMap;

/// Size-2 stopping sets grouped by spatial offset: `by_offset[d]` counts
/// pairs whose VNs sit d positions apart (offset d = type (1, d+1)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Size2Census {
    pub by_offset: Vec<u64>,
}

impl Size2Census {
    pub fn total(&self) -> u64 {
        self.by_offset.iter().sum()
    }
}

/// A size-2 stopping set is a VN pair with identical CN neighborhoods (every
/// shared CN is then covered twice). Window overlap caps the offset at w-1.
pub fn count_size2(graph: &TannerGraph) -> Size2Census {
    let w = graph.params().w as usize;
    let mut buckets: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
    for vn in 0..graph.n_vn() {
        let mut key = graph.vn_neighbors(vn).to_vec();
        key.sort_unstable();
        key.dedup();
        buckets.entry(key).or_default().push(vn);
    }
    let mut by_offset = vec![0u64; w];
    for (_, vns) in buckets {
        for i in 0..vns.len() {
            for j in i + 1..vns.len() {
                let d = graph
                    .vn_position(vns[i])
                    .abs_diff(graph.vn_position(vns[j])) as usize;
                by_offset[d] += 1;
            }
        }
    }
    Size2Census { by_offset }
}

/// Counts the minimal size-(dv+1) patterns that survive expurgation: dv+1
/// VNs in one spatial position whose dv(dv+1)/2 distinct CNs are each shared
/// by exactly one VN pair, with no edges leaving the pattern.
pub fn count_min_patterns(graph: &TannerGraph) -> u64 {
    let p = graph.params();
    let dv = p.dv as usize;
    let m = p.m;
    let mut count = 0u64;
    for pos in 0..p.l {
        // Pair-sharing graph restricted to this position.
        let first = pos * m;
        let mut cn_local: HashMap<u32, Vec<u32>> = HashMap::new();
        for vn in first..first + m {
            for &cn in graph.vn_neighbors(vn) {
                cn_local.entry(cn).or_default().push(vn);
            }
        }
        let mut share: HashMap<(u32, u32), u32> = HashMap::new();
        for (_, vns) in cn_local.iter() {
            for i in 0..vns.len() {
                for j in i + 1..vns.len() {
                    let key = if vns[i] < vns[j] {
                        (vns[i], vns[j])
                    } else {
                        (vns[j], vns[i])
                    };
                    *share.entry(key).or_insert(0) += 1;
                }
            }
        }
        // Adjacency among VNs sharing exactly one CN (a pattern pair shares
        // exactly one; sharing two is a 4-cycle, which breaks the pattern).
        let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
        for (&(a, b), &c) in share.iter() {
            if c == 1 {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        let mut nodes: Vec<u32> = adj.keys().copied().collect();
        nodes.sort_unstable();
        let mut clique: Vec<u32> = Vec::with_capacity(dv + 1);
        count += extend_cliques(graph, &adj, &share, &nodes, &mut clique, dv + 1);
    }
    count
}

/// Depth-first enumeration of (dv+1)-cliques in the share graph, validating
/// the full pattern on each complete clique.
fn extend_cliques(
    graph: &TannerGraph,
    adj: &HashMap<u32, Vec<u32>>,
    share: &HashMap<(u32, u32), u32>,
    candidates: &[u32],
    clique: &mut Vec<u32>,
    size: usize,
) -> u64 {
    if clique.len() == size {
        return is_min_pattern(graph, clique) as u64;
    }
    let mut found = 0;
    for (i, &v) in candidates.iter().enumerate() {
        let compatible = clique.iter().all(|&u| {
            let key = if u < v { (u, v) } else { (v, u) };
            share.get(&key) == Some(&1)
        });
        if !compatible {
            continue;
        }
        clique.push(v);
        // Restrict to later neighbors to enumerate each clique once.
        let next: Vec<u32> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&u| adj.get(&v).is_some_and(|ns| ns.contains(&u)))
            .collect();
        found += extend_cliques(graph, adj, share, &next, clique, size);
        clique.pop();
    }
    found
}

fn is_min_pattern(graph: &TannerGraph, vns: &[u32]) -> bool {
    let dv = graph.params().dv as usize;
    let mut cover: HashMap<u32, u32> = HashMap::new();
    for &vn in vns {
        for &cn in graph.vn_neighbors(vn) {
            *cover.entry(cn).or_insert(0) += 1;
        }
    }
    cover.len() == dv * (dv + 1) / 2 && cover.values().all(|&c| c == 2)
}
