//! Peeling decoder for erasures on a Tanner graph.

use super::graph::TannerGraph;

/// Iteratively resolves any erased VN whose CN sees exactly one erased edge.
/// Returns the residual erased VNs (sorted): the unique maximal stopping set
/// inside the erased set, empty on success. Multi-edges count per edge, so a
/// doubly connected erased VN never resolves through that CN.
pub fn peel(graph: &TannerGraph, erased: &[bool]) -> Vec<u32> {
    let mut erased = erased.to_vec();
    let mut cn_load = vec![0u32; graph.n_cn() as usize];
    for (vn, cn) in graph.edges() {
        if erased[vn as usize] {
            cn_load[cn as usize] += 1;
        }
    }
    let mut ready: Vec<u32> = (0..graph.n_cn()).filter(|&c| cn_load[c as usize] == 1).collect();
    while let Some(cn) = ready.pop() {
        if cn_load[cn as usize] != 1 {
            continue;
        }
        let vn = *graph
            .cn_neighbors(cn)
            .iter()
            .find(|&&v| erased[v as usize])
            .expect("load 1 implies an erased neighbor");
        erased[vn as usize] = false;
        for &c2 in graph.vn_neighbors(vn) {
            cn_load[c2 as usize] -= 1;
            if cn_load[c2 as usize] == 1 {
                ready.push(c2);
            }
        }
    }
    (0..graph.n_vn()).filter(|&v| erased[v as usize]).collect()
}
