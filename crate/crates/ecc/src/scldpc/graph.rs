//! Ensemble sampling and the edge-list file format.

use super::{EnsembleParams, Flavor, ScldpcError};
use rand::seq::SliceRandom;
use rand::Rng;

const SWAP_TRIES: u32 = 200;
const GRAPH_RESTARTS: u32 = 8;
const REPAIR_STEPS: u32 = 10_000;

/// A sampled code instance. Edges are stored VN-major with stride dv plus a
/// CSR view from the CN side; both stay immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph {
    params: EnsembleParams,
    seed: u64,
    vn_cns: Vec<u32>,
    cn_offsets: Vec<u32>,
    cn_vns: Vec<u32>,
}

impl TannerGraph {
    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    /// Seed label recorded in the file header; informational only.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed_label(mut self, seed: u64) -> TannerGraph {
        self.seed = seed;
        self
    }

    pub fn n_vn(&self) -> u32 {
        self.params.n_vn()
    }

    pub fn n_cn(&self) -> u32 {
        self.params.n_cn()
    }

    pub fn vn_neighbors(&self, vn: u32) -> &[u32] {
        let dv = self.params.dv as usize;
        &self.vn_cns[vn as usize * dv..(vn as usize + 1) * dv]
    }

    pub fn cn_neighbors(&self, cn: u32) -> &[u32] {
        let lo = self.cn_offsets[cn as usize] as usize;
        let hi = self.cn_offsets[cn as usize + 1] as usize;
        &self.cn_vns[lo..hi]
    }

    pub fn vn_position(&self, vn: u32) -> u32 {
        vn / self.params.m
    }

    pub fn cn_position(&self, cn: u32) -> u32 {
        cn / self.params.cn_per_pos()
    }

    /// Edge offsets (CN position minus VN position) in slot order.
    pub fn constellation(&self, vn: u32) -> Vec<u32> {
        let pos = self.vn_position(vn);
        self.vn_neighbors(vn).iter().map(|&cn| self.cn_position(cn) - pos).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let dv = self.params.dv as usize;
        self.vn_cns.iter().enumerate().map(move |(i, &cn)| ((i / dv) as u32, cn))
    }

    /// Builds a graph from explicit edges, enforcing the flavor's invariants.
    pub fn from_edges(
        params: EnsembleParams,
        seed: u64,
        edges: &[(u32, u32)],
    ) -> Result<TannerGraph, ScldpcError> {
        params.validate()?;
        let n_vn = params.n_vn() as usize;
        let dv = params.dv as usize;
        if edges.len() != n_vn * dv {
            return Err(ScldpcError::ParseGraph(format!(
                "expected {} edges, got {}",
                n_vn * dv,
                edges.len()
            )));
        }
        let mut vn_cns = vec![u32::MAX; n_vn * dv];
        let mut fill = vec![0usize; n_vn];
        for &(vn, cn) in edges {
            if vn as usize >= n_vn {
                return Err(ScldpcError::ParseGraph(format!("vn {vn} out of range")));
            }
            if cn >= params.n_cn() {
                return Err(ScldpcError::ParseGraph(format!("cn {cn} out of range")));
            }
            let pos = vn / params.m;
            let cpos = cn / params.cn_per_pos();
            if cpos < pos || cpos >= pos + params.w {
                return Err(ScldpcError::ParseGraph(format!(
                    "edge ({vn},{cn}) leaves the coupling window"
                )));
            }
            if fill[vn as usize] == dv {
                return Err(ScldpcError::ParseGraph(format!("vn {vn} has degree > dv")));
            }
            vn_cns[vn as usize * dv + fill[vn as usize]] = cn;
            fill[vn as usize] += 1;
        }
        if let Some(v) = fill.iter().position(|&f| f != dv) {
            return Err(ScldpcError::ParseGraph(format!("vn {v} has degree < dv")));
        }
        let graph = assemble(params, seed, vn_cns);
        graph.check_flavor_invariants()?;
        Ok(graph)
    }

    fn check_flavor_invariants(&self) -> Result<(), ScldpcError> {
        let dc = self.params.dc as usize;
        if self.params.flavor != Flavor::Poisson {
            for cn in 0..self.n_cn() {
                if self.cn_neighbors(cn).len() > dc {
                    return Err(ScldpcError::ParseGraph(format!("cn {cn} overloaded")));
                }
            }
        }
        if matches!(self.params.flavor, Flavor::Random | Flavor::Expurgated) {
            for vn in 0..self.n_vn() {
                let ns = self.vn_neighbors(vn);
                for i in 0..ns.len() {
                    if ns[i + 1..].contains(&ns[i]) {
                        return Err(ScldpcError::ParseGraph(format!("vn {vn} has a multi-edge")));
                    }
                }
            }
        }
        if self.params.flavor == Flavor::Expurgated && !find_four_cycle(self).is_empty() {
            return Err(ScldpcError::ParseGraph("expurgated graph contains a 4-cycle".into()));
        }
        Ok(())
    }

    /// Text form: header `dv dc w L M flavor seed`, then one `vn cn` line per
    /// edge in slot order.
    pub fn to_edge_list(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "{} {} {} {} {} {} {}\n",
            p.dv, p.dc, p.w, p.l, p.m, p.flavor, self.seed
        );
        for (vn, cn) in self.edges() {
            out.push_str(&format!("{vn} {cn}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<TannerGraph, ScldpcError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| ScldpcError::ParseGraph("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(ScldpcError::ParseGraph(format!(
                "header needs 7 fields `dv dc w L M flavor seed`, got {}",
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<u32, ScldpcError> {
            s.parse().map_err(|_| ScldpcError::ParseGraph(format!("bad number `{s}`")))
        };
        let params = EnsembleParams {
            dv: num(fields[0])?,
            dc: num(fields[1])?,
            w: num(fields[2])?,
            l: num(fields[3])?,
            m: num(fields[4])?,
            flavor: fields[5].parse()?,
        };
        let seed: u64 = fields[6]
            .parse()
            .map_err(|_| ScldpcError::ParseGraph(format!("bad seed `{}`", fields[6])))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(ScldpcError::ParseGraph(format!("bad edge line `{line}`")));
            };
            edges.push((num(a)?, num(b)?));
        }
        TannerGraph::from_edges(params, seed, &edges)
    }
}

fn assemble(params: EnsembleParams, seed: u64, vn_cns: Vec<u32>) -> TannerGraph {
    let n_cn = params.n_cn() as usize;
    let mut loads = vec![0u32; n_cn];
    for &cn in &vn_cns {
        loads[cn as usize] += 1;
    }
    let mut cn_offsets = vec![0u32; n_cn + 1];
    for i in 0..n_cn {
        cn_offsets[i + 1] = cn_offsets[i] + loads[i];
    }
    let mut cursor: Vec<u32> = cn_offsets[..n_cn].to_vec();
    let mut cn_vns = vec![0u32; vn_cns.len()];
    let dv = params.dv as usize;
    for (i, &cn) in vn_cns.iter().enumerate() {
        cn_vns[cursor[cn as usize] as usize] = (i / dv) as u32;
        cursor[cn as usize] += 1;
    }
    TannerGraph { params, seed, vn_cns, cn_offsets, cn_vns }
}

/// Samples one code from the ensemble. Each VN position's M·dv sockets are
/// dealt into w equal offset groups by a uniform shuffle, and each CN
/// position matches its incoming edges to a uniform subset of its sockets.
/// Interior CN positions come out exactly full, so the matching never
/// deadlocks; the w−1 positions at each end absorb all the slack. Multi-edge
/// and girth constraints are then restored by pairwise edge swaps.
pub fn sample_graph<R: Rng>(
    params: &EnsembleParams,
    rng: &mut R,
) -> Result<TannerGraph, ScldpcError> {
    params.validate()?;
    if params.flavor == Flavor::Poisson {
        return Ok(assemble(*params, 0, poisson_edges(params, rng)));
    }
    for _ in 0..GRAPH_RESTARTS {
        let mut vn_cns = socket_match(params, rng)?;
        let ok = match params.flavor {
            Flavor::RandomMultiedge => true,
            Flavor::Random => unduplicate(params, rng, &mut vn_cns).is_ok(),
            Flavor::Expurgated => {
                unduplicate(params, rng, &mut vn_cns).is_ok()
                    && remove_four_cycles(params, rng, &mut vn_cns).is_ok()
            }
            Flavor::Poisson => unreachable!(),
        };
        if ok {
            return Ok(assemble(*params, 0, vn_cns));
        }
    }
    Err(ScldpcError::SamplingStall { attempts: GRAPH_RESTARTS })
}

/// Uniform socket matching. Needs w | M·dv so the offset groups split evenly.
fn socket_match<R: Rng>(
    params: &EnsembleParams,
    rng: &mut R,
) -> Result<Vec<u32>, ScldpcError> {
    let dv = params.dv as usize;
    let dc = params.dc as usize;
    let per_pos = params.m as usize * dv;
    if per_pos % params.w as usize != 0 {
        return Err(ScldpcError::InvalidParams(format!(
            "offset groups need w | M*dv; got w = {}, M*dv = {per_pos}",
            params.w
        )));
    }
    let group = per_pos / params.w as usize;
    let cpp = params.cn_per_pos() as usize;
    let mut vn_cns = vec![u32::MAX; params.n_vn() as usize * dv];
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); (params.l + params.w - 1) as usize];
    for z in 0..params.l as usize {
        let mut sockets: Vec<u32> =
            (z * per_pos..(z + 1) * per_pos).map(|s| s as u32).collect();
        sockets.shuffle(rng);
        for (j, chunk) in sockets.chunks(group).enumerate() {
            incoming[z + j].extend_from_slice(chunk);
        }
    }
    for (p, inc) in incoming.iter().enumerate() {
        let mut cn_sockets: Vec<u32> =
            (0..cpp * dc).map(|s| (p * cpp + s / dc) as u32).collect();
        cn_sockets.shuffle(rng);
        for (k, &vs) in inc.iter().enumerate() {
            vn_cns[vs as usize] = cn_sockets[k];
        }
    }
    Ok(vn_cns)
}

/// Swaps the target of edge slot s1 with a randomly chosen partner edge.
/// A swap is accepted only when both edges stay inside their windows and
/// neither VN gains a repeated neighbor.
fn swap_edge<R: Rng>(
    params: &EnsembleParams,
    rng: &mut R,
    vn_cns: &mut [u32],
    s1: usize,
) -> Result<(), ScldpcError> {
    let dv = params.dv as usize;
    let cpp = params.cn_per_pos();
    let v1 = (s1 / dv) as u32;
    let c1 = vn_cns[s1];
    let p1 = v1 / params.m;
    let cp1 = c1 / cpp;
    // VN positions whose window contains c1.
    let zlo = (cp1 + 1).saturating_sub(params.w);
    let zhi = cp1.min(params.l - 1);
    for _ in 0..SWAP_TRIES {
        let v2 = rng.gen_range(zlo..=zhi) * params.m + rng.gen_range(0..params.m);
        let s2 = v2 as usize * dv + rng.gen_range(0..dv);
        let c2 = vn_cns[s2];
        let cp2 = c2 / cpp;
        if cp2 < p1 || cp2 >= p1 + params.w {
            continue;
        }
        let n1 = &vn_cns[v1 as usize * dv..(v1 as usize + 1) * dv];
        let n2 = &vn_cns[v2 as usize * dv..(v2 as usize + 1) * dv];
        if n1.contains(&c2) || n2.contains(&c1) {
            continue;
        }
        vn_cns[s1] = c2;
        vn_cns[s2] = c1;
        return Ok(());
    }
    Err(ScldpcError::SamplingStall { attempts: SWAP_TRIES })
}

/// Removes repeated VN-CN edges by target swaps. One pass suffices: a swap
/// never introduces a duplicate at either endpoint, so repaired slots stay
/// clean.
fn unduplicate<R: Rng>(
    params: &EnsembleParams,
    rng: &mut R,
    vn_cns: &mut [u32],
) -> Result<(), ScldpcError> {
    let dv = params.dv as usize;
    let mut repairs = 0;
    for vn in 0..params.n_vn() as usize {
        for e in 1..dv {
            let ns = &vn_cns[vn * dv..(vn + 1) * dv];
            if ns[..e].contains(&ns[e]) {
                if repairs == REPAIR_STEPS {
                    return Err(ScldpcError::SamplingStall { attempts: REPAIR_STEPS });
                }
                repairs += 1;
                swap_edge(params, rng, vn_cns, vn * dv + e)?;
            }
        }
    }
    Ok(())
}

/// Breaks 4-cycles by re-drawing one participating edge through a swap. One
/// census pays for repairing every pair it found; a swap can shift a cycle
/// elsewhere, so the loop re-censuses until clean. Pairs after the first are
/// re-checked against the current edges, because an earlier swap in the same
/// pass can dissolve them or retarget their shared checks.
fn remove_four_cycles<R: Rng>(
    params: &EnsembleParams,
    rng: &mut R,
    vn_cns: &mut [u32],
) -> Result<(), ScldpcError> {
    let dv = params.dv as usize;
    let mut swaps = 0;
    loop {
        let offenders = four_cycle_pairs(params, vn_cns);
        if offenders.is_empty() {
            return Ok(());
        }
        for ((va, vb), _) in offenders {
            let nb = &vn_cns[vb as usize * dv..(vb as usize + 1) * dv];
            let shared: Vec<u32> = vn_cns[va as usize * dv..(va as usize + 1) * dv]
                .iter()
                .copied()
                .filter(|cn| nb.contains(cn))
                .collect();
            if shared.len() < 2 {
                continue;
            }
            if swaps == REPAIR_STEPS {
                return Err(ScldpcError::SamplingStall { attempts: REPAIR_STEPS });
            }
            swaps += 1;
            let victim = if rng.gen() { va } else { vb };
            let cn = shared[rng.gen_range(0..shared.len())];
            let slot = (0..dv)
                .find(|&e| vn_cns[victim as usize * dv + e] == cn)
                .expect("shared cn present");
            swap_edge(params, rng, vn_cns, victim as usize * dv + slot)?;
        }
    }
}

/// Rewires a sampled graph until no VN pair shares two CNs, preserving
/// degrees and window locality.
pub fn expurgate<R: Rng>(
    graph: &TannerGraph,
    rng: &mut R,
) -> Result<TannerGraph, ScldpcError> {
    let mut vn_cns = graph.vn_cns.clone();
    unduplicate(&graph.params, rng, &mut vn_cns)?;
    remove_four_cycles(&graph.params, rng, &mut vn_cns)?;
    Ok(assemble(graph.params, graph.seed, vn_cns))
}

/// Poisson flavor: every VN picks dv distinct CNs uniformly in its window,
/// with no socket accounting at all.
fn poisson_edges<R: Rng>(params: &EnsembleParams, rng: &mut R) -> Vec<u32> {
    let dv = params.dv as usize;
    let cpp = params.cn_per_pos();
    let span = params.w * cpp;
    let mut vn_cns = vec![u32::MAX; params.n_vn() as usize * dv];
    for vn in 0..params.n_vn() {
        let base = (vn / params.m) * cpp;
        let slots = &mut vn_cns[vn as usize * dv..(vn as usize + 1) * dv];
        for e in 0..dv {
            loop {
                let cn = base + rng.gen_range(0..span);
                if !slots[..e].contains(&cn) {
                    slots[e] = cn;
                    break;
                }
            }
        }
    }
    vn_cns
}

/// All VN pairs sharing at least two CNs, each with the shared CN list.
fn four_cycle_pairs(
    params: &EnsembleParams,
    vn_cns: &[u32],
) -> Vec<((u32, u32), Vec<u32>)> {
    use std::collections::HashMap;
    let dv = params.dv as usize;
    let mut cn_lists: Vec<Vec<u32>> = vec![Vec::new(); params.n_cn() as usize];
    for (i, &cn) in vn_cns.iter().enumerate() {
        cn_lists[cn as usize].push((i / dv) as u32);
    }
    let mut shared: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for (cn, vns) in cn_lists.iter().enumerate() {
        for i in 0..vns.len() {
            for j in i + 1..vns.len() {
                let key = if vns[i] < vns[j] { (vns[i], vns[j]) } else { (vns[j], vns[i]) };
                shared.entry(key).or_default().push(cn as u32);
            }
        }
    }
    let mut out: Vec<_> = shared.into_iter().filter(|(_, cns)| cns.len() >= 2).collect();
    out.sort_unstable_by_key(|&(k, _)| k);
    out
}

fn find_four_cycle(graph: &TannerGraph) -> Vec<((u32, u32), Vec<u32>)> {
    four_cycle_pairs(&graph.params, &graph.vn_cns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(flavor: Flavor) -> EnsembleParams {
        EnsembleParams { dv: 3, dc: 6, w: 3, l: 20, m: 64, flavor }
    }

    fn audit(graph: &TannerGraph) {
        let p = graph.params();
        for vn in 0..graph.n_vn() {
            let ns = graph.vn_neighbors(vn);
            assert_eq!(ns.len(), p.dv as usize);
            for &cn in ns {
                let off = graph.cn_position(cn) as i64 - graph.vn_position(vn) as i64;
                assert!((0..p.w as i64).contains(&off), "offset {off} outside window");
            }
        }
        if p.flavor != Flavor::Poisson {
            for cn in 0..graph.n_cn() {
                assert!(graph.cn_neighbors(cn).len() <= p.dc as usize);
            }
        }
        if matches!(p.flavor, Flavor::Random | Flavor::Expurgated) {
            for vn in 0..graph.n_vn() {
                let ns = graph.vn_neighbors(vn);
                for i in 0..ns.len() {
                    assert!(!ns[i + 1..].contains(&ns[i]), "multi-edge at vn {vn}");
                }
            }
        }
        // Edge conservation from both sides.
        let total: usize = (0..graph.n_cn()).map(|c| graph.cn_neighbors(c).len()).sum();
        assert_eq!(total, (graph.n_vn() * p.dv) as usize);
    }

    #[test]
    fn degree_and_locality_audit_all_flavors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for flavor in [
            Flavor::Random,
            Flavor::Poisson,
            Flavor::RandomMultiedge,
            Flavor::Expurgated,
        ] {
            for _ in 0..5 {
                let g = sample_graph(&params(flavor), &mut rng).unwrap();
                audit(&g);
            }
        }
    }

    #[test]
    fn expurgated_graphs_have_no_four_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = params(Flavor::Expurgated);
        for _ in 0..100 {
            let g = sample_graph(&p, &mut rng).unwrap();
            assert!(find_four_cycle(&g).is_empty());
        }
    }

    #[test]
    fn constellation_types_are_uniform() {
        // dv=3, w=2: the all-same-offset type has probability 1/w^dv = 1/8.
        // Statistical tolerance dominates; boundary effects are O(1/sqrt M).
        let p = EnsembleParams { dv: 3, dc: 6, w: 2, l: 30, m: 128, flavor: Flavor::Random };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut zeros = 0u64;
        let mut total = 0u64;
        while total < 100_000 {
            let g = sample_graph(&p, &mut rng).unwrap();
            for vn in 0..g.n_vn() {
                let c = g.constellation(vn);
                if c.iter().all(|&o| o == 0) {
                    zeros += 1;
                }
                total += 1;
            }
        }
        let freq = zeros as f64 / total as f64;
        assert!((freq - 0.125).abs() < 0.01, "p((3,0)) = {freq}");
    }

    #[test]
    fn edge_list_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = sample_graph(&params(Flavor::Random), &mut rng)
            .unwrap()
            .with_seed_label(4);
        let text = g.to_edge_list();
        let back = TannerGraph::from_edge_list(&text).unwrap();
        assert_eq!(g, back);
        let header = text.lines().next().unwrap();
        assert_eq!(header, "3 6 3 20 64 random 4");
    }

    #[test]
    fn parse_rejects_malformed_graphs() {
        assert!(TannerGraph::from_edge_list("").is_err());
        assert!(TannerGraph::from_edge_list("3 6 3 20 64 random\n").is_err());
        // Degree shortfall: valid header, no edges.
        assert!(matches!(
            TannerGraph::from_edge_list("3 6 3 20 64 random 0\n"),
            Err(ScldpcError::ParseGraph(_))
        ));
        // Locality violation: vn 0 (position 0) cannot reach position 3 CNs.
        let p = params(Flavor::Random);
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = sample_graph(&p, &mut rng).unwrap();
        edges.extend(g.edges());
        edges[0] = (0, 3 * p.cn_per_pos());
        assert!(matches!(
            TannerGraph::from_edges(p, 0, &edges),
            Err(ScldpcError::ParseGraph(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = params(Flavor::Random);
        let g1 = sample_graph(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let g2 = sample_graph(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let g3 = sample_graph(&p, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(g1, g2);
        assert_ne!(g1, g3);
    }

    #[test]
    fn expurgate_cleans_a_random_graph_in_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sample_graph(&params(Flavor::Random), &mut rng).unwrap();
        let e = expurgate(&g, &mut rng).unwrap();
        assert!(find_four_cycle(&e).is_empty());
        audit(&e);
        assert_eq!(e.params(), g.params());
        // Each VN keeps its per-position edge budget, just possibly rewired.
        for vn in 0..g.n_vn() {
            assert_eq!(e.vn_neighbors(vn).len(), g.vn_neighbors(vn).len());
        }
    }

    #[test]
    fn poisson_flavor_can_overload_checks() {
        // With no socket limit some CN exceeds dc eventually.
        let p = EnsembleParams { flavor: Flavor::Poisson, ..params(Flavor::Poisson) };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut seen_overload = false;
        for _ in 0..20 {
            let g = sample_graph(&p, &mut rng).unwrap();
            if (0..g.n_cn()).any(|c| g.cn_neighbors(c).len() > p.dc as usize) {
                seen_overload = true;
                break;
            }
        }
        assert!(seen_overload);
    }
}
