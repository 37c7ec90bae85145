//! Encoder and successive-cancellation decoders for spectral codes.
//!
//! The encoder places message symbols on the information coordinates of the
//! spectrum, zeros on the frozen ones, and interpolates. Decoding walks the
//! same stage tree the transform uses: the factor next to the channel splits
//! the code into small interpolation blocks feeding recursive sub-codes. The
//! sub-code for input slot t is decoded only after slots 0..t were decoded
//! and re-encoded, so every small block always knows a consecutive prefix of
//! its inputs. Small blocks are solved by erasure interpolation (Forney), by
//! an errors-and-erasures locator (Berlekamp-Massey plus Forney), or in the
//! soft decoder by exact posterior propagation over a two-point kernel.
//!
//! The binary kernel variant (over GF(2), factors all 2) shares the schedule
//! but replaces interpolation blocks with xor butterflies; it exists so rate
//! and failure curves can be compared against the q-ary construction.

use crate::channels::ChannelModel;
use crate::gf::{Field, GfError, Sym};
use crate::gfft::{GfftError, TransformPlan};
use crate::polar_design::PolarDesign;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("message has {got} symbols, design carries {want}")]
    MessageLength { want: usize, got: usize },
    #[error("block has {got} symbols, code length is {want}")]
    BlockLength { want: usize, got: usize },
    #[error("symbol {sym} is outside the field of order {q}")]
    SymbolRange { sym: Sym, q: u32 },
    #[error("binary designs use the xor-kernel functions, not the spectral codec")]
    BinaryDesign,
    #[error("soft decoding requires a prime field and factors all equal 2")]
    SoftUnsupported,
    #[error(transparent)]
    Transform(#[from] GfftError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Per-coordinate outcome of a genie-audited decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordOutcome {
    Correct,
    Error,
    Erasure,
}

/// A probability vector over the q field symbols. Kept normalized; a combine
/// whose mass underflows resets to uniform and reports it, so campaigns can
/// count the trial as failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn uniform(q: u32) -> ProbVector {
        ProbVector(vec![1.0 / q as f64; q as usize])
    }

    pub fn point(q: u32, v: Sym) -> ProbVector {
        let mut p = vec![0.0; q as usize];
        p[v as usize] = 1.0;
        ProbVector(p)
    }

    /// Posterior of a transmitted symbol given one observation through a
    /// symbol channel. Erasures carry no information.
    pub fn from_observation(
        model: &ChannelModel,
        q: u32,
        obs: Option<Sym>,
    ) -> Result<ProbVector, CodecError> {
        let y = match obs {
            None => return Ok(ProbVector::uniform(q)),
            Some(y) => y,
        };
        if y >= q {
            return Err(CodecError::SymbolRange { sym: y, q });
        }
        let beta = match *model {
            ChannelModel::Qec { .. } | ChannelModel::Bec { .. } => 0.0,
            ChannelModel::Qsc { beta, .. } | ChannelModel::Qsce { beta, .. } => beta,
            _ => 0.0,
        };
        let mut p = vec![beta / (q as f64 - 1.0); q as usize];
        p[y as usize] = 1.0 - beta;
        Ok(ProbVector(p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// Distribution of the sum of two independent symbols (prime fields).
    fn convolve_add(&self, other: &ProbVector, f: &Field) -> ProbVector {
        let q = self.0.len();
        let mut out = vec![0.0; q];
        for (x, &px) in self.0.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, &py) in other.0.iter().enumerate() {
                out[f.add(x as Sym, y as Sym) as usize] += px * py;
            }
        }
        ProbVector(out)
    }

    /// Posterior of T when the source S = s*T + c was observed with this
    /// distribution: a pure re-indexing.
    fn affine_preimage(&self, s: Sym, c: Sym, f: &Field) -> ProbVector {
        let q = self.0.len();
        let mut out = vec![0.0; q];
        for (t, slot) in out.iter_mut().enumerate() {
            let src = f.add(f.mul(s, t as Sym), c);
            *slot = self.0[src as usize];
        }
        ProbVector(out)
    }

    /// Renormalized product; returns true when the mass underflowed and the
    /// result was reset to uniform.
    fn combine(&self, other: &ProbVector) -> (ProbVector, bool) {
        let mut out: Vec<f64> = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a * b)
            .collect();
        let mass: f64 = out.iter().sum();
        if mass < 1e-300 {
            return (ProbVector::uniform(out.len() as u32), true);
        }
        for v in &mut out {
            *v /= mass;
        }
        (ProbVector(out), false)
    }

    /// Most likely symbol, lowest value on ties.
    pub fn argmax(&self) -> Sym {
        let mut best = 0usize;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best as Sym
    }
}

/// Result of a soft decode: hard spectral decisions plus an underflow flag;
/// flagged trials should be counted as failures.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftDecode {
    pub spectrum: Vec<Sym>,
    pub underflow: bool,
}

/// Encoder/decoder pair for one design over one field.
#[derive(Debug, Clone)]
pub struct Codec {
    plan: TransformPlan,
    frozen: Vec<bool>,
    info: Vec<usize>,
}

impl Codec {
    pub fn from_design(design: &PolarDesign) -> Result<Codec, CodecError> {
        if design.is_binary() {
            return Err(CodecError::BinaryDesign);
        }
        let plan = design.plan()?;
        let mut frozen = vec![false; design.n];
        for &i in &design.frozen_indices {
            frozen[i] = true;
        }
        Ok(Codec { plan, frozen, info: design.info_indices.clone() })
    }

    /// A codec with every coordinate treated as information; used by the
    /// genie-audited construction runs.
    pub fn transform_only(plan: TransformPlan) -> Codec {
        let n = plan.len();
        Codec { plan, frozen: vec![false; n], info: (0..n).collect() }
    }

    pub fn plan(&self) -> &TransformPlan {
        &self.plan
    }

    pub fn n(&self) -> usize {
        self.plan.len()
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn info_indices(&self) -> &[usize] {
        &self.info
    }

    /// Spreads a message over the information coordinates (ascending order),
    /// zeros elsewhere.
    pub fn spectrum_from_message(&self, message: &[Sym]) -> Result<Vec<Sym>, CodecError> {
        if message.len() != self.info.len() {
            return Err(CodecError::MessageLength { want: self.info.len(), got: message.len() });
        }
        let q = self.plan.field().q();
        let mut u = vec![0; self.n()];
        for (&i, &m) in self.info.iter().zip(message) {
            if m >= q {
                return Err(CodecError::SymbolRange { sym: m, q });
            }
            u[i] = m;
        }
        Ok(u)
    }

    pub fn encode(&self, message: &[Sym]) -> Result<Vec<Sym>, CodecError> {
        let u = self.spectrum_from_message(message)?;
        Ok(self.plan.inverse(&u)?)
    }

    pub fn encode_spectrum(&self, spectrum: &[Sym]) -> Result<Vec<Sym>, CodecError> {
        Ok(self.plan.inverse(spectrum)?)
    }

    /// Reads the message back out of a fully decided spectrum.
    pub fn extract_message(&self, spectrum: &[Option<Sym>]) -> Option<Vec<Sym>> {
        self.info.iter().map(|&i| spectrum[i]).collect()
    }

    /// Erasure-only successive cancellation. Returns the per-coordinate
    /// spectral decisions; `None` entries could not be recovered.
    pub fn decode_erasure(&self, obs: &[Option<Sym>]) -> Result<Vec<Option<Sym>>, CodecError> {
        self.check_block(obs)?;
        let mut decided = vec![None; self.n()];
        self.erase_rec(&plan_factors(&self.plan), self.plan.omega(), obs, 0, 1, &mut decided);
        Ok(decided)
    }

    /// Hard-decision successive cancellation with bounded-distance block
    /// solving. Entries are best-effort decisions; miscorrections are
    /// possible and silent, undecodable coordinates come back `None`.
    pub fn decode_hard(&self, obs: &[Option<Sym>]) -> Result<Vec<Option<Sym>>, CodecError> {
        self.check_block(obs)?;
        let mut decided = vec![None; self.n()];
        self.hard_rec(
            &plan_factors(&self.plan),
            self.plan.omega(),
            obs,
            0,
            1,
            &mut decided,
            &mut None,
        );
        Ok(decided)
    }

    /// Hard decode where each decided coordinate is compared against the true
    /// spectrum, tallied, and then replaced by the truth before decoding
    /// continues. Measures per-coordinate first-decision statistics.
    pub fn decode_hard_genie(
        &self,
        obs: &[Option<Sym>],
        truth: &[Sym],
    ) -> Result<Vec<CoordOutcome>, CodecError> {
        self.check_block(obs)?;
        if truth.len() != self.n() {
            return Err(CodecError::BlockLength { want: self.n(), got: truth.len() });
        }
        let mut decided = vec![None; self.n()];
        let mut genie = Some(Genie { truth, outcomes: vec![CoordOutcome::Erasure; self.n()] });
        self.hard_rec(
            &plan_factors(&self.plan),
            self.plan.omega(),
            obs,
            0,
            1,
            &mut decided,
            &mut genie,
        );
        Ok(genie.unwrap().outcomes)
    }

    /// Exact posterior successive cancellation for two-point kernels over a
    /// prime field: factors must all be 2.
    pub fn decode_soft(&self, posteriors: &[ProbVector]) -> Result<SoftDecode, CodecError> {
        let f = self.plan.field();
        if f.spec().m != 1 || f.q() == 2 || self.plan.factors().iter().any(|&l| l != 2) {
            return Err(CodecError::SoftUnsupported);
        }
        if posteriors.len() != self.n() {
            return Err(CodecError::BlockLength { want: self.n(), got: posteriors.len() });
        }
        let mut decided = vec![0; self.n()];
        let mut underflow = false;
        let depth = self.plan.factors().len();
        self.soft_rec(depth, self.plan.omega(), posteriors, 0, 1, &mut decided, &mut underflow);
        Ok(SoftDecode { spectrum: decided, underflow })
    }

    fn check_block(&self, obs: &[Option<Sym>]) -> Result<(), CodecError> {
        if obs.len() != self.n() {
            return Err(CodecError::BlockLength { want: self.n(), got: obs.len() });
        }
        Ok(())
    }

    /// One stage of erasure decoding on a sub-code spanning `obs.len()`
    /// outputs. `offset`/`stride` map this sub-code's input slots to global
    /// spectral coordinates. Returns the full output block once every
    /// channel-side small block is solved.
    fn erase_rec(
        &self,
        factors: &[u32],
        omega: Sym,
        obs: &[Option<Sym>],
        offset: usize,
        stride: usize,
        decided: &mut [Option<Sym>],
    ) -> Option<Vec<Sym>> {
        let f = self.plan.field();
        if factors.is_empty() {
            let g = offset;
            if self.frozen[g] {
                decided[g] = Some(0);
                return Some(vec![0]);
            }
            decided[g] = obs[0];
            return obs[0].map(|v| vec![v]);
        }
        let l = *factors.last().unwrap() as usize;
        let rest = &factors[..factors.len() - 1];
        let len = obs.len();
        let sub = len / l;
        let omega_l = f.pow(omega, sub as i64).unwrap();
        let omega_sub = f.pow(omega, l as i64).unwrap();

        let mut blocks: Vec<EraseBlock> = (0..sub)
            .map(|c| {
                let outputs: Vec<Option<Sym>> = (0..l).map(|r| obs[r * sub + c]).collect();
                let mut b = EraseBlock::new(outputs);
                b.try_solve(f, omega_l);
                b
            })
            .collect();

        let mut comp_obs = vec![None; sub];
        for t in 0..l {
            for (c, slot) in comp_obs.iter_mut().enumerate() {
                *slot = blocks[c]
                    .input(t)
                    .map(|a| f.mul(a, f.pow(omega, (c * t) as i64).unwrap()));
            }
            let child =
                self.erase_rec(rest, omega_sub, &comp_obs, offset + t * stride, stride * l, decided);
            if let Some(outs) = child {
                for (c, b) in blocks.iter_mut().enumerate() {
                    let a_t = f.mul(outs[c], f.pow(omega, -((c * t) as i64)).unwrap());
                    b.feed_input(t, a_t);
                    b.try_solve(f, omega_l);
                }
            }
        }
        if blocks.iter().all(|b| b.solved) {
            let mut out = vec![0; len];
            for (c, b) in blocks.iter().enumerate() {
                for r in 0..l {
                    out[r * sub + c] = b.outputs[r].unwrap();
                }
            }
            Some(out)
        } else {
            None
        }
    }

    /// Hard-decision counterpart: blocks are re-solved from pristine channel
    /// outputs at every request (a longer prefix can expose errors a shorter
    /// one missed), and a stage completes only when all sub-codes recovered.
    fn hard_rec(
        &self,
        factors: &[u32],
        omega: Sym,
        obs: &[Option<Sym>],
        offset: usize,
        stride: usize,
        decided: &mut [Option<Sym>],
        genie: &mut Option<Genie<'_>>,
    ) -> Option<Vec<Sym>> {
        let f = self.plan.field();
        if factors.is_empty() {
            let g = offset;
            if self.frozen[g] {
                decided[g] = Some(0);
                return Some(vec![0]);
            }
            if let Some(gn) = genie.as_mut() {
                gn.outcomes[g] = match obs[0] {
                    None => CoordOutcome::Erasure,
                    Some(v) if v == gn.truth[g] => CoordOutcome::Correct,
                    Some(_) => CoordOutcome::Error,
                };
                decided[g] = Some(gn.truth[g]);
                return Some(vec![gn.truth[g]]);
            }
            decided[g] = obs[0];
            return obs[0].map(|v| vec![v]);
        }
        let l = *factors.last().unwrap() as usize;
        let rest = &factors[..factors.len() - 1];
        let len = obs.len();
        let sub = len / l;
        let omega_l = f.pow(omega, sub as i64).unwrap();
        let omega_sub = f.pow(omega, l as i64).unwrap();

        let mut blocks: Vec<HardBlock> = (0..sub)
            .map(|c| HardBlock::new((0..l).map(|r| obs[r * sub + c]).collect()))
            .collect();

        let mut all_children = true;
        let mut comp_obs = vec![None; sub];
        for t in 0..l {
            for (c, slot) in comp_obs.iter_mut().enumerate() {
                *slot = blocks[c]
                    .solve_input(f, omega_l, t)
                    .map(|a| f.mul(a, f.pow(omega, (c * t) as i64).unwrap()));
            }
            let child =
                self.hard_rec(rest, omega_sub, &comp_obs, offset + t * stride, stride * l, decided, genie);
            match child {
                Some(outs) => {
                    for (c, b) in blocks.iter_mut().enumerate() {
                        let a_t = f.mul(outs[c], f.pow(omega, -((c * t) as i64)).unwrap());
                        b.feed_input(t, a_t);
                    }
                }
                None => all_children = false,
            }
        }
        if !all_children {
            return None;
        }
        // Every input of every block is known: outputs follow by
        // interpolation regardless of what the channel delivered.
        let mut out = vec![0; len];
        for (c, b) in blocks.iter().enumerate() {
            let a: Vec<Sym> = b.inputs.iter().map(|v| v.unwrap()).collect();
            let w = small_interpolate(f, omega_l, &a);
            for r in 0..l {
                out[r * sub + c] = w[r];
            }
        }
        Some(out)
    }

    /// Exact posterior propagation over the two-point kernel. Returns the
    /// re-encoded hard outputs of this sub-code.
    #[allow(clippy::too_many_arguments)]
    fn soft_rec(
        &self,
        depth: usize,
        omega: Sym,
        post: &[ProbVector],
        offset: usize,
        stride: usize,
        decided: &mut [Sym],
        underflow: &mut bool,
    ) -> Vec<Sym> {
        let f = self.plan.field();
        if depth == 0 {
            let g = offset;
            let u = if self.frozen[g] { 0 } else { post[0].argmax() };
            decided[g] = u;
            return vec![u];
        }
        let len = post.len();
        let sub = len / 2;
        let omega_sub = f.pow(omega, 2).unwrap();
        let half = f.inv(f.embed_int(2)).unwrap();

        // Slot 0: a0 = out0 + out1; the kernel scale cancels.
        let comp0_post: Vec<ProbVector> = (0..sub)
            .map(|c| post[c].convolve_add(&post[sub + c], f))
            .collect();
        let comp0 =
            self.soft_rec(depth - 1, omega_sub, &comp0_post, offset, stride * 2, decided, underflow);

        // Slot 1 given a0: out0 = half*(a0 + a1), out1 = half*(a0 - a1), and
        // the sub-code sees T = omega^c * a1; fold the twiddle into the maps.
        let comp1_post: Vec<ProbVector> = (0..sub)
            .map(|c| {
                let a0 = comp0[c];
                let wc_inv = f.pow(omega, -(c as i64)).unwrap();
                let s = f.mul(half, wc_inv);
                let c0 = f.mul(half, a0);
                let est0 = post[c].affine_preimage(s, c0, f);
                let est1 = post[sub + c].affine_preimage(f.neg(s), c0, f);
                let (combined, reset) = est0.combine(&est1);
                *underflow |= reset;
                combined
            })
            .collect();
        let comp1 = self.soft_rec(
            depth - 1,
            omega_sub,
            &comp1_post,
            offset + stride,
            stride * 2,
            decided,
            underflow,
        );

        let mut out = vec![0; len];
        for c in 0..sub {
            let a0 = comp0[c];
            let a1 = f.mul(comp1[c], f.pow(omega, -(c as i64)).unwrap());
            out[c] = f.mul(half, f.add(a0, a1));
            out[sub + c] = f.mul(half, f.sub(a0, a1));
        }
        out
    }
}

struct Genie<'a> {
    truth: &'a [Sym],
    outcomes: Vec<CoordOutcome>,
}

fn plan_factors(plan: &TransformPlan) -> Vec<u32> {
    plan.factors().to_vec()
}

/// Channel-side block state for the erasure decoder. Once the erasure count
/// fits inside the known prefix the block is solved for good: with no errors
/// possible, interpolation is exact.
struct EraseBlock {
    inputs: Vec<Option<Sym>>,
    outputs: Vec<Option<Sym>>,
    prefix: usize,
    solved: bool,
}

impl EraseBlock {
    fn new(outputs: Vec<Option<Sym>>) -> EraseBlock {
        let l = outputs.len();
        EraseBlock { inputs: vec![None; l], outputs, prefix: 0, solved: false }
    }

    fn input(&self, t: usize) -> Option<Sym> {
        self.inputs[t]
    }

    fn feed_input(&mut self, t: usize, v: Sym) {
        self.inputs[t] = Some(v);
        while self.prefix < self.inputs.len() && self.inputs[self.prefix].is_some() {
            self.prefix += 1;
        }
    }

    fn try_solve(&mut self, f: &Field, omega_l: Sym) {
        if self.solved {
            return;
        }
        let erased: Vec<usize> = (0..self.outputs.len())
            .filter(|&i| self.outputs[i].is_none())
            .collect();
        if erased.len() > self.prefix {
            return;
        }
        let prefix_vals: Vec<Sym> =
            (0..self.prefix).map(|j| self.inputs[j].unwrap()).collect();
        let w = solve_erasures(f, omega_l, &self.outputs, &prefix_vals, &erased);
        for (i, &v) in w.iter().enumerate() {
            self.outputs[i] = Some(v);
        }
        for (j, slot) in self.inputs.iter_mut().enumerate() {
            *slot = Some(evaluate(f, omega_l, &w, j));
        }
        self.prefix = self.inputs.len();
        self.solved = true;
    }
}

/// Channel-side block state for the hard decoder. Outputs stay pristine; each
/// input request re-runs the bounded-distance solve at the current prefix.
struct HardBlock {
    inputs: Vec<Option<Sym>>,
    outputs: Vec<Option<Sym>>,
    prefix: usize,
    cache: Option<(usize, Option<Vec<Sym>>)>,
}

impl HardBlock {
    fn new(outputs: Vec<Option<Sym>>) -> HardBlock {
        let l = outputs.len();
        HardBlock { inputs: vec![None; l], outputs, prefix: 0, cache: None }
    }

    fn feed_input(&mut self, t: usize, v: Sym) {
        self.inputs[t] = Some(v);
        while self.prefix < self.inputs.len() && self.inputs[self.prefix].is_some() {
            self.prefix += 1;
        }
    }

    /// Best-effort value of input t from the current prefix and the raw
    /// outputs. `None` when the bounded-distance solve fails its checks.
    fn solve_input(&mut self, f: &Field, omega_l: Sym, t: usize) -> Option<Sym> {
        if let Some(v) = self.inputs[t] {
            return Some(v);
        }
        match &self.cache {
            Some((p, res)) if *p == self.prefix => {
                return res.as_ref().map(|a| a[t]);
            }
            _ => {}
        }
        let prefix_vals: Vec<Sym> =
            (0..self.prefix).map(|j| self.inputs[j].unwrap()).collect();
        let res = bm_forney(f, omega_l, &self.outputs, &prefix_vals);
        self.cache = Some((self.prefix, res.clone()));
        res.map(|a| a[t])
    }
}

/// Polynomial evaluation w(x) at x = omega^j: recovers input j of a block
/// whose outputs are w (the transform pair is evaluation/interpolation).
fn evaluate(f: &Field, omega: Sym, w: &[Sym], j: usize) -> Sym {
    let x = f.pow(omega, j as i64).unwrap();
    let mut acc = 0;
    let mut xi = 1;
    for &wi in w {
        acc = f.add(acc, f.mul(wi, xi));
        xi = f.mul(xi, x);
    }
    acc
}

/// Erasure-only interpolation. `outputs` has `erased` positions unknown, the
/// first `prefix.len()` inputs are known; requires erased.len() <= prefix.
/// Returns the completed output block.
///
/// Syndromes S_j = a_j - y(omega^j) over the zero-filled word y equal the
/// erasure word's spectrum prefix; with locator L(x) = prod (1 - X_k x) and
/// E(x) = S(x) L(x) mod x^r, position i_k holds -X_k E(1/X_k) / L'(1/X_k).
fn solve_erasures(
    f: &Field,
    omega: Sym,
    outputs: &[Option<Sym>],
    prefix: &[Sym],
    erased: &[usize],
) -> Vec<Sym> {
    let r = prefix.len();
    let nu = erased.len();
    debug_assert!(nu <= r || nu == 0);
    let mut w: Vec<Sym> = outputs.iter().map(|o| o.unwrap_or(0)).collect();
    if nu == 0 {
        return w;
    }
    // Syndromes on the zero-filled word.
    let synd: Vec<Sym> = (0..r)
        .map(|j| f.sub(prefix[j], evaluate(f, omega, &w, j)))
        .collect();
    let locs: Vec<Sym> = erased.iter().map(|&i| f.pow(omega, i as i64).unwrap()).collect();
    let lambda = locator_poly(f, &locs);
    let e_poly = poly_mul_trunc(f, &synd, &lambda, r);
    let dlambda = derivative(f, &lambda);
    for (k, &i) in erased.iter().enumerate() {
        let xk = locs[k];
        let xk_inv = f.inv(xk).unwrap();
        let num = poly_eval(f, &e_poly, xk_inv);
        let den = poly_eval(f, &dlambda, xk_inv);
        let e_val = f.neg(f.mul(xk, f.div(num, den).unwrap()));
        w[i] = f.add(w[i], e_val);
    }
    w
}

/// Bounded-distance errors-and-erasures solve of one block: known prefix of
/// r inputs, outputs with nu erasures and possibly t errors, correctable when
/// 2t + nu <= r. Returns the full input vector on success; `None` when any
/// consistency check fails. Miscorrection within the distance bound is
/// accepted silently, as any bounded-distance decoder must.
fn bm_forney(
    f: &Field,
    omega: Sym,
    outputs: &[Option<Sym>],
    prefix: &[Sym],
) -> Option<Vec<Sym>> {
    let l = outputs.len();
    let r = prefix.len();
    let erased: Vec<usize> = (0..l).filter(|&i| outputs[i].is_none()).collect();
    let rho = erased.len();
    if rho > r {
        return None;
    }
    if r == l {
        // Prefix covers everything; the outputs add nothing.
        return Some(prefix.to_vec());
    }
    let y: Vec<Sym> = outputs.iter().map(|o| o.unwrap_or(0)).collect();
    let synd: Vec<Sym> = (0..r)
        .map(|j| f.sub(prefix[j], evaluate(f, omega, &y, j)))
        .collect();
    let locs: Vec<Sym> = erased.iter().map(|&i| f.pow(omega, i as i64).unwrap()).collect();
    let gamma = locator_poly(f, &locs);

    // Berlekamp-Massey seeded with the erasure locator.
    let mut lambda = gamma.clone();
    let mut b = gamma;
    let mut big_l = rho;
    for k in rho..r {
        let mut delta = 0;
        for (i, &li) in lambda.iter().enumerate() {
            if i <= k {
                delta = f.add(delta, f.mul(li, synd[k - i]));
            }
        }
        b.insert(0, 0); // b <- x*b
        if delta != 0 {
            let t_poly = poly_sub_scaled(f, &lambda, &b, delta);
            if 2 * (big_l - rho) <= k - rho {
                let delta_inv = f.inv(delta).unwrap();
                b = lambda.iter().map(|&c| f.mul(c, delta_inv)).collect();
                big_l = k + 1 - (big_l - rho);
                lambda = t_poly;
            } else {
                lambda = t_poly;
            }
        }
    }
    trim(f, &mut lambda);
    let deg = lambda.len().saturating_sub(1);
    if deg != big_l || 2 * (big_l - rho) + rho > r {
        return None;
    }
    // Chien search over the block positions.
    let mut roots = Vec::new();
    for i in 0..l {
        let x_inv = f.pow(omega, -(i as i64)).unwrap();
        if poly_eval(f, &lambda, x_inv) == 0 {
            roots.push(i);
        }
    }
    if roots.len() != deg {
        return None;
    }
    let e_poly = poly_mul_trunc(f, &synd, &lambda, r);
    let dlambda = derivative(f, &lambda);
    let mut w = y;
    for &i in &roots {
        let xk = f.pow(omega, i as i64).unwrap();
        let xk_inv = f.inv(xk).unwrap();
        let den = poly_eval(f, &dlambda, xk_inv);
        if den == 0 {
            return None;
        }
        let num = poly_eval(f, &e_poly, xk_inv);
        let e_val = f.neg(f.mul(xk, f.div(num, den).unwrap()));
        w[i] = f.add(w[i], e_val);
    }
    // The corrected word must reproduce every known input.
    let a: Vec<Sym> = (0..l).map(|j| evaluate(f, omega, &w, j)).collect();
    if a[..r] != *prefix {
        return None;
    }
    Some(a)
}

/// Interpolation of a full input block back to outputs (the encoder-side
/// small transform): w_r = (1/l) sum_t omega^(-rt) a_t.
fn small_interpolate(f: &Field, omega: Sym, a: &[Sym]) -> Vec<Sym> {
    let l = a.len();
    let scale = f.inv(f.embed_int(l as u64)).unwrap();
    (0..l)
        .map(|r| {
            let mut acc = 0;
            for (t, &at) in a.iter().enumerate() {
                acc = f.add(acc, f.mul(at, f.pow(omega, -((r * t) as i64)).unwrap()));
            }
            f.mul(acc, scale)
        })
        .collect()
}

fn locator_poly(f: &Field, locs: &[Sym]) -> Vec<Sym> {
    let mut poly = vec![1];
    for &x in locs {
        // poly *= (1 - x*z)
        let mut next = vec![0; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] = f.add(next[i], c);
            next[i + 1] = f.sub(next[i + 1], f.mul(c, x));
        }
        poly = next;
    }
    poly
}

fn poly_mul_trunc(f: &Field, a: &[Sym], b: &[Sym], n: usize) -> Vec<Sym> {
    let mut out = vec![0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 || i >= n {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if i + j < n {
                out[i + j] = f.add(out[i + j], f.mul(ai, bj));
            }
        }
    }
    out
}

fn poly_sub_scaled(f: &Field, a: &[Sym], b: &[Sym], scale: Sym) -> Vec<Sym> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            f.sub(x, f.mul(scale, y))
        })
        .collect()
}

fn poly_eval(f: &Field, p: &[Sym], x: Sym) -> Sym {
    let mut acc = 0;
    for &c in p.iter().rev() {
        acc = f.add(f.mul(acc, x), c);
    }
    acc
}

fn derivative(f: &Field, p: &[Sym]) -> Vec<Sym> {
    if p.len() <= 1 {
        return vec![0];
    }
    (1..p.len())
        .map(|i| {
            let mut acc = 0;
            for _ in 0..i {
                acc = f.add(acc, p[i]);
            }
            acc
        })
        .collect()
}

fn trim(_f: &Field, p: &mut Vec<Sym>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

// ---------------------------------------------------------------------------
// Binary kernel (GF(2), factors all 2): xor butterflies on the same schedule.
// ---------------------------------------------------------------------------

/// Encodes a full spectrum (frozen zeros already placed) through the xor
/// kernel: (u0, u1) -> (u0 ^ u1, u1) applied stage by stage.
pub fn binary_encode_spectrum(u: &[Sym]) -> Vec<Sym> {
    let len = u.len();
    if len == 1 {
        return u.to_vec();
    }
    let sub = len / 2;
    let mut even = Vec::with_capacity(sub);
    let mut odd = Vec::with_capacity(sub);
    for c in 0..sub {
        even.push(u[2 * c]);
        odd.push(u[2 * c + 1]);
    }
    let comp0 = binary_encode_spectrum(&even);
    let comp1 = binary_encode_spectrum(&odd);
    let mut out = vec![0; len];
    for c in 0..sub {
        out[c] = comp0[c] ^ comp1[c];
        out[sub + c] = comp1[c];
    }
    out
}

pub fn binary_encode(design: &PolarDesign, message: &[Sym]) -> Result<Vec<Sym>, CodecError> {
    if !design.is_binary() {
        return Err(CodecError::BinaryDesign);
    }
    if message.len() != design.k() {
        return Err(CodecError::MessageLength { want: design.k(), got: message.len() });
    }
    let mut u = vec![0; design.n];
    for (&i, &m) in design.info_indices.iter().zip(message) {
        if m > 1 {
            return Err(CodecError::SymbolRange { sym: m, q: 2 });
        }
        u[i] = m;
    }
    Ok(binary_encode_spectrum(&u))
}

/// Erasure successive cancellation over the xor kernel. Same schedule as the
/// q-ary decoder; block solving reduces to propagating the two butterfly
/// constraints out1 = in1 and out0 = in0 ^ in1.
pub fn binary_decode_erasure(
    design: &PolarDesign,
    obs: &[Option<Sym>],
) -> Result<Vec<Option<Sym>>, CodecError> {
    if !design.is_binary() {
        return Err(CodecError::BinaryDesign);
    }
    if obs.len() != design.n {
        return Err(CodecError::BlockLength { want: design.n, got: obs.len() });
    }
    let mut frozen = vec![false; design.n];
    for &i in &design.frozen_indices {
        frozen[i] = true;
    }
    let mut decided = vec![None; design.n];
    binary_erase_rec(&frozen, obs, 0, 1, &mut decided);
    Ok(decided)
}

fn binary_erase_rec(
    frozen: &[bool],
    obs: &[Option<Sym>],
    offset: usize,
    stride: usize,
    decided: &mut [Option<Sym>],
) -> Option<Vec<Sym>> {
    let len = obs.len();
    if len == 1 {
        if frozen[offset] {
            decided[offset] = Some(0);
            return Some(vec![0]);
        }
        decided[offset] = obs[0];
        return obs[0].map(|v| vec![v]);
    }
    let sub = len / 2;
    // Butterfly c knowledge: [in0, in1, out0, out1].
    let mut cells: Vec<[Option<Sym>; 4]> = (0..sub)
        .map(|c| {
            let mut cell = [None, None, obs[c], obs[sub + c]];
            propagate(&mut cell);
            cell
        })
        .collect();

    let comp0_obs: Vec<Option<Sym>> = cells.iter().map(|cell| cell[0]).collect();
    let comp0 = binary_erase_rec(frozen, &comp0_obs, offset, stride * 2, decided);
    if let Some(outs) = comp0 {
        for (cell, &v) in cells.iter_mut().zip(&outs) {
            cell[0] = Some(v);
            propagate(cell);
        }
    }
    let comp1_obs: Vec<Option<Sym>> = cells.iter().map(|cell| cell[1]).collect();
    let comp1 = binary_erase_rec(frozen, &comp1_obs, offset + stride, stride * 2, decided);
    if let Some(outs) = comp1 {
        for (cell, &v) in cells.iter_mut().zip(&outs) {
            cell[1] = Some(v);
            propagate(cell);
        }
    }
    if cells.iter().all(|c| c[2].is_some() && c[3].is_some()) {
        let mut out = vec![0; len];
        for (c, cell) in cells.iter().enumerate() {
            out[c] = cell[2].unwrap();
            out[sub + c] = cell[3].unwrap();
        }
        Some(out)
    } else {
        None
    }
}

/// Fixpoint of the butterfly constraints out1 = in1, out0 = in0 ^ in1 on a
/// partially known cell [in0, in1, out0, out1].
fn propagate(cell: &mut [Option<Sym>; 4]) {
    loop {
        let before = *cell;
        if cell[1].is_none() && cell[3].is_some() {
            cell[1] = cell[3];
        }
        if cell[3].is_none() && cell[1].is_some() {
            cell[3] = cell[1];
        }
        match (cell[0], cell[1], cell[2]) {
            (None, Some(b), Some(o)) => cell[0] = Some(o ^ b),
            (Some(a), None, Some(o)) => cell[1] = Some(o ^ a),
            (Some(a), Some(b), None) => cell[2] = Some(a ^ b),
            _ => {}
        }
        if *cell == before {
            break;
        }
    }
}
