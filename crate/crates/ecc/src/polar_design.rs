//! Code construction by erasure density evolution on the stage tree.
//!
//! Decoding peels factors from the channel side inward, and each length-l
//! interpolation block turns an output erasure rate eps into l distinct input
//! erasure rates: the j-th input, decoded after inputs 0..j are known, stays
//! erased iff fewer than l - j outputs survive. Folding that split across the
//! factor list gives every spectral coordinate its own erasure rate, and a
//! greedy sweep packs the most reliable coordinates into the information set
//! until the union bound on block failure would exceed the target delta.

use crate::channels::ChannelModel;
use crate::gf::{Field, FieldSpec, Sym};
use crate::gfft::{GfftError, TransformPlan};
use crate::polar_codec::{Codec, CoordOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("design channel must be an erasure channel, got {0}")]
    NotErasureChannel(String),
    #[error("delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("factor list {factors:?} is invalid for field order {q}")]
    BadFactors { q: u32, factors: Vec<u32> },
    #[error("binary kernel designs are not cyclic; no generator polynomial")]
    NotCyclic,
    #[error("{0} erases node ranges, not symbol blocks")]
    NotSymbolChannel(String),
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Transform(#[from] GfftError),
}

/// Erasure rate of input j of a length-l block whose outputs are erased
/// independently with probability eps, given inputs 0..j are already known:
/// the block recovers input j iff at least l - j outputs survive.
pub fn erasure_split(l: u32, j: u32, eps: f64) -> f64 {
    debug_assert!(j < l);
    if eps <= 0.0 {
        return 0.0;
    }
    if eps >= 1.0 {
        return 1.0;
    }
    // sum_{i=0}^{l-1-j} C(l,i) (1-eps)^i eps^(l-i), accumulated from the
    // i = l-1-j end downward: the running ratio is then eps/(1-eps), which
    // stays finite even for subnormal eps, where the upward direction's
    // (1-eps)/eps overflows and turns an underflowed term into 0 * inf.
    let top = l - 1 - j;
    let mut binom = 1.0;
    for i in 0..top {
        binom *= (l - i) as f64 / (i + 1) as f64;
    }
    let mut term = binom * (1.0 - eps).powi(top as i32) * eps.powi((l - top) as i32);
    let mut acc = term;
    let ratio = eps / (1.0 - eps);
    for i in (1..=top).rev() {
        term *= ratio * i as f64 / (l - i + 1) as f64;
        acc += term;
    }
    acc.clamp(0.0, 1.0)
}

/// Per-coordinate erasure rates after full polarization. `factors[last]`
/// sits next to the channel and is peeled first; coordinate i consumes the
/// factor digits of i most-significant-first, i.e. the split of the last
/// factor is indexed by i mod factors[last], then i / factors[last] recurses
/// on the remaining factors.
pub fn density_evolve(factors: &[u32], eps: f64) -> Vec<f64> {
    let mut cur = vec![eps];
    for &l in factors.iter().rev() {
        let mut next = Vec::with_capacity(cur.len() * l as usize);
        for t in 0..l {
            for &e in &cur {
                next.push(erasure_split(l, t, e));
            }
        }
        cur = next;
    }
    cur
}

/// Result of the greedy information-set sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub info: Vec<usize>,
    pub frozen: Vec<usize>,
    /// Sum of the selected coordinate rates: a union bound on block erasure
    /// failure under genie-order decoding.
    pub union_bound: f64,
    pub rate: f64,
}

/// Greedy selection: coordinates sorted by (rate, index) ascending join the
/// information set while the cumulative rate stays within delta; the first
/// exceedance stops the sweep.
pub fn select_info(rates: &[f64], delta: f64) -> Selection {
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]).then(a.cmp(&b)));
    let mut info = Vec::new();
    let mut union_bound = 0.0;
    for i in order {
        if union_bound + rates[i] <= delta {
            union_bound += rates[i];
            info.push(i);
        } else {
            break;
        }
    }
    info.sort_unstable();
    let frozen: Vec<usize> = (0..rates.len()).filter(|i| !info.contains(i)).collect();
    let rate = info.len() as f64 / rates.len() as f64;
    Selection { info, frozen, union_bound, rate }
}

/// A finished code design: everything needed to rebuild the transform,
/// encoder and decoders, in a stable serialized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarDesign {
    pub field: FieldSpec,
    pub n: usize,
    pub factors: Vec<u32>,
    pub design_channel: String,
    pub delta: f64,
    pub frozen_indices: Vec<usize>,
    pub info_indices: Vec<usize>,
    pub coord_rates: Vec<f64>,
    pub rate: f64,
    pub union_bound: f64,
}

impl PolarDesign {
    /// Designs a code of length prod(factors) over `field` for an erasure
    /// design channel. Over GF(2) the factors must all be 2 (the transform
    /// degenerates to the binary kernel); otherwise the length must divide
    /// q - 1 so the spectral transform exists.
    pub fn design(
        field: &Field,
        factors: &[u32],
        channel: &ChannelModel,
        delta: f64,
    ) -> Result<PolarDesign, DesignError> {
        let eps = match channel {
            ChannelModel::Qec { eps } | ChannelModel::Bec { eps } => *eps,
            other => return Err(DesignError::NotErasureChannel(other.to_string())),
        };
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(DesignError::BadDelta(delta));
        }
        let q = field.q();
        if factors.is_empty() || factors.iter().any(|&f| f < 2) {
            return Err(DesignError::BadFactors { q, factors: factors.to_vec() });
        }
        let n: u64 = factors.iter().map(|&f| f as u64).product();
        if q == 2 {
            if factors.iter().any(|&f| f != 2) {
                return Err(DesignError::BadFactors { q, factors: factors.to_vec() });
            }
        } else {
            // Must be able to build the transform later.
            TransformPlan::new(field.clone(), factors)?;
        }
        let coord_rates = density_evolve(factors, eps);
        let sel = select_info(&coord_rates, delta);
        Ok(PolarDesign {
            field: field.spec().clone(),
            n: n as usize,
            factors: factors.to_vec(),
            design_channel: channel.to_string(),
            delta,
            frozen_indices: sel.frozen,
            info_indices: sel.info,
            coord_rates,
            rate: sel.rate,
            union_bound: sel.union_bound,
        })
    }

    /// Message length (number of information coordinates).
    pub fn k(&self) -> usize {
        self.info_indices.len()
    }

    pub fn is_binary(&self) -> bool {
        self.field.q == 2
    }

    /// Rebuilds the spectral transform. Fails for binary designs, whose
    /// kernel is handled separately.
    pub fn plan(&self) -> Result<TransformPlan, GfftError> {
        let field = if self.field.m == 1 {
            Field::new(self.field.q).expect("stored field spec is valid")
        } else {
            Field::with_modulus(self.field.q, self.field.modulus.clone())
                .expect("stored field spec is valid")
        };
        TransformPlan::new(field, &self.factors)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes")
    }

    pub fn from_json(s: &str) -> Result<PolarDesign, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Generator polynomial of the cyclic code, little-endian coefficients: the
/// monic product of (x - w^i) over the frozen coordinates. Codewords are
/// exactly its polynomial multiples, so it divides x^n - 1.
pub fn generator_poly(design: &PolarDesign) -> Result<Vec<Sym>, DesignError> {
    if design.is_binary() {
        return Err(DesignError::NotCyclic);
    }
    let plan = design.plan()?;
    let f = plan.field();
    let mut g = vec![1];
    for &i in &design.frozen_indices {
        let root = f.pow(plan.omega(), i as i64).expect("nonzero base");
        let mut next = vec![0; g.len() + 1];
        for (d, &c) in g.iter().enumerate() {
            next[d + 1] = f.add(next[d + 1], c);
            next[d] = f.sub(next[d], f.mul(root, c));
        }
        g = next;
    }
    Ok(g)
}

/// Per-coordinate (error, erasure) frequencies of the hard-decision SC
/// decoder with every coordinate unfrozen and all prior inputs supplied by a
/// genie. Trials run in parallel on disjoint rng streams, so the result
/// depends only on (master_seed, trials).
pub fn monte_carlo_design(
    plan: &TransformPlan,
    channel: &ChannelModel,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<(f64, f64)>, DesignError> {
    if trials == 0 {
        return Err(DesignError::NoTrials);
    }
    if matches!(channel, ChannelModel::Spbc { .. } | ChannelModel::Rbc { .. }) {
        return Err(DesignError::NotSymbolChannel(channel.to_string()));
    }
    let codec = Codec::transform_only(plan.clone());
    let n = plan.len();
    let q = plan.field().q();
    let zero = || (vec![0u64; n], vec![0u64; n]);
    let (errors, erasures) = (0..trials)
        .into_par_iter()
        .fold(zero, |(mut errs, mut ers), trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(trial);
            let spectrum: Vec<Sym> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let codeword = codec.encode_spectrum(&spectrum).expect("lengths match");
            let obs = channel.transmit(&mut rng, q, &codeword);
            let outcomes = codec.decode_hard_genie(&obs, &spectrum).expect("lengths match");
            for (i, o) in outcomes.iter().enumerate() {
                match o {
                    CoordOutcome::Error => errs[i] += 1,
                    CoordOutcome::Erasure => ers[i] += 1,
                    CoordOutcome::Correct => {}
                }
            }
            (errs, ers)
        })
        .reduce(zero, |(mut ae, mut ax), (be, bx)| {
            for i in 0..n {
                ae[i] += be[i];
                ax[i] += bx[i];
            }
            (ae, ax)
        });
    let t = trials as f64;
    Ok(errors
        .iter()
        .zip(&erasures)
        .map(|(&e, &x)| (e as f64 / t, x as f64 / t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    #[test]
    fn split_worked_values() {
        // Length-3 block at eps = 0.5.
        assert!((erasure_split(3, 0, 0.5) - 0.875).abs() < 1e-15);
        assert!((erasure_split(3, 1, 0.5) - 0.5).abs() < 1e-15);
        assert!((erasure_split(3, 2, 0.5) - 0.125).abs() < 1e-15);
        // Binary kernel splits.
        let e = 0.37;
        assert!((erasure_split(2, 0, e) - (2.0 * e - e * e)).abs() < 1e-15);
        assert!((erasure_split(2, 1, e) - e * e).abs() < 1e-15);
        // Extremes.
        assert_eq!(erasure_split(5, 2, 0.0), 0.0);
        assert_eq!(erasure_split(5, 2, 1.0), 1.0);
        // First input: erased unless every output survives... complement form.
        assert!((erasure_split(4, 0, 0.3) - (1.0 - 0.7f64.powi(4))).abs() < 1e-15);
        // Last input: needs only one output, erased iff all are.
        assert!((erasure_split(4, 3, 0.3) - 0.3f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn split_is_monotone() {
        for l in [2u32, 3, 5, 17] {
            for j in 0..l - 1 {
                assert!(erasure_split(l, j, 0.4) > erasure_split(l, j + 1, 0.4));
            }
            for j in 0..l {
                assert!(erasure_split(l, j, 0.6) > erasure_split(l, j, 0.4));
            }
        }
    }

    #[test]
    fn evolve_n15_worked_example() {
        let rates = density_evolve(&[5, 3], 0.5);
        let expected = [
            0.999969, 0.968750, 0.487091, 0.998901, 0.812500, 0.120728, 0.983948,
            0.500000, 0.016052, 0.879272, 0.187500, 0.001099, 0.512909, 0.031250,
            0.000031,
        ];
        assert_eq!(rates.len(), 15);
        for (i, (&got, want)) in rates.iter().zip(expected).enumerate() {
            assert!((got - want).abs() < 1e-6, "coord {i}: {got} vs {want}");
        }
    }

    #[test]
    fn evolve_preserves_mean() {
        // The split is a fair redistribution: the average coordinate rate
        // always equals the channel rate.
        for (factors, eps) in [
            (vec![5u32, 3], 0.5),
            (vec![3, 11, 31], 0.37),
            (vec![4, 6], 0.8),
            (vec![2, 2, 2, 2, 2, 2], 0.45),
            (vec![17, 5, 3], 0.21),
        ] {
            let rates = density_evolve(&factors, eps);
            let mean = rates.iter().sum::<f64>() / rates.len() as f64;
            assert!((mean - eps).abs() < 1e-12, "{factors:?} {mean} vs {eps}");
        }
    }

    #[test]
    fn greedy_selection_stops_at_first_exceedance() {
        let rates = [0.01, 0.02, 0.03, 0.9];
        let sel = select_info(&rates, 0.05);
        assert_eq!(sel.info, vec![0, 1]);
        assert_eq!(sel.frozen, vec![2, 3]);
        assert!((sel.union_bound - 0.03).abs() < 1e-15);
        assert!((sel.rate - 0.5).abs() < 1e-15);
        // Ties broken by index.
        let sel = select_info(&[0.5, 0.5, 0.5], 1.0);
        assert_eq!(sel.info, vec![0, 1]);
    }

    #[test]
    fn design_n15_worked_example() {
        let field = Field::new(16).unwrap();
        let d = PolarDesign::design(
            &field,
            &[5, 3],
            &ChannelModel::Qec { eps: 0.5 },
            0.1,
        )
        .unwrap();
        assert_eq!(d.info_indices, vec![8, 11, 13, 14]);
        assert_eq!(d.frozen_indices.len(), 11);
        assert!((d.rate - 4.0 / 15.0).abs() < 1e-12);
        assert!((d.union_bound - 0.048431396484375).abs() < 1e-12);
        assert_eq!(d.design_channel, "qec:0.5");
        assert_eq!(d.k(), 4);
        assert_eq!(d.plan().unwrap().len(), 15);
    }

    #[test]
    fn rate_depends_on_factor_order() {
        let field = Field::new(1024).unwrap();
        let qec = ChannelModel::Qec { eps: 0.5 };
        // Length-3 blocks at the channel: lower rate.
        let a = PolarDesign::design(&field, &[31, 11, 3], &qec, 0.1).unwrap();
        assert!((a.rate - 0.4291).abs() < 5e-5, "{}", a.rate);
        let b = PolarDesign::design(&field, &[11, 3, 31], &qec, 0.1).unwrap();
        assert!((b.rate - 0.4340).abs() < 5e-5, "{}", b.rate);
    }

    #[test]
    fn design_rejects_bad_inputs() {
        let field = Field::new(16).unwrap();
        let qec = ChannelModel::Qec { eps: 0.5 };
        assert!(matches!(
            PolarDesign::design(&field, &[5, 3], &ChannelModel::Qsc { beta: 0.3, q: None }, 0.1),
            Err(DesignError::NotErasureChannel(_))
        ));
        assert!(matches!(
            PolarDesign::design(&field, &[5, 3], &qec, 0.0),
            Err(DesignError::BadDelta(_))
        ));
        // 14 does not divide 15.
        assert!(PolarDesign::design(&field, &[2, 7], &qec, 0.1).is_err());
        let f2 = Field::new(2).unwrap();
        assert!(matches!(
            PolarDesign::design(&f2, &[2, 3], &ChannelModel::Bec { eps: 0.5 }, 0.1),
            Err(DesignError::BadFactors { .. })
        ));
    }

    #[test]
    fn binary_design_through_same_pipeline() {
        let f2 = Field::new(2).unwrap();
        let d = PolarDesign::design(
            &f2,
            &[2; 8],
            &ChannelModel::Bec { eps: 0.5 },
            0.1,
        )
        .unwrap();
        assert_eq!(d.n, 256);
        assert_eq!(d.k(), 84);
        assert!((d.rate - 0.328125).abs() < 1e-12);
        assert!(d.is_binary());
        assert!(d.plan().is_err());
    }

    #[test]
    fn json_round_trip_uses_contract_names() {
        let field = Field::new(16).unwrap();
        let d = PolarDesign::design(&field, &[5, 3], &ChannelModel::Qec { eps: 0.5 }, 0.1)
            .unwrap();
        let js: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        for key in [
            "field", "n", "factors", "design_channel", "delta", "frozen_indices",
            "info_indices", "coord_rates", "rate", "union_bound",
        ] {
            assert!(js.get(key).is_some(), "missing {key}");
        }
        assert_eq!(js["field"]["q"], 16);
        assert_eq!(js["n"], 15);
        let back = PolarDesign::from_json(&d.to_json()).unwrap();
        assert_eq!(back.info_indices, d.info_indices);
        assert_eq!(back.coord_rates, d.coord_rates);
    }

    /// Synthetic division of num by monic div; returns (quotient, remainder).
    fn poly_divmod(f: &Field, num: &[Sym], div: &[Sym]) -> (Vec<Sym>, Vec<Sym>) {
        assert_eq!(*div.last().unwrap(), 1, "divisor must be monic");
        let mut rem = num.to_vec();
        let mut quo = vec![0; num.len().saturating_sub(div.len()) + 1];
        for d in (div.len() - 1..num.len()).rev() {
            let c = rem[d];
            if c == 0 {
                continue;
            }
            let shift = d - (div.len() - 1);
            quo[shift] = c;
            for (k, &dc) in div.iter().enumerate() {
                rem[shift + k] = f.sub(rem[shift + k], f.mul(c, dc));
            }
        }
        (quo, rem)
    }

    #[test]
    fn generator_poly_trivial_cases() {
        let field = Field::new(16).unwrap();
        // Noiseless design freezes nothing: g = 1.
        let all_info =
            PolarDesign::design(&field, &[5, 3], &ChannelModel::Qec { eps: 0.0 }, 0.5).unwrap();
        assert!(all_info.frozen_indices.is_empty());
        assert_eq!(generator_poly(&all_info).unwrap(), vec![1]);
        // Single frozen coordinate 0: root w^0 = 1, g = x - 1 = x + 1.
        let mut one_frozen = all_info.clone();
        one_frozen.frozen_indices = vec![0];
        one_frozen.info_indices = (1..15).collect();
        assert_eq!(generator_poly(&one_frozen).unwrap(), vec![1, 1]);
        let f2 = Field::new(2).unwrap();
        let bin =
            PolarDesign::design(&f2, &[2; 4], &ChannelModel::Bec { eps: 0.5 }, 0.5).unwrap();
        assert_eq!(generator_poly(&bin), Err(DesignError::NotCyclic));
    }

    #[test]
    fn generator_poly_divides_x_n_minus_1_and_codewords() {
        let field = Field::new(16).unwrap();
        let d = PolarDesign::design(&field, &[5, 3], &ChannelModel::Qec { eps: 0.5 }, 0.1)
            .unwrap();
        let g = generator_poly(&d).unwrap();
        assert_eq!(g.len(), 12, "degree n - k = 11");
        assert_eq!(*g.last().unwrap(), 1);
        // x^15 - 1, little-endian.
        let mut xn1 = vec![0; 16];
        xn1[0] = field.sub(0, 1);
        xn1[15] = 1;
        let (_, rem) = poly_divmod(&field, &xn1, &g);
        assert!(rem.iter().all(|&c| c == 0), "remainder {rem:?}");
        // Every codeword polynomial is a multiple of g.
        let codec = crate::polar_codec::Codec::from_design(&d).unwrap();
        let codeword = codec.encode(&[7, 1, 14, 3]).unwrap();
        let (_, rem) = poly_divmod(&field, &codeword, &g);
        assert!(rem.iter().all(|&c| c == 0), "remainder {rem:?}");
    }

    #[test]
    fn mc_design_on_erasure_channel_matches_evolution() {
        let field = Field::new(16).unwrap();
        let plan = TransformPlan::new(field, &[5, 3]).unwrap();
        let qec = ChannelModel::Qec { eps: 0.5 };
        let trials = 10_000;
        let stats = monte_carlo_design(&plan, &qec, trials, 71).unwrap();
        let rates = density_evolve(&[5, 3], 0.5);
        for (i, (&(pe, px), r)) in stats.iter().zip(rates).enumerate() {
            assert_eq!(pe, 0.0, "erasures never decode to a wrong symbol");
            let sigma = (r * (1.0 - r) / trials as f64).sqrt();
            assert!(
                (px - r).abs() <= 4.0 * sigma + 1e-9,
                "coord {i}: {px} vs {r} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn mc_design_error_channel_first_coordinate() {
        // Coordinate 0 is decoded with an empty prefix: plain interpolation,
        // never an erasure, and nearly always wrong at beta = 0.5 (a busted
        // block yields an almost uniform symbol, error rate ~ 1 - 1/q).
        let field = Field::new(16).unwrap();
        let plan = TransformPlan::new(field, &[5, 3]).unwrap();
        let qsc = ChannelModel::Qsc { beta: 0.5, q: None };
        let stats = monte_carlo_design(&plan, &qsc, 10_000, 72).unwrap();
        let (pe, px) = stats[0];
        assert_eq!(px, 0.0);
        assert!((0.925..=0.948).contains(&pe), "p_error {pe}");
    }

    #[test]
    fn mc_design_noiseless_and_rejections() {
        let field = Field::new(16).unwrap();
        let plan = TransformPlan::new(field, &[5, 3]).unwrap();
        let clean = ChannelModel::Qsce { beta: 0.0, eps: 0.0, q: None };
        let stats = monte_carlo_design(&plan, &clean, 200, 5).unwrap();
        assert!(stats.iter().all(|&(pe, px)| pe == 0.0 && px == 0.0));
        assert_eq!(
            monte_carlo_design(&plan, &clean, 0, 5),
            Err(DesignError::NoTrials)
        );
        assert!(matches!(
            monte_carlo_design(&plan, &ChannelModel::Spbc { pos: 1 }, 10, 5),
            Err(DesignError::NotSymbolChannel(_))
        ));
        // Deterministic given (seed, trials).
        let qec = ChannelModel::Qec { eps: 0.4 };
        let a = monte_carlo_design(&plan, &qec, 500, 9).unwrap();
        let b = monte_carlo_design(&plan, &qec, 500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn modulus_choice_does_not_move_the_design() {
        // Same field order, different irreducible modulus: identical rates
        // and information set, because density evolution never multiplies.
        let a = Field::new(16).unwrap();
        let b = Field::with_modulus(16, vec![1, 0, 0, 1, 1]).unwrap();
        let qec = ChannelModel::Qec { eps: 0.5 };
        let da = PolarDesign::design(&a, &[5, 3], &qec, 0.1).unwrap();
        let db = PolarDesign::design(&b, &[5, 3], &qec, 0.1).unwrap();
        assert_eq!(da.info_indices, db.info_indices);
        assert_eq!(da.coord_rates, db.coord_rates);
    }
}
