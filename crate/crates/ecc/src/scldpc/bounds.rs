//! Closed-form failure estimates driven by size-2 stopping-set statistics.
//!
//! Two p forms coexist deliberately. The figure-matching burst bounds use the
//! product-form approximation; the per-type rate vector, the whole-code mean,
//! and the error floor use the exact four-term count. They disagree in the
//! third digit, and each downstream consumer names the form it wants.

use super::{EnsembleParams, ScldpcError};
use serde::Serialize;
use serde_json::json;

/// How to evaluate the probability that a fixed VN pair at one position forms
/// a size-2 stopping set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PForm {
    /// Full count of socket arrangements: matches the per-type rate figures.
    Exact,
    /// Dominant-term product: matches the plotted burst bounds.
    Approx,
    /// Reciprocal binomial for the unbounded-degree ensemble.
    Poisson,
}

/// One evaluated formula with its inputs and companion values, ready for JSON
/// output.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub formula: String,
    pub inputs: serde_json::Value,
    pub value: f64,
    pub components: serde_json::Value,
}

/// The counting formulas stay well-defined below the sampling feasibility
/// threshold (wM > 2(dv+1)dc), so they check only structural shape.
fn check_shape(params: &EnsembleParams) -> Result<(), ScldpcError> {
    let &EnsembleParams { dv, dc, w, l, m, .. } = params;
    if dv < 3 || w <= 1 || l == 0 || m == 0 {
        return Err(ScldpcError::InvalidParams(format!(
            "need dv >= 3, w > 1, positive L and M; got dv={dv} w={w} L={l} M={m}"
        )));
    }
    if (m as u64 * dv as u64) % dc as u64 != 0 {
        return Err(ScldpcError::InvalidParams(format!(
            "M*dv = {} not divisible by dc = {dc}",
            m as u64 * dv as u64
        )));
    }
    Ok(())
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn falling(n: u64, k: u64) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Probability that two fixed VNs in one position have identical CN
/// neighborhoods.
pub fn p_size2(params: &EnsembleParams, form: PForm) -> Result<f64, ScldpcError> {
    check_shape(params)?;
    let dv = params.dv as u64;
    let dc = params.dc as u64;
    let sockets = params.w as u64 * params.m as u64 * dv;
    Ok(match form {
        PForm::Exact => {
            // T_ss arrangements pair both VNs CN by CN; T counts all ways the
            // second VN can land given the first, split by how many of its
            // edges reuse the first VN's CNs.
            let t_ss = falling(dv, dv) * ((dc - 1) as f64).powi(dv as i32);
            let mut t = 0.0;
            for i in 0..=dv {
                let mut term = ((dc - 1) as f64).powi(i as i32);
                term *= falling(dv, i) * binom(dv, i);
                for k in 0..dv - i {
                    term *= (sockets - (dv + k) * dc) as f64;
                }
                t += term;
            }
            t_ss / t
        }
        PForm::Approx => {
            let t_ss = falling(dv, dv) * ((dc - 1) as f64).powi(dv as i32);
            let mut denom = 1.0;
            for k in 0..dv {
                denom *= (sockets - (dv + k) * dc) as f64;
            }
            t_ss / denom
        }
        PForm::Poisson => 1.0 / binom(sockets / dc, dv),
    })
}

/// Per-offset probabilities p_(1,i) = ((w-i+1)/w)^dv p and expected per-SP
/// counts: lambda_(1,1) = C(M,2) p, lambda_(1,i) = M^2 p_(1,i). Exact p.
pub fn p_vector(params: &EnsembleParams) -> Result<(Vec<f64>, Vec<f64>), ScldpcError> {
    let p = p_size2(params, PForm::Exact)?;
    let w = params.w as f64;
    let m = params.m as f64;
    let ps: Vec<f64> = (1..=params.w)
        .map(|i| ((w - (i - 1) as f64) / w).powi(params.dv as i32) * p)
        .collect();
    let mut lambdas = vec![binom(params.m as u64, 2) * ps[0]];
    lambdas.extend(ps[1..].iter().map(|&pi| m * m * pi));
    Ok((ps, lambdas))
}

/// Expected size-2 stopping sets per position under a full-position burst.
fn lambda_sp(params: &EnsembleParams) -> Result<f64, ScldpcError> {
    Ok(binom(params.m as u64, 2) * p_size2(params, PForm::Approx)?)
}

/// Probability that a fixed (dv+1)-tuple of VNs in one position forms the
/// minimal pattern that survives expurgation.
pub fn p_min_pattern(params: &EnsembleParams) -> Result<f64, ScldpcError> {
    check_shape(params)?;
    let dv = params.dv as u64;
    let dc = params.dc as u64;
    let sockets = params.w as u64 * params.m as u64 * dv;
    let mut num = 1.0;
    for i in 1..=dv {
        num *= (((dc - 1) * (dv - i + 1)) as f64).powi(i as i32);
        num *= falling(dv, i);
    }
    let mut den = 1.0;
    for j in dv * (dv + 1) / 2..dv * (dv + 1) {
        den *= (sockets - j * dc) as f64;
    }
    Ok(num / den)
}

/// Block-failure estimate when one full position is erased: 1 - e^{-lambda}
/// with lambda the expected in-position stopping sets of the smallest
/// surviving size.
pub fn spbc_bound(params: &EnsembleParams, expurgated: bool) -> Result<f64, ScldpcError> {
    let lambda = if expurgated {
        binom(params.m as u64, params.dv as u64 + 1) * p_min_pattern(params)?
    } else {
        lambda_sp(params)?
    };
    Ok(-(-lambda).exp_m1())
}

/// Burst of b erased VNs at a uniformly random offset into one position,
/// averaged exactly over the M alignments. Written for w = 3: the burst
/// splits into segment lengths (m1, m2, m3) over three consecutive
/// positions, and the failure odds combine same-position pairs with the
/// one- and two-position-apart types. Approximate p matches the plotted
/// curves.
pub fn rbc_bound(params: &EnsembleParams, b: u32) -> Result<f64, ScldpcError> {
    check_shape(params)?;
    if params.w != 3 {
        return Err(ScldpcError::Unsupported(format!(
            "burst bound is written for w = 3, got w = {}",
            params.w
        )));
    }
    let m = params.m as i64;
    if b == 0 || b as i64 > 2 * m {
        return Err(ScldpcError::Unsupported(format!(
            "burst length {b} outside 1..=2M = {}; the split assumes at most three positions",
            2 * m
        )));
    }
    let p = p_size2(params, PForm::Approx)?;
    let w = params.w as f64;
    let pv: Vec<f64> = (0..3)
        .map(|d| ((w - d as f64) / w).powi(params.dv as i32) * p)
        .collect();
    let mut total = 0.0;
    for s in 1..=m {
        let m1 = m - s;
        let m2 = (b as i64 - m1).clamp(0, m);
        let m3 = (b as i64 - m1 - m2).max(0);
        let seg = [m1 as f64, m2 as f64, m3 as f64];
        let mut ok = 1.0;
        for &len in &seg {
            if len >= 2.0 {
                ok *= 1.0 - len * (len - 1.0) / 2.0 * pv[0];
            }
        }
        for k in 0..2 {
            ok *= 1.0 - seg[k] * seg[k + 1] * pv[1];
        }
        ok *= 1.0 - seg[0] * seg[2] * pv[2];
        total += 1.0 - ok;
    }
    Ok(total / m as f64)
}

/// Expected size-2 stopping sets over the whole chain, with the shortened
/// windows at both ends counted once each. Exact p.
pub fn n2h_mean(params: &EnsembleParams) -> Result<f64, ScldpcError> {
    check_shape(params)?;
    let w = params.w as usize;
    let l = params.l as f64;
    if params.l < params.w {
        return Err(ScldpcError::Unsupported(format!(
            "chain length {} shorter than coupling width {}",
            params.l, params.w
        )));
    }
    let (_, lambdas) = p_vector(params)?;
    let mut lambda = l * lambdas[0];
    lambda += (l - w as f64 + 1.0) * lambdas[1..].iter().sum::<f64>();
    for j in 1..w - 1 {
        for i in j + 1..w {
            lambda += lambdas[w - i];
        }
    }
    Ok(lambda)
}

/// Bit-erasure floor: each of the lambda expected pairs erases with
/// probability eps^2 and strands two bits out of LM.
pub fn error_floor(params: &EnsembleParams, eps: f64) -> Result<f64, ScldpcError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(ScldpcError::Unsupported(format!("erasure rate {eps} outside [0,1]")));
    }
    let lambda = n2h_mean(params)?;
    Ok(2.0 * lambda * eps * eps / (params.l as f64 * params.m as f64))
}

/// Assembles the JSON report for one formula evaluation.
pub fn report(
    formula: &str,
    params: &EnsembleParams,
    value: f64,
    components: serde_json::Value,
) -> BoundReport {
    BoundReport {
        formula: formula.to_string(),
        inputs: json!({
            "dv": params.dv, "dc": params.dc, "w": params.w,
            "L": params.l, "M": params.m, "flavor": params.flavor.to_string(),
        }),
        value,
        components,
    }
}
