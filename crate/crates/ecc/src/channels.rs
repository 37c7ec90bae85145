//! Channel models: symbol-level erasure/error channels for block codes and
//! burst-erasure patterns for spatially coupled ensembles, plus capacity
//! formulas and Shannon-limit inversion.

use crate::gf::Sym;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("cannot parse channel spec '{0}'")]
    Parse(String),
    #[error("channel parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("no solution: rate {rate} is not achievable in (0, 1)")]
    NoSolution { rate: f64 },
}

/// A parsed channel. Symbol channels (`Qec`, `Qsc`, `Qsce`, `Bec`) act on
/// codeword symbols independently; burst channels (`Spbc`, `Rbc`) describe
/// which variable nodes of a spatially coupled code get erased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelModel {
    /// q-ary erasure channel: each symbol erased with probability eps.
    Qec { eps: f64 },
    /// q-ary symmetric channel: each symbol replaced by a uniformly random
    /// different symbol with probability beta. Optional q only feeds the
    /// capacity computations.
    Qsc { beta: f64, q: Option<u32> },
    /// Symmetric channel with erasures: erased with probability eps, in error
    /// with probability beta, clean otherwise.
    Qsce { beta: f64, eps: f64, q: Option<u32> },
    /// Binary erasure channel (alias of Qec over GF(2), kept distinct so
    /// reports name it as written).
    Bec { eps: f64 },
    /// Single-position burst: every variable node in spatial position pos
    /// (1-based) is erased.
    Spbc { pos: u32 },
    /// Random burst: b consecutive variable nodes erased, starting uniformly
    /// inside spatial position l.
    Rbc { l: u32, b: u32 },
}

impl ChannelModel {
    /// Parses specs like `qec:0.5`, `qsc:0.3`, `qsce:beta=0.5,eps=0.1`,
    /// `bec:0.45`, `spbc:pos=10`, `rbc:l=10,b=100`. Case-insensitive; the
    /// symmetric channels also accept a `q=` key for capacity queries.
    pub fn parse(s: &str) -> Result<ChannelModel, ChannelError> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, rest) = lower
            .split_once(':')
            .ok_or_else(|| ChannelError::Parse(s.to_string()))?;
        let mut pos_args = Vec::new();
        let mut kv = std::collections::HashMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    kv.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => pos_args.push(part.trim().to_string()),
            }
        }
        let parse_f = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| ChannelError::Parse(s.to_string()))
        };
        let parse_u = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| ChannelError::Parse(s.to_string()))
        };
        let get_f = |key: &str| kv.get(key).map(|v| parse_f(v)).transpose();
        let get_u = |key: &str| kv.get(key).map(|v| parse_u(v)).transpose();
        let single = |kv_key: &str| -> Result<Option<f64>, ChannelError> {
            if let Some(v) = kv.get(kv_key) {
                Ok(Some(parse_f(v)?))
            } else if pos_args.len() == 1 {
                Ok(Some(parse_f(&pos_args[0])?))
            } else {
                Ok(None)
            }
        };
        let model = match name {
            "qec" => ChannelModel::Qec {
                eps: single("eps")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
            },
            "bec" => ChannelModel::Bec {
                eps: single("eps")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
            },
            "qsc" => ChannelModel::Qsc {
                beta: single("beta")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
                q: get_u("q")?,
            },
            "qsce" => ChannelModel::Qsce {
                beta: get_f("beta")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
                eps: get_f("eps")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
                q: get_u("q")?,
            },
            "spbc" => ChannelModel::Spbc {
                pos: get_u("pos")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
            },
            "rbc" => ChannelModel::Rbc {
                l: get_u("l")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
                b: get_u("b")?.ok_or_else(|| ChannelError::Parse(s.into()))?,
            },
            _ => return Err(ChannelError::Parse(s.to_string())),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let unit = |x: f64, name: &str| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(ChannelError::ParameterOutOfRange(format!("{name}={x}")))
            }
        };
        match *self {
            ChannelModel::Qec { eps } | ChannelModel::Bec { eps } => unit(eps, "eps"),
            ChannelModel::Qsc { beta, .. } => unit(beta, "beta"),
            ChannelModel::Qsce { beta, eps, .. } => {
                unit(beta, "beta")?;
                unit(eps, "eps")?;
                if beta + eps > 1.0 {
                    return Err(ChannelError::ParameterOutOfRange(format!(
                        "beta+eps={}",
                        beta + eps
                    )));
                }
                Ok(())
            }
            ChannelModel::Spbc { pos } => {
                if pos == 0 {
                    return Err(ChannelError::ParameterOutOfRange("pos=0".into()));
                }
                Ok(())
            }
            ChannelModel::Rbc { l, b } => {
                if l == 0 || b == 0 {
                    return Err(ChannelError::ParameterOutOfRange(format!("l={l},b={b}")));
                }
                Ok(())
            }
        }
    }

    pub fn is_burst(&self) -> bool {
        matches!(self, ChannelModel::Spbc { .. } | ChannelModel::Rbc { .. })
    }

    /// Passes a codeword through a symbol channel. `None` marks an erasure.
    /// Burst channels are not symbol channels and panic here.
    pub fn transmit<R: Rng>(&self, rng: &mut R, q: u32, x: &[Sym]) -> Vec<Option<Sym>> {
        match *self {
            ChannelModel::Qec { eps } | ChannelModel::Bec { eps } => x
                .iter()
                .map(|&v| {
                    if rng.gen::<f64>() < eps {
                        None
                    } else {
                        Some(v)
                    }
                })
                .collect(),
            ChannelModel::Qsc { beta, .. } => x
                .iter()
                .map(|&v| Some(corrupt(rng, q, v, beta)))
                .collect(),
            ChannelModel::Qsce { beta, eps, .. } => x
                .iter()
                .map(|&v| {
                    let r = rng.gen::<f64>();
                    if r < eps {
                        None
                    } else if r < eps + beta {
                        Some(other_symbol(rng, q, v))
                    } else {
                        Some(v)
                    }
                })
                .collect(),
            ChannelModel::Spbc { .. } | ChannelModel::Rbc { .. } => {
                panic!("burst channels erase node ranges, not symbol streams")
            }
        }
    }

    /// The erased variable-node index span `[start, end)` for a burst channel
    /// on an L-position, M-nodes-per-position code. Panics on symbol channels.
    pub fn burst_span<R: Rng>(&self, rng: &mut R, l_positions: u32, m: u32) -> (usize, usize) {
        let total = (l_positions as usize) * (m as usize);
        match *self {
            ChannelModel::Spbc { pos } => {
                assert!(pos >= 1 && pos <= l_positions, "burst position out of range");
                let start = (pos as usize - 1) * m as usize;
                (start, start + m as usize)
            }
            ChannelModel::Rbc { l, b } => {
                assert!(l >= 1 && l <= l_positions, "burst position out of range");
                let offset = rng.gen_range(0..m) as usize;
                let start = (l as usize - 1) * m as usize + offset;
                (start, (start + b as usize).min(total))
            }
            _ => panic!("not a burst channel"),
        }
    }
}

fn corrupt<R: Rng>(rng: &mut R, q: u32, v: Sym, beta: f64) -> Sym {
    if rng.gen::<f64>() < beta {
        other_symbol(rng, q, v)
    } else {
        v
    }
}

/// Uniform over the q-1 symbols different from v.
fn other_symbol<R: Rng>(rng: &mut R, q: u32, v: Sym) -> Sym {
    let r = rng.gen_range(0..q - 1);
    if r >= v {
        r + 1
    } else {
        r
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Qec { eps } => write!(f, "qec:{eps}"),
            ChannelModel::Qsc { beta, .. } => write!(f, "qsc:{beta}"),
            ChannelModel::Qsce { beta, eps, .. } => {
                write!(f, "qsce:beta={beta},eps={eps}")
            }
            ChannelModel::Bec { eps } => write!(f, "bec:{eps}"),
            ChannelModel::Spbc { pos } => write!(f, "spbc:pos={pos}"),
            ChannelModel::Rbc { l, b } => write!(f, "rbc:l={l},b={b}"),
        }
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Capacity of the symmetric-with-erasures channel in symbols per use
/// (logarithms base q). With eps = 0 this is the plain symmetric-channel
/// capacity 1 - H_q(beta) - beta log_q(q - 1).
pub fn qsce_capacity(q: u32, beta: f64, eps: f64) -> Result<f64, ChannelError> {
    ChannelModel::Qsce { beta, eps, q: Some(q) }.validate()?;
    if q < 2 {
        return Err(ChannelError::ParameterOutOfRange(format!("q={q}")));
    }
    let lq = (q as f64).ln();
    let c = (1.0 - eps) - xlogx(1.0 - eps) / lq
        + xlogx(1.0 - eps - beta) / lq
        + xlogx(beta) / lq
        - beta * ((q - 1) as f64).ln() / lq;
    Ok(c)
}

pub fn qsc_capacity(q: u32, beta: f64) -> Result<f64, ChannelError> {
    qsce_capacity(q, beta, 0.0)
}

/// Largest error probability beta at which the symmetric channel still has
/// capacity `rate`: the Shannon limit for rate-`rate` codes. Bisection to
/// within 1e-6 on the monotone stretch beta in [0, (q-1)/q].
pub fn qsc_shannon_limit(q: u32, rate: f64) -> Result<f64, ChannelError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(ChannelError::NoSolution { rate });
    }
    let (mut lo, mut hi) = (0.0, (q - 1) as f64 / q as f64);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if qsc_capacity(q, mid)? > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
