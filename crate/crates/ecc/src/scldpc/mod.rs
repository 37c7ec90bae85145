//! Spatially coupled LDPC ensembles on erasure channels: graph sampling,
//! peeling decoding, small stopping-set counting, and the closed-form
//! failure bounds that predict burst performance.
//!
//! A code places M degree-dv variable nodes at each of L spatial positions.
//! Each VN spreads its edges over check nodes at its own position and the
//! next w-1; CNs have dc sockets each, so positions carry M*dv/dc of them,
//! and the w-1 trailing positions exist for boundary edges.

pub mod bounds;
pub mod census;
pub mod graph;
pub mod peel;

pub use bounds::{
    error_floor, n2h_mean, p_min_pattern, p_size2, p_vector, rbc_bound, report, spbc_bound,
    BoundReport, PForm,
};
pub use census::{count_min_patterns, count_size2, Size2Census};
pub use graph::{expurgate, sample_graph, TannerGraph};
pub use peel::peel;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScldpcError {
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),
    #[error("sampling stalled after {attempts} restarts; parameters too tight")]
    SamplingStall { attempts: u32 },
    #[error("{0}")]
    Unsupported(String),
    #[error("bad graph file: {0}")]
    ParseGraph(String),
}

/// Ensemble flavors. `Random` matches sockets without multi-edges; `Poisson`
/// drops the socket limit (CN degrees become unbounded); `MultiEdge` keeps
/// sockets but allows repeated pairs; `Expurgated` additionally repairs the
/// graph to girth >= 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Random,
    Poisson,
    RandomMultiedge,
    Expurgated,
}

impl FromStr for Flavor {
    type Err = ScldpcError;
    fn from_str(s: &str) -> Result<Flavor, ScldpcError> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Flavor::Random),
            "poisson" => Ok(Flavor::Poisson),
            "random-multiedge" => Ok(Flavor::RandomMultiedge),
            "expurgated" => Ok(Flavor::Expurgated),
            other => Err(ScldpcError::ParseGraph(format!("unknown flavor `{other}`"))),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Random => "random",
            Flavor::Poisson => "poisson",
            Flavor::RandomMultiedge => "random-multiedge",
            Flavor::Expurgated => "expurgated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub dv: u32,
    pub dc: u32,
    pub w: u32,
    pub l: u32,
    pub m: u32,
    pub flavor: Flavor,
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<(), ScldpcError> {
        let &EnsembleParams { dv, dc, w, l, m, .. } = self;
        if dv < 3 {
            return Err(ScldpcError::InvalidParams(format!("dv = {dv} < 3")));
        }
        if w <= 1 {
            return Err(ScldpcError::InvalidParams(format!("w = {w} <= 1")));
        }
        if l == 0 || m == 0 {
            return Err(ScldpcError::InvalidParams("L and M must be positive".into()));
        }
        if (m as u64 * dv as u64) % dc as u64 != 0 {
            return Err(ScldpcError::InvalidParams(format!(
                "M*dv = {} not divisible by dc = {dc}",
                m as u64 * dv as u64
            )));
        }
        if (w as u64 * m as u64) <= 2 * (dv as u64 + 1) * dc as u64 {
            return Err(ScldpcError::InvalidParams(format!(
                "wM = {} must exceed 2(dv+1)dc = {}",
                w as u64 * m as u64,
                2 * (dv as u64 + 1) * dc as u64
            )));
        }
        Ok(())
    }

    /// CNs per spatial position.
    pub fn cn_per_pos(&self) -> u32 {
        self.m * self.dv / self.dc
    }

    pub fn n_vn(&self) -> u32 {
        self.l * self.m
    }

    /// CN positions run to L+w-1; the trailing ones catch boundary edges.
    pub fn n_cn(&self) -> u32 {
        (self.l + self.w - 1) * self.cn_per_pos()
    }

    pub fn code_rate(&self) -> f64 {
        1.0 - (self.n_cn() as f64) / (self.n_vn() as f64)
    }
}
