//! Ideals on the positive integers, selected by name at run time.

mod exh;
mod fin;
mod fin_x_fin;
pub mod registry;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meager::intervals::WitnessIntervals;
use crate::natset::NatSet;
use crate::rational::{q, serde_q, Q};
use crate::submeasure::{default_cuts, Lscsm, NormEstimate, Trend};

pub use exh::ExhIdeal;
pub use fin::FinIdeal;
pub use fin_x_fin::FinTimesFin;
pub use registry::{builtin, builtin_with, IdealInfo, IdealRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    In,
    NotIn,
    Undecided,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::In => "in",
            Membership::NotIn => "not-in",
            Membership::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialRule {
    FinTimesFin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideParams {
    pub horizon: u64,
    #[serde(with = "serde_q")]
    pub theta: Q,
    /// Tail cut points; `None` uses [`default_cuts`].
    #[serde(default)]
    pub cuts: Option<Vec<u64>>,
    /// Hits needed in `(N/2, N]` before a bitmap counts as infinite.
    pub hit_min: u64,
}

impl Default for DecideParams {
    fn default() -> Self {
        DecideParams { horizon: 1 << 20, theta: q(1, 100), cuts: None, hit_min: 16 }
    }
}

impl DecideParams {
    pub fn with_horizon(horizon: u64) -> Self {
        DecideParams { horizon, ..Default::default() }
    }

    pub fn cuts_for(&self, n: u64) -> Vec<u64> {
        match &self.cuts {
            Some(c) if c.last().is_some_and(|&t| t < n) => c.clone(),
            _ => default_cuts(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::InvalidParameter("horizon must be at least 2".into()));
        }
        if self.theta <= q(0, 1) {
            return Err(Error::InvalidParameter("theta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub verdict: Membership,
    /// Absent for ideals without a submeasure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<NormEstimate>,
    pub reason: String,
}

impl Decision {
    pub fn new(verdict: Membership, reason: impl Into<String>) -> Self {
        Decision { verdict, estimate: None, reason: reason.into() }
    }
}

pub trait Ideal: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Present exactly for analytic P-ideals.
    fn lscsm(&self) -> Option<&Lscsm>;

    fn special_rule(&self) -> Option<SpecialRule> {
        None
    }

    fn norm_estimate(&self, s: &NatSet, params: &DecideParams) -> Result<NormEstimate> {
        let m = self.lscsm().ok_or_else(|| Error::NotAnalyticP(self.name().to_string()))?;
        let n = params.horizon;
        m.norm_estimate(s, n, &params.cuts_for(n), &|w| self.certifies(w))
    }

    fn decide(&self, s: &NatSet, params: &DecideParams) -> Result<Decision>;

    fn build_witness(&self, q: &Q, horizon: u64) -> Result<WitnessIntervals>;

    /// Every set containing infinitely many blocks of `w` lies outside the ideal.
    fn certifies(&self, w: &WitnessIntervals) -> bool;
}

pub type IdealHandle = Arc<dyn Ideal>;

/// Verdict from a norm estimate: certified values first, then the trend rule.
pub fn verdict_from_estimate(e: &NormEstimate, theta: &Q) -> Decision {
    use num_traits::Zero;
    let (verdict, reason) = if let Some(x) = &e.exact {
        if x.is_zero() {
            (Membership::In, "exact norm 0")
        } else {
            (Membership::NotIn, "exact norm positive")
        }
    } else if e.certified_lower.as_ref().is_some_and(|l| !l.is_zero()) {
        (Membership::NotIn, "witness blocks certify a positive norm")
    } else if e.numeric < *theta && e.trend == Trend::Decaying {
        (Membership::In, "tail estimate below theta and decaying")
    } else if e.numeric >= *theta && e.trend == Trend::Stable {
        (Membership::NotIn, "tail estimate at least theta and stable")
    } else {
        (Membership::Undecided, "tail estimate inconclusive")
    };
    Decision { verdict, estimate: Some(e.clone()), reason: reason.into() }
}
