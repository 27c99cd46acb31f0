use crate::error::Result;
use crate::meager::intervals::{CertRule, IotaGenerator, WitnessIntervals};
use crate::natset::{NatSet, Tri};
use crate::rational::{q_int, Q};
use crate::submeasure::{Lscsm, NormEstimate, Trend, CutValue};

use super::{DecideParams, Decision, Ideal, Membership};

/// Finite sets.
#[derive(Debug)]
pub struct FinIdeal {
    lscsm: Lscsm,
}

impl FinIdeal {
    pub fn new() -> Self {
        FinIdeal { lscsm: Lscsm::CountingCap }
    }
}

impl Default for FinIdeal {
    fn default() -> Self {
        Self::new()
    }
}

/// Hits of `s` in `(n/2, n]`, with `n` clipped to what `s` can answer.
pub fn tail_hits(s: &NatSet, n: u64) -> Result<(u64, u64)> {
    let n = match s.known_horizon() {
        Some(h) if h < n => h,
        _ => n,
    };
    let bits = s.window(n / 2 + 1, n)?;
    Ok((bits.count_ones() as u64, n))
}

/// Finite-horizon reading of "infinite": at least `hit_min` members in the
/// upper half of the horizon, none at all, or too few to say.
pub fn hit_rule(hits: u64, hit_min: u64) -> Membership {
    if hits >= hit_min {
        Membership::NotIn
    } else if hits == 0 {
        Membership::In
    } else {
        Membership::Undecided
    }
}

impl Ideal for FinIdeal {
    fn name(&self) -> &str {
        "fin"
    }

    fn lscsm(&self) -> Option<&Lscsm> {
        Some(&self.lscsm)
    }

    fn norm_estimate(&self, s: &NatSet, params: &DecideParams) -> Result<NormEstimate> {
        let (hits, n) = tail_hits(s, params.horizon)?;
        let exact = match s.is_infinite() {
            Tri::True => Some(q_int(1)),
            Tri::False => Some(q_int(0)),
            Tri::Unknown => None,
        };
        let v = q_int(hits.min(1));
        Ok(NormEstimate {
            exact,
            certified_lower: None,
            numeric: v.clone(),
            horizon: n,
            cuts: vec![CutValue { cut: n / 2, lo: v.clone(), hi: v }],
            trend: if hits == 0 { Trend::Decaying } else { Trend::Stable },
        })
    }

    fn decide(&self, s: &NatSet, params: &DecideParams) -> Result<Decision> {
        let d = match s.is_infinite() {
            Tri::True => Decision::new(Membership::NotIn, "infinite by structure"),
            Tri::False => Decision::new(Membership::In, "finite by structure"),
            Tri::Unknown => {
                let (hits, n) = tail_hits(s, params.horizon)?;
                Decision::new(hit_rule(hits, params.hit_min), format!("{hits} hits in ({}, {n}]", n / 2))
            }
        };
        Ok(Decision { estimate: Some(self.norm_estimate(s, params)?), ..d })
    }

    fn build_witness(&self, _q: &Q, horizon: u64) -> Result<WitnessIntervals> {
        WitnessIntervals::closed_form(CertRule::PhiBlock, q_int(1), "fin", IotaGenerator::Singletons, horizon)
    }

    fn certifies(&self, w: &WitnessIntervals) -> bool {
        // every block is nonempty
        let _ = w;
        true
    }
}
