use crate::error::{Error, Result};
use crate::meager::intervals::{CertRule, IotaGenerator, WitnessIntervals};
use crate::natset::{nu2, NatSet, Periodic, SetNode, Tri};
use crate::rational::{q_int, Q};
use crate::submeasure::{Lscsm, NormEstimate};

use super::{DecideParams, Decision, Ideal, Membership, SpecialRule};

/// Sets meeting only finitely many 2-adic rows `{n : ν₂(n) = r}` in an
/// infinite set. Not a P-ideal, so there is no submeasure.
#[derive(Debug, Default)]
pub struct FinTimesFin;

/// Row verdict for `{first + j*step}`: a single row when `ν₂(first)` is below
/// the power of two in `step`, every row from that power on otherwise.
pub fn progression_rows(first: u64, step: u64) -> Membership {
    if nu2(first) < nu2(step) {
        Membership::In
    } else {
        Membership::NotIn
    }
}

fn periodic_rows(p: &Periodic) -> Membership {
    let e = nu2(p.period);
    let mask = (1u64 << e) - 1;
    let hits_deep_row = p
        .residues
        .iter()
        .enumerate()
        .any(|(i, &m)| m && (p.offset + i as u64) & mask == 0);
    if hits_deep_row {
        Membership::NotIn
    } else {
        Membership::In
    }
}

fn block_lengths_unbounded(w: &WitnessIntervals) -> bool {
    matches!(w.generator(), IotaGenerator::RowCoverage | IotaGenerator::DensityRatio { .. })
}

impl FinTimesFin {
    pub fn rows(&self, s: &NatSet) -> (Membership, &'static str) {
        if s.is_infinite() == Tri::False {
            return (Membership::In, "finite");
        }
        if let Some(p) = s.periodic_form() {
            return (periodic_rows(&p), "periodic row analysis");
        }
        match s.node() {
            SetNode::PowersOf { .. } => (Membership::In, "at most one infinite row"),
            SetNode::Progression { first, step } => (progression_rows(*first, *step), "progression rows"),
            SetNode::BlockUnion { blocks, selector } => {
                // a block of length 2^{r+1} meets row r
                if selector.is_infinite().is_true() && block_lengths_unbounded(blocks) {
                    (Membership::NotIn, "infinitely many blocks cover every row")
                } else {
                    (Membership::Undecided, "block union outside the row fragment")
                }
            }
            SetNode::Union(a, b) => match (self.rows(a).0, self.rows(b).0) {
                (Membership::NotIn, _) | (_, Membership::NotIn) => (Membership::NotIn, "union with a non-member"),
                (Membership::In, Membership::In) => (Membership::In, "union of members"),
                _ => (Membership::Undecided, "union outside the row fragment"),
            },
            SetNode::Intersection(a, b) => {
                if self.rows(a).0 == Membership::In || self.rows(b).0 == Membership::In {
                    (Membership::In, "subset of a member")
                } else {
                    (Membership::Undecided, "intersection outside the row fragment")
                }
            }
            _ => (Membership::Undecided, "outside the row fragment"),
        }
    }
}

impl Ideal for FinTimesFin {
    fn name(&self) -> &str {
        "fin-x-fin"
    }

    fn lscsm(&self) -> Option<&Lscsm> {
        None
    }

    fn special_rule(&self) -> Option<SpecialRule> {
        Some(SpecialRule::FinTimesFin)
    }

    fn norm_estimate(&self, _s: &NatSet, _params: &DecideParams) -> Result<NormEstimate> {
        Err(Error::NotAnalyticP(self.name().into()))
    }

    fn decide(&self, s: &NatSet, _params: &DecideParams) -> Result<Decision> {
        let (v, why) = self.rows(s);
        Ok(Decision::new(v, why))
    }

    fn build_witness(&self, _q: &Q, horizon: u64) -> Result<WitnessIntervals> {
        WitnessIntervals::closed_form(CertRule::RowCoverage, q_int(1), "fin-x-fin", IotaGenerator::RowCoverage, horizon)
    }

    fn certifies(&self, w: &WitnessIntervals) -> bool {
        block_lengths_unbounded(w)
    }
}
