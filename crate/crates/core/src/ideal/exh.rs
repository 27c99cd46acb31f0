use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::meager::intervals::{CertRule, IotaGenerator, WitnessIntervals};
use crate::natset::NatSet;
use crate::rational::{fmt_q, Q};
use crate::submeasure::{Lscsm, WeightLaw};

use super::{verdict_from_estimate, DecideParams, Decision, Ideal};

/// `{A : ‖A‖ = 0}` for a normalized submeasure.
#[derive(Debug)]
pub struct ExhIdeal {
    name: String,
    lscsm: Lscsm,
}

impl ExhIdeal {
    pub fn new(name: impl Into<String>, lscsm: Lscsm) -> Result<Self> {
        lscsm.validate()?;
        if let Lscsm::WeightedSum { law, .. } = &lscsm {
            if law.summable() {
                return Err(Error::InvalidParameter(
                    "summable total weight gives the full power set, not an ideal".into(),
                ));
            }
        }
        Ok(ExhIdeal { name: name.into(), lscsm: lscsm.normalized() })
    }

    /// Blocks `[iota_n, iota_{n+1})` with certified mass at least `q`, greedily
    /// from `iota_1 = 1`, until the horizon.
    fn phi_block_search(&self, q: &Q, horizon: u64) -> Result<WitnessIntervals> {
        let mut iotas = vec![1u64];
        let mut start = 1u64;
        'blocks: while start <= horizon {
            let mut acc = self.lscsm.accumulator_to(q);
            let mut m = start;
            while m <= horizon {
                acc.push(m);
                m += 1;
                if acc.reached() {
                    iotas.push(m);
                    start = m;
                    continue 'blocks;
                }
            }
            break;
        }
        if iotas.len() < 2 {
            return Err(Error::BlockSearchExceeded { q: fmt_q(q), horizon });
        }
        let long = self.lscsm.singleton_floor(q).map(|floor| {
            let idx = iotas.partition_point(|&i| i < floor);
            idx as u64 + 1
        });
        Ok(WitnessIntervals::from_table(CertRule::PhiBlock, q.clone(), self.name.clone(), iotas, horizon)?
            .with_long_blocks_from(long))
    }
}

impl Ideal for ExhIdeal {
    fn name(&self) -> &str {
        &self.name
    }

    fn lscsm(&self) -> Option<&Lscsm> {
        Some(&self.lscsm)
    }

    fn decide(&self, s: &NatSet, params: &DecideParams) -> Result<Decision> {
        let e = self.norm_estimate(s, params)?;
        Ok(verdict_from_estimate(&e, &params.theta))
    }

    fn build_witness(&self, q: &Q, horizon: u64) -> Result<WitnessIntervals> {
        if *q <= Q::zero() || *q >= Q::one() {
            return Err(Error::InvalidParameter("witness mass must lie in (0,1)".into()));
        }
        match self.lscsm {
            Lscsm::RunningDensity => {
                let g = IotaGenerator::DensityRatio { first: 2, q: q.clone() };
                let w = WitnessIntervals::closed_form(CertRule::DensityRatio, q.clone(), self.name.clone(), g, horizon)?;
                // blocks past 1/q hold at least two integers
                let floor = self.lscsm.singleton_floor(q).unwrap_or(u64::MAX);
                let long = (1u64..).find(|&n| w.iota(n).is_none_or(|i| i >= floor)).unwrap_or(1);
                if w.iota(2).is_none_or(|i| i > horizon.max(2)) {
                    return Err(Error::BlockSearchExceeded { q: fmt_q(q), horizon });
                }
                Ok(w.with_long_blocks_from(Some(long)))
            }
            _ => self.phi_block_search(q, horizon),
        }
    }

    fn certifies(&self, w: &WitnessIntervals) -> bool {
        if w.q0().is_zero() {
            return false;
        }
        match w.rule() {
            CertRule::PhiBlock => w.ideal() == self.name,
            // harmonic mass of a block is at least its length over its right end
            CertRule::DensityRatio => match &self.lscsm {
                Lscsm::RunningDensity => true,
                Lscsm::WeightedSum { law: WeightLaw::Harmonic, scale, .. } => *scale >= Q::one(),
                _ => false,
            },
            CertRule::RowCoverage => false,
        }
    }
}
