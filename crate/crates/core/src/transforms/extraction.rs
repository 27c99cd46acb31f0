//! Greedy blocks of large submeasure inside shrinking balls.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{serde_coord, serde_q, Coord, Q};
use crate::sequence::cluster::{AnalysisParams, Evaluator};
use crate::sequence::{within, SequenceSpec};
use crate::submeasure::Lscsm;

use super::{apply, IndexMap, SubTail, SubsequenceMap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionBlock {
    /// Radius index, largest radius first.
    pub radius: usize,
    #[serde(with = "serde_coord")]
    pub eps: Coord,
    pub members: Vec<u64>,
    #[serde(with = "serde_q")]
    pub phi: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractionCertificate {
    #[serde(with = "serde_q")]
    pub q: Q,
    pub blocks: Vec<ExtractionBlock>,
    /// Smallest mass of the witness index set inside a ball, past the previous block.
    #[serde(with = "serde_q")]
    pub recomputed_u: Q,
    /// Every member lies in its ball.
    pub distances_ok: bool,
    pub separated: bool,
}

impl ExtractionCertificate {
    pub fn valid(&self) -> bool {
        self.distances_ok && self.separated && self.blocks.iter().all(|b| b.phi >= self.q) && self.recomputed_u >= self.q
    }
}

/// Picks `F_k` inside the ball of radius index `k` around `ell` in `sigma(x)`,
/// each starting past the previous one and carrying mass at least `q`; the
/// union enumerates a subsequence converging to `ell`.
pub fn limit_witness_extraction(
    x: &SequenceSpec,
    sigma: Arc<dyn IndexMap>,
    ell: &[Coord],
    q: &Q,
    phi: &Lscsm,
    params: &AnalysisParams,
) -> Result<(SubsequenceMap, ExtractionCertificate)> {
    let y = apply(sigma, x)?;
    let ev = Evaluator::new(&y, params)?;
    let horizon = y.usable_horizon(params.horizon);
    let mut blocks: Vec<ExtractionBlock> = Vec::new();
    let mut sets = Vec::new();
    let mut after = 0;
    for (k, eps) in params.schedule.radii().iter().enumerate() {
        let a = ev.indicator(ell, eps)?;
        let limit = a.known_horizon().map_or(horizon, |h| h.min(horizon));
        let mut acc = phi.accumulator_to(q);
        let mut members = Vec::new();
        let mut cur = after;
        while !acc.reached() {
            let Some(n) = a.next_member(cur, limit)? else {
                return Err(Error::MassUnavailable { k: k + 1 });
            };
            acc.push(n);
            members.push(n);
            cur = n;
        }
        after = cur;
        blocks.push(ExtractionBlock { radius: k, eps: *eps, phi: phi.phi_exact_members(&members), members });
        sets.push(a);
    }
    let tau: Vec<u64> = blocks.iter().flat_map(|b| b.members.iter().copied()).collect();
    let mut distances_ok = true;
    for b in &blocks {
        for &n in &b.members {
            distances_ok &= within(&y.point(n)?, ell, &b.eps);
        }
    }
    let separated = blocks.windows(2).all(|p| p[1].members[0] > *p[0].members.last().expect("blocks are nonempty"));
    let mut recomputed_u: Option<Q> = None;
    for (k, a) in sets.iter().enumerate() {
        let floor = if k == 0 { 0 } else { *blocks[k - 1].members.last().expect("blocks are nonempty") };
        let inside: Vec<u64> = tau.iter().copied().filter(|&n| n > floor && a.member(n).is_true()).collect();
        let v = phi.phi_exact_members(&inside);
        recomputed_u = Some(recomputed_u.map_or(v.clone(), |u: Q| u.min(v)));
    }
    let cert = ExtractionCertificate {
        q: q.clone(),
        blocks,
        recomputed_u: recomputed_u.unwrap_or_default(),
        distances_ok,
        separated,
    };
    Ok((SubsequenceMap::new(tau, SubTail::Unfinished)?, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::sequence::zoo;

    fn ident() -> Arc<dyn IndexMap> {
        Arc::new(SubsequenceMap::identity())
    }

    #[test]
    fn evens_near_one() {
        let x = zoo::sequence("char:evens").unwrap();
        let (tau, cert) =
            limit_witness_extraction(&x, ident(), &[Coord::from_integer(1)], &q(1, 4), &Lscsm::RunningDensity, &AnalysisParams::default()).unwrap();
        assert!(cert.valid(), "{cert:?}");
        assert!(tau.table().iter().all(|n| n % 2 == 0));
        assert_eq!(cert.blocks[0].members, vec![2]);
        assert_eq!(cert.blocks.len(), 10);
    }

    #[test]
    fn harmonic_near_zero() {
        let (_, cert) = limit_witness_extraction(
            &zoo::harmonic(),
            ident(),
            &[Coord::from_integer(0)],
            &q(1, 2),
            &Lscsm::RunningDensity,
            &AnalysisParams::default(),
        )
        .unwrap();
        assert!(cert.valid());
        for b in &cert.blocks {
            assert!(b.members.windows(2).all(|p| p[1] == p[0] + 1));
        }
    }

    #[test]
    fn powers_of_two_run_out_of_mass() {
        let x = zoo::sequence("char:powers2").unwrap();
        let r = limit_witness_extraction(&x, ident(), &[Coord::from_integer(1)], &q(1, 4), &Lscsm::RunningDensity, &AnalysisParams::default());
        assert!(matches!(r, Err(Error::MassUnavailable { k: 3 })));
    }
}
