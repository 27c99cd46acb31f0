//! Witness-driven constructions of subsequences and rearrangements.
//!
//! Witness blocks are filled with members of prescribed index sets; every
//! other position takes the smallest admissible integer.

use std::sync::Arc;

use bitvec::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{FinIdeal, Ideal, Membership};
use crate::meager::intervals::WitnessIntervals;
use crate::natset::{BlockSelector, NatSet, Tri};
use crate::rational::{q, serde_coord, serde_coord_vec, serde_q, serde_q_opt, Coord, Q};
use crate::sequence::cluster::{gamma_estimate, limit_points_estimate, snap, AnalysisParams, Class, ClusterReport, Evaluator};
use crate::sequence::{fmt_point, Point, SequenceSpec};

use super::{PermutationMap, SubTail, SubsequenceMap};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildParams {
    pub analysis: AnalysisParams,
    /// Mass parameter handed to the ideal's witness builder.
    #[serde(with = "serde_q")]
    pub witness_q: Q,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams { analysis: AnalysisParams::default(), witness_q: q(1, 2) }
    }
}

/// A witness block written from one target set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FilledBlock {
    pub block: u64,
    pub start: u64,
    /// Exclusive.
    pub end: u64,
    pub target: usize,
    /// Index into the radius schedule, largest radius first.
    pub radius: usize,
}

/// The claim that the preimage of a target ball contains the selected witness
/// blocks, with the ideal's verdict on that block union.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(with = "serde_coord_vec")]
    pub target: Point,
    #[serde(with = "serde_coord")]
    pub eps: Coord,
    pub selector: String,
    pub verdict: Membership,
    #[serde(with = "serde_q_opt")]
    pub exact: Option<Q>,
    #[serde(with = "serde_q_opt")]
    pub certified_lower: Option<Q>,
    /// Selected blocks actually written within the horizon.
    pub realized_blocks: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Preservation {
    #[serde(with = "points")]
    pub source_clusters: Vec<Point>,
    /// Source clusters whose every radius carries a NotIn certificate.
    #[serde(with = "points")]
    pub covered: Vec<Point>,
    #[serde(with = "points")]
    pub uncovered: Vec<Point>,
    /// Tail cells of the new sequence that are not source clusters.
    #[serde(with = "points")]
    pub stray: Vec<Point>,
}

impl Preservation {
    pub fn equal(&self) -> bool {
        self.uncovered.is_empty() && self.stray.is_empty()
    }
}

mod points {
    use serde::Serializer;

    use crate::sequence::{fmt_point, Point};

    pub fn serialize<S: Serializer>(v: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|p| fmt_point(p)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildAudit {
    /// Positions checked against their target set.
    pub positions_checked: u64,
    /// Blocks with a position outside its target set.
    pub block_failures: Vec<u64>,
    pub certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preservation: Option<Preservation>,
}

impl BuildAudit {
    pub fn passed(&self) -> bool {
        self.block_failures.is_empty()
            && self.certificates.iter().all(|c| c.verdict == Membership::NotIn)
            && self.preservation.as_ref().is_none_or(Preservation::equal)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaBuild {
    pub map: SubsequenceMap,
    pub witness: WitnessIntervals,
    pub blocks: Vec<FilledBlock>,
    pub audit: BuildAudit,
}

#[derive(Clone, Debug, Serialize)]
pub struct PermutationBuild {
    pub map: PermutationMap,
    pub witness: WitnessIntervals,
    pub blocks: Vec<FilledBlock>,
    pub audit: BuildAudit,
}

/// Which target set and radius a block draws from; `None` leaves a gap.
type Plan<'a> = dyn Fn(u64) -> Option<(usize, usize)> + 'a;

fn set_limit(s: &NatSet, horizon: u64) -> u64 {
    s.known_horizon().map_or(horizon, |h| h.min(horizon))
}

fn fill_sigma(w: &WitnessIntervals, horizon: u64, sets: &[Vec<NatSet>], plan: &Plan) -> Result<(Vec<u64>, Vec<FilledBlock>)> {
    let first = w.iota(1).ok_or_else(|| Error::InvalidParameter("witness has no blocks".into()))?;
    let mut table: Vec<u64> = (1..first.min(horizon + 1)).collect();
    let mut prev = table.last().copied().unwrap_or(0);
    let mut filled = Vec::new();
    for k in 1u64.. {
        let Some((s, e)) = w.block(k) else { break };
        if s != table.len() as u64 + 1 {
            break;
        }
        let len = e - s;
        match plan(k) {
            None => {
                if prev + len > horizon {
                    break;
                }
                table.extend(prev + 1..=prev + len);
                prev += len;
            }
            Some((t, r)) => {
                let a = &sets[t][r];
                let lim = set_limit(a, horizon);
                let mut vals = Vec::with_capacity(len.min(1 << 20) as usize);
                let mut cur = prev;
                while (vals.len() as u64) < len {
                    match a.next_member(cur, lim)? {
                        Some(v) => {
                            vals.push(v);
                            cur = v;
                        }
                        None => break,
                    }
                }
                if (vals.len() as u64) < len {
                    break;
                }
                table.extend(vals);
                prev = cur;
                filled.push(FilledBlock { block: k, start: s, end: e, target: t, radius: r });
            }
        }
    }
    Ok((table, filled))
}

struct Unused {
    used: BitVec,
    low: u64,
    max_used: u64,
}

impl Unused {
    fn new(horizon: u64) -> Self {
        Unused { used: bitvec![0; horizon as usize + 1], low: 1, max_used: 0 }
    }

    fn is_used(&self, v: u64) -> bool {
        self.used[v as usize]
    }

    fn take(&mut self, v: u64) {
        self.used.set(v as usize, true);
        self.max_used = self.max_used.max(v);
        while (self.low as usize) < self.used.len() && self.used[self.low as usize] {
            self.low += 1;
        }
    }

    fn smallest(&self) -> Option<u64> {
        ((self.low as usize) < self.used.len()).then_some(self.low)
    }

    fn remaining(&self) -> u64 {
        (self.used.len() as u64 - 1) - self.used[1..].count_ones() as u64
    }
}

fn fill_pi(w: &WitnessIntervals, horizon: u64, sets: &[Vec<NatSet>], plan: &Plan) -> Result<(Vec<u64>, Vec<FilledBlock>)> {
    let first = w.iota(1).ok_or_else(|| Error::InvalidParameter("witness has no blocks".into()))?;
    let mut pool = Unused::new(horizon);
    let mut table = Vec::new();
    for v in 1..first.min(horizon + 1) {
        pool.take(v);
        table.push(v);
    }
    // all members of a set below its cursor are already placed
    let mut cursors: Vec<Vec<u64>> = sets.iter().map(|row| vec![0; row.len()]).collect();
    let mut filled = Vec::new();
    for k in 1u64.. {
        let Some((s, e)) = w.block(k) else { break };
        if s != table.len() as u64 + 1 {
            break;
        }
        let len = e - s;
        match plan(k) {
            None => {
                if pool.remaining() < len {
                    break;
                }
                for _ in 0..len {
                    let v = pool.smallest().expect("counted above");
                    pool.take(v);
                    table.push(v);
                }
            }
            Some((t, r)) => {
                let a = &sets[t][r];
                let lim = set_limit(a, horizon);
                let mut vals = Vec::new();
                let mut cur = cursors[t][r];
                let mut advancing = true;
                while (vals.len() as u64) < len {
                    let Some(v) = a.next_member(cur, lim)? else { break };
                    cur = v;
                    if pool.is_used(v) {
                        if advancing {
                            cursors[t][r] = v;
                        }
                        continue;
                    }
                    advancing = false;
                    vals.push(v);
                }
                if (vals.len() as u64) < len {
                    break;
                }
                for &v in &vals {
                    pool.take(v);
                }
                table.extend(vals);
                filled.push(FilledBlock { block: k, start: s, end: e, target: t, radius: r });
            }
        }
    }
    // integers skipped over by the blocks close the table
    for v in 1..=pool.max_used {
        if !pool.is_used(v) {
            table.push(v);
        }
    }
    Ok((table, filled))
}

fn check_blocks(table: &[u64], blocks: &[FilledBlock], sets: &[Vec<NatSet>]) -> (u64, Vec<u64>) {
    let mut checked = 0;
    let mut failures = Vec::new();
    for b in blocks {
        let a = &sets[b.target][b.radius];
        let ok = (b.start..b.end).all(|n| {
            checked += 1;
            a.member(table[n as usize - 1]) == Tri::True
        });
        if !ok {
            failures.push(b.block);
        }
    }
    (checked, failures)
}

fn exhausted(a: &NatSet, horizon: u64) -> Result<()> {
    match a.is_infinite() {
        Tri::False => {
            let at = a.members_in(1, horizon)?.last().copied().unwrap_or(0);
            Err(Error::ExhaustedA { at, horizon })
        }
        _ => match a.known_horizon() {
            Some(h) if h < horizon => Err(Error::ExhaustedA { at: h, horizon }),
            _ => Ok(()),
        },
    }
}

fn selected(selector: &BlockSelector, k: u64) -> bool {
    selector.selects(k) == Tri::True
}

fn generic_parts(a: &NatSet, w: &WitnessIntervals, selector: &BlockSelector, horizon: u64) -> Result<Vec<Vec<NatSet>>> {
    exhausted(a, horizon)?;
    if let BlockSelector::IndexSet(s) = selector {
        if s.is_infinite() == Tri::False {
            return Err(Error::InvalidParameter("selector picks finitely many blocks".into()));
        }
    }
    let _ = w;
    Ok(vec![vec![a.clone()]])
}

fn no_blocks(table: &[u64], horizon: u64) -> Error {
    Error::ExhaustedA { at: table.last().copied().unwrap_or(0), horizon }
}

/// Strictly increasing map whose preimage of `a` contains every selected
/// witness block that fits below `horizon`.
pub fn generic_subsequence(a: &NatSet, w: &WitnessIntervals, selector: &BlockSelector, horizon: u64) -> Result<SigmaBuild> {
    let sets = generic_parts(a, w, selector, horizon)?;
    let plan = |k: u64| selected(selector, k).then_some((0, 0));
    let (table, blocks) = fill_sigma(w, horizon, &sets, &plan)?;
    if blocks.is_empty() {
        return Err(no_blocks(&table, horizon));
    }
    let (positions_checked, block_failures) = check_blocks(&table, &blocks, &sets);
    Ok(SigmaBuild {
        map: SubsequenceMap::new(table, SubTail::Unfinished)?,
        witness: w.clone(),
        blocks,
        audit: BuildAudit { positions_checked, block_failures, certificates: Vec::new(), preservation: None },
    })
}

/// Bijection whose preimage of `a` contains every selected witness block;
/// the integers passed over are placed in the gaps and at the end.
pub fn generic_permutation(a: &NatSet, w: &WitnessIntervals, selector: &BlockSelector, horizon: u64) -> Result<PermutationBuild> {
    let sets = generic_parts(a, w, selector, horizon)?;
    let plan = |k: u64| selected(selector, k).then_some((0, 0));
    let (table, blocks) = fill_pi(w, horizon, &sets, &plan)?;
    if blocks.is_empty() {
        return Err(no_blocks(&table, horizon));
    }
    let (positions_checked, block_failures) = check_blocks(&table, &blocks, &sets);
    Ok(PermutationBuild {
        map: PermutationMap::from_table(table)?.simplified(),
        witness: w.clone(),
        blocks,
        audit: BuildAudit { positions_checked, block_failures, certificates: Vec::new(), preservation: None },
    })
}

fn witness_for(ideal: &dyn Ideal, w: Option<&WitnessIntervals>, params: &BuildParams) -> Result<WitnessIntervals> {
    match w {
        Some(w) => Ok(w.clone()),
        None => ideal.build_witness(&params.witness_q, params.analysis.horizon),
    }
}

/// Ball indicators around `center`, largest radius first; each must be
/// infinite at the analysis resolution.
fn ball_sets(ev: &Evaluator, center: &[Coord], params: &AnalysisParams) -> Result<Vec<NatSet>> {
    let fin = FinIdeal::new();
    let dp = params.decide_params();
    params
        .schedule
        .radii()
        .iter()
        .map(|eps| {
            let s = ev.indicator(center, eps)?;
            if fin.decide(&s, &dp)?.verdict != Membership::NotIn {
                return Err(Error::NotALimitPoint(format!("{} at radius {}", fmt_point(center), crate::rational::fmt_coord(eps))));
            }
            Ok(s)
        })
        .collect()
}

fn certificate(
    ideal: &dyn Ideal,
    w: &Arc<WitnessIntervals>,
    target: &[Coord],
    eps: &Coord,
    first: u64,
    step: u64,
    realized: u64,
    params: &AnalysisParams,
) -> Result<Certificate> {
    let sel = NatSet::progression(first, step)?;
    let set = NatSet::block_union(w.clone(), BlockSelector::IndexSet(sel))?;
    let d = ideal.decide(&set, &params.decide_params())?;
    let e = d.estimate.as_ref();
    Ok(Certificate {
        target: target.to_vec(),
        eps: *eps,
        selector: format!("blocks {first}, {}, ...", first + step),
        verdict: d.verdict,
        exact: e.and_then(|e| e.exact.clone()),
        certified_lower: e.and_then(|e| e.certified_lower.clone()),
        realized_blocks: realized,
    })
}

/// Block index `k` reduced to a slot; permutations interleave gaps.
#[derive(Clone, Copy)]
enum Layout {
    Dense,
    Interleaved,
}

impl Layout {
    fn slot(self, k: u64) -> Option<u64> {
        match self {
            Layout::Dense => Some(k),
            Layout::Interleaved => (k % 2 == 1).then_some(k.div_ceil(2)),
        }
    }

    /// Progression of block indices holding slots `first, first + step, ...`.
    fn blocks(self, first: u64, step: u64) -> (u64, u64) {
        match self {
            Layout::Dense => (first, step),
            Layout::Interleaved => (2 * first - 1, 2 * step),
        }
    }
}

struct Diagonal {
    targets: Vec<Point>,
    sets: Vec<Vec<NatSet>>,
    radii: usize,
    /// Slots per radius step: 2 for one target, the target count otherwise.
    per_step: u64,
}

impl Diagonal {
    fn assign(&self, slot: u64) -> (usize, usize) {
        let l = self.targets.len() as u64;
        let t = ((slot - 1) % l) as usize;
        let r = (slot.div_ceil(self.per_step) as usize).min(self.radii) - 1;
        (t, r)
    }

    /// First slot of target `t` at radius index `r` (0-based).
    fn first_slot(&self, t: usize, r: usize) -> u64 {
        if self.targets.len() == 1 {
            r as u64 * self.per_step + 1
        } else {
            r as u64 * self.per_step + t as u64 + 1
        }
    }

    fn step(&self) -> u64 {
        self.targets.len() as u64
    }

    fn certificates(
        &self,
        ideal: &dyn Ideal,
        w: &WitnessIntervals,
        layout: Layout,
        blocks: &[FilledBlock],
        params: &AnalysisParams,
    ) -> Result<Vec<Certificate>> {
        let w = Arc::new(w.clone());
        let mut out = Vec::new();
        for (t, p) in self.targets.iter().enumerate() {
            for (r, eps) in params.schedule.radii().iter().enumerate() {
                let (first, step) = layout.blocks(self.first_slot(t, r), self.step());
                let realized = blocks.iter().filter(|b| b.block >= first && (b.block - first) % step == 0).count() as u64;
                out.push(certificate(ideal, &w, p, eps, first, step, realized, params)?);
            }
        }
        Ok(out)
    }
}

/// Cells visited by the upper half of the table that are not clusters of the source.
fn stray_cells(x: &SequenceSpec, table: &[u64], gamma: &ClusterReport, pitch: &Coord) -> Result<Vec<Point>> {
    let mut cells = std::collections::BTreeSet::new();
    for &v in &table[table.len() / 2..] {
        cells.insert(x.point(v)?.iter().map(|c| snap(c, pitch)).collect::<Point>());
    }
    Ok(cells.into_iter().filter(|c| gamma.class_of(c) != Some(Class::Cluster)).collect())
}

fn preservation(diag: &Diagonal, certs: &[Certificate], blocks: &[FilledBlock], stray: Vec<Point>) -> Preservation {
    let mut covered = Vec::new();
    let mut uncovered = Vec::new();
    for (t, p) in diag.targets.iter().enumerate() {
        let ok = certs.iter().filter(|c| c.target == *p).all(|c| c.verdict == Membership::NotIn)
            && blocks.iter().any(|b| b.target == t);
        if ok {
            covered.push(p.clone());
        } else {
            uncovered.push(p.clone());
        }
    }
    Preservation { source_clusters: diag.targets.clone(), covered, uncovered, stray }
}

fn adding_diagonal(x: &SequenceSpec, ell: &[Coord], params: &BuildParams) -> Result<Diagonal> {
    let ev = Evaluator::new(x, &params.analysis)?;
    let sets = vec![ball_sets(&ev, ell, &params.analysis)?];
    Ok(Diagonal { targets: vec![ell.to_vec()], sets, radii: params.analysis.schedule.radii().len(), per_step: 2 })
}

/// Subsequence making `ell` an ideal cluster point: block `k` is drawn from the
/// ball of radius index `ceil(k/2)` around `ell`.
pub fn cluster_adding_sigma(
    x: &SequenceSpec,
    ell: &[Coord],
    ideal: &dyn Ideal,
    w: Option<&WitnessIntervals>,
    params: &BuildParams,
) -> Result<SigmaBuild> {
    let diag = adding_diagonal(x, ell, params)?;
    let w = witness_for(ideal, w, params)?;
    build_sigma(x, ideal, &w, &diag, params, None)
}

/// Rearrangement making `ell` an ideal cluster point.
pub fn cluster_adding_pi(
    x: &SequenceSpec,
    ell: &[Coord],
    ideal: &dyn Ideal,
    w: Option<&WitnessIntervals>,
    params: &BuildParams,
) -> Result<PermutationBuild> {
    let diag = adding_diagonal(x, ell, params)?;
    let w = witness_for(ideal, w, params)?;
    build_pi(x, ideal, &w, &diag, params, None)
}

/// Checks that ideal cluster points and limit points agree on the candidate
/// list; returns the cluster points.
fn preserving_diagonal(x: &SequenceSpec, ideal: &dyn Ideal, candidates: Option<&[Point]>, params: &BuildParams) -> Result<(Diagonal, ClusterReport)> {
    let a = &params.analysis;
    let limits = limit_points_estimate(x, a)?;
    let gamma = gamma_estimate(x, ideal, a)?;
    let mismatched: Vec<String> = gamma
        .candidates
        .iter()
        .filter(|c| c.class == Class::Undecided || limits.class_of(&c.point) != Some(c.class))
        .map(|c| fmt_point(&c.point))
        .collect();
    if !mismatched.is_empty() {
        return Err(Error::HypothesisFailed(format!(
            "cluster points and limit points differ or are undecided at {}",
            mismatched.join(" ")
        )));
    }
    let targets: Vec<Point> = match candidates {
        Some(c) => c.to_vec(),
        None => gamma.clusters().into_iter().cloned().collect(),
    };
    if targets.is_empty() {
        return Err(Error::HypothesisFailed("no cluster points to preserve".into()));
    }
    let ev = Evaluator::new(x, a)?;
    let sets = targets.iter().map(|p| ball_sets(&ev, p, a)).collect::<Result<Vec<_>>>()?;
    let per_step = if targets.len() == 1 { 2 } else { targets.len() as u64 };
    Ok((Diagonal { targets, sets, radii: a.schedule.radii().len(), per_step }, gamma))
}

/// Subsequence with the same ideal cluster points as `x`, built by visiting
/// every cluster point in turn with shrinking radii.
pub fn cluster_preserving_sigma(
    x: &SequenceSpec,
    ideal: &dyn Ideal,
    w: Option<&WitnessIntervals>,
    candidates: Option<&[Point]>,
    params: &BuildParams,
) -> Result<SigmaBuild> {
    let (diag, gamma) = preserving_diagonal(x, ideal, candidates, params)?;
    let w = witness_for(ideal, w, params)?;
    build_sigma(x, ideal, &w, &diag, params, Some(&gamma))
}

pub fn cluster_preserving_pi(
    x: &SequenceSpec,
    ideal: &dyn Ideal,
    w: Option<&WitnessIntervals>,
    candidates: Option<&[Point]>,
    params: &BuildParams,
) -> Result<PermutationBuild> {
    let (diag, gamma) = preserving_diagonal(x, ideal, candidates, params)?;
    let w = witness_for(ideal, w, params)?;
    build_pi(x, ideal, &w, &diag, params, Some(&gamma))
}

fn audit(
    x: &SequenceSpec,
    ideal: &dyn Ideal,
    w: &WitnessIntervals,
    diag: &Diagonal,
    layout: Layout,
    table: &[u64],
    blocks: &[FilledBlock],
    params: &BuildParams,
    gamma: Option<&ClusterReport>,
) -> Result<BuildAudit> {
    if blocks.is_empty() {
        return Err(no_blocks(table, params.analysis.horizon));
    }
    let (positions_checked, block_failures) = check_blocks(table, blocks, &diag.sets);
    let certificates = diag.certificates(ideal, w, layout, blocks, &params.analysis)?;
    let preservation = match gamma {
        Some(g) => {
            let stray = stray_cells(x, table, g, &params.analysis.pitch)?;
            Some(preservation(diag, &certificates, blocks, stray))
        }
        None => None,
    };
    Ok(BuildAudit { positions_checked, block_failures, certificates, preservation })
}

fn build_sigma(x: &SequenceSpec, ideal: &dyn Ideal, w: &WitnessIntervals, diag: &Diagonal, params: &BuildParams, gamma: Option<&ClusterReport>) -> Result<SigmaBuild> {
    let layout = Layout::Dense;
    let plan = |k: u64| layout.slot(k).map(|s| diag.assign(s));
    let (table, blocks) = fill_sigma(w, params.analysis.horizon, &diag.sets, &plan)?;
    let audit = audit(x, ideal, w, diag, layout, &table, &blocks, params, gamma)?;
    Ok(SigmaBuild { map: SubsequenceMap::new(table, SubTail::Unfinished)?, witness: w.clone(), blocks, audit })
}

fn build_pi(x: &SequenceSpec, ideal: &dyn Ideal, w: &WitnessIntervals, diag: &Diagonal, params: &BuildParams, gamma: Option<&ClusterReport>) -> Result<PermutationBuild> {
    let layout = Layout::Interleaved;
    let plan = |k: u64| layout.slot(k).map(|s| diag.assign(s));
    let (table, blocks) = fill_pi(w, params.analysis.horizon, &diag.sets, &plan)?;
    let audit = audit(x, ideal, w, diag, layout, &table, &blocks, params, gamma)?;
    Ok(PermutationBuild { map: PermutationMap::from_table(table)?.simplified(), witness: w.clone(), blocks, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::builtin;
    use crate::meager::intervals::{CertRule, IotaGenerator};
    use crate::rational::{dyadic, q_int};
    use crate::sequence::cluster::RadiusSchedule;
    use crate::sequence::zoo;
    use crate::transforms::IndexMap;

    fn z_witness(horizon: u64) -> WitnessIntervals {
        builtin("density-zero").unwrap().build_witness(&q(1, 2), horizon).unwrap()
    }

    fn fin_witness(horizon: u64) -> WitnessIntervals {
        WitnessIntervals::closed_form(CertRule::PhiBlock, q_int(1), "fin", IotaGenerator::Singletons, horizon).unwrap()
    }

    fn pt(n: i64) -> Point {
        vec![Coord::from_integer(n)]
    }

    fn small_params() -> BuildParams {
        let mut p = BuildParams::default();
        p.analysis.horizon = 1 << 14;
        p.analysis.schedule = RadiusSchedule::dyadic(4);
        p.analysis.pitch = dyadic(4);
        p
    }

    #[test]
    fn generic_subsequence_into_powers_of_two() {
        let a = NatSet::powers_of(2).unwrap();
        let w = z_witness(1 << 16);
        let b = generic_subsequence(&a, &w, &BlockSelector::All, 1 << 16).unwrap();
        assert!(b.audit.passed());
        assert_eq!(b.blocks.len(), 3);
        assert_eq!(&b.map.table()[..7], &[1, 2, 4, 8, 16, 32, 64]);
        assert!(b.map.table().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn generic_subsequence_examples() {
        let evens = NatSet::progression(2, 2).unwrap();
        let b = generic_subsequence(&evens, &fin_witness(200), &BlockSelector::All, 200).unwrap();
        assert!(b.map.table().iter().enumerate().all(|(i, &v)| v == 2 * (i as u64 + 1)));
        assert_eq!(b.map.table().len(), 100);
        let fin = NatSet::finite([3, 9]).unwrap();
        assert!(matches!(generic_subsequence(&fin, &fin_witness(200), &BlockSelector::All, 200), Err(Error::ExhaustedA { at: 9, .. })));
    }

    #[test]
    fn generic_permutation_reproduces_swap() {
        let evens = NatSet::progression(2, 2).unwrap();
        let odd_blocks = BlockSelector::IndexSet(NatSet::progression(1, 2).unwrap());
        let b = generic_permutation(&evens, &fin_witness(100), &odd_blocks, 100).unwrap();
        assert_eq!(b.map, PermutationMap::OddEvenSwap);
        assert!(b.audit.passed());
        let b = generic_permutation(&evens, &z_witness(1 << 12), &BlockSelector::All, 1 << 12).unwrap();
        b.map.validate().unwrap();
        assert!(b.audit.passed());
    }

    #[test]
    fn adding_one_to_powers_of_two() {
        let x = zoo::sequence("char:powers2").unwrap();
        let z = builtin("density-zero").unwrap();
        let p = small_params();
        let b = cluster_adding_sigma(&x, &pt(1), z.as_ref(), None, &p).unwrap();
        assert!(b.audit.passed(), "{:?}", b.audit);
        assert!(b.audit.certificates.iter().all(|c| c.exact.as_ref().is_some_and(|e| *e >= q(1, 4))));
        let b = cluster_adding_pi(&x, &pt(1), z.as_ref(), None, &p).unwrap();
        assert!(b.audit.passed());
        assert!(b.audit.certificates.iter().all(|c| c.exact.as_ref().is_some_and(|e| *e >= q(1, 4))));
        assert!(matches!(cluster_preserving_sigma(&x, z.as_ref(), None, None, &p), Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn adding_zero_to_evens_uses_odd_indices() {
        let x = zoo::sequence("char:evens").unwrap();
        let z = builtin("density-zero").unwrap();
        let b = cluster_adding_sigma(&x, &pt(0), z.as_ref(), None, &small_params()).unwrap();
        assert!(b.audit.passed());
        assert!(b.map.table().iter().all(|v| v % 2 == 1));
    }

    #[test]
    fn convergent_sequence_needs_no_help() {
        let x = zoo::harmonic();
        let fin = FinIdeal::new();
        let b = cluster_adding_sigma(&x, &pt(0), &fin, None, &small_params()).unwrap();
        assert!(b.audit.passed());
        assert!(matches!(cluster_adding_sigma(&x, &pt(1), &fin, None, &small_params()), Err(Error::NotALimitPoint(_))));
    }

    #[test]
    fn preserving_evens() {
        let x = zoo::sequence("char:evens").unwrap();
        let z = builtin("density-zero").unwrap();
        let p = small_params();
        let b = cluster_preserving_sigma(&x, z.as_ref(), None, None, &p).unwrap();
        assert!(b.audit.passed(), "{:?}", b.audit.preservation);
        let pres = b.audit.preservation.as_ref().unwrap();
        assert_eq!(pres.covered, vec![pt(0), pt(1)]);
        assert!(b.audit.certificates.iter().all(|c| c.exact.as_ref().is_some_and(|e| *e >= q(1, 4))));
        let pi = cluster_preserving_pi(&x, z.as_ref(), None, None, &p).unwrap();
        assert!(pi.audit.passed());
        pi.map.validate().unwrap();
        let y = pi.map.apply_to(&x).unwrap();
        assert!((1..100).all(|n| y.point(n).is_ok()));
        assert!(pi.map.eval(1).is_ok());
    }

    #[test]
    fn preserving_rationals_on_the_coarse_grid() {
        let x = zoo::rationals();
        let z = builtin("density-zero").unwrap();
        let mut p = BuildParams::default();
        p.analysis.horizon = 100_000;
        p.analysis.schedule = RadiusSchedule::dyadic(6);
        p.analysis.pitch = dyadic(6);
        p.witness_q = q(1, 64);
        let b = cluster_preserving_sigma(&x, z.as_ref(), None, None, &p).unwrap();
        let pres = b.audit.preservation.as_ref().unwrap();
        assert_eq!(pres.source_clusters.len(), 65);
        assert!(b.audit.passed(), "{:?}", pres);
        let pi = cluster_preserving_pi(&x, z.as_ref(), None, None, &p).unwrap();
        assert!(pi.audit.passed(), "{:?}", pi.audit.preservation);
        pi.map.validate().unwrap();
    }
}
