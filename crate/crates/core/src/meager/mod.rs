//! Interval witnesses of meagerness and the closed sets `F_k` they define.

pub mod intervals;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{DecideParams, IdealHandle, Membership};
use crate::natset::{nu2, BlockSelector, NatSet, SetNode, Tri};
use crate::rational::{q, serde_q_opt, Q};
use crate::submeasure::Lscsm;

use intervals::{IotaGenerator, WitnessIntervals};

pub fn build_witness(ideal: &IdealHandle, q: &Q, horizon: u64) -> Result<WitnessIntervals> {
    if ideal.lscsm().is_none() && ideal.special_rule().is_none() {
        return Err(Error::NotRepresentable(ideal.name().into()));
    }
    ideal.build_witness(q, horizon)
}

/// Point past every member of sorted `v` that may touch a member of `v` or `other`.
fn past_adjacent(v: &[u64], other: &NatSet) -> u64 {
    let end = eventually_empty_after(other);
    let touches = |m: u64| v.binary_search(&m).is_ok() || (end.is_none_or(|e| m < e) && !other.member(m).is_false());
    v.iter().filter(|&&m| touches(m + 1) || (m > 1 && touches(m - 1))).map(|&m| m + 1).max().unwrap_or(1)
}

/// Point after which no two consecutive integers both belong to `s`.
fn sparse_from(s: &NatSet) -> Option<u64> {
    match s.node() {
        SetNode::Finite(v) => Some(past_adjacent(v, &NatSet::empty())),
        SetNode::Progression { first, step } if *step >= 2 => Some(*first),
        SetNode::PowersOf { base } => Some(*base),
        SetNode::Union(a, b) => match (a.node(), b.node()) {
            (SetNode::Finite(v), _) => sparse_from(b).map(|y| y.max(past_adjacent(v, b))),
            (_, SetNode::Finite(v)) => sparse_from(a).map(|x| x.max(past_adjacent(v, a))),
            _ => match (eventually_empty_after(a), eventually_empty_after(b)) {
                (Some(x), _) => sparse_from(b).map(|y| x.max(y)),
                (_, Some(y)) => sparse_from(a).map(|x| x.max(y)),
                _ => None,
            },
        },
        SetNode::Intersection(a, b) => match (sparse_from(a), sparse_from(b)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        _ => s.periodic_form().and_then(|p| {
            let n = p.residues.len();
            let gap = (0..n).all(|i| !(p.residues[i] && p.residues[(i + 1) % n]));
            gap.then_some(p.offset)
        }),
    }
    .or_else(|| eventually_empty_after(s))
}

/// Point after which `s` has no members, when the structure shows one.
fn eventually_empty_after(s: &NatSet) -> Option<u64> {
    match s.node() {
        SetNode::Finite(v) => Some(v.last().map_or(1, |m| m + 1)),
        SetNode::BlockUnion { blocks, selector } => {
            let BlockSelector::IndexSet(idx) = selector else { return None };
            let last = eventually_empty_after(idx)?;
            // blocks with index below `last`
            if last <= 1 {
                return Some(1);
            }
            blocks.block(last - 1).map(|(_, e)| e)
        }
        SetNode::Union(a, b) => Some(eventually_empty_after(a)?.max(eventually_empty_after(b)?)),
        SetNode::Intersection(a, b) => match (eventually_empty_after(a), eventually_empty_after(b)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        _ => {
            let p = s.periodic_form()?;
            p.is_eventually_empty().then_some(p.offset)
        }
    }
}

fn block_lengths_nondecreasing(w: &WitnessIntervals) -> bool {
    matches!(
        w.generator(),
        IotaGenerator::RowCoverage | IotaGenerator::DensityRatio { .. } | IotaGenerator::Singletons
    )
}

/// Whether `s` lies in `F_k`: no block `I_n` with `n >= k` is contained in `s`.
/// Blocks ending within `horizon` are checked directly; later blocks need a
/// structural certificate.
pub fn fk_holds(w: &WitnessIntervals, s: &NatSet, k: u64, horizon: u64) -> Result<Tri> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let limit = match s.known_horizon() {
        Some(h) => h.min(horizon),
        None => horizon,
    };
    let bits = s.prefix(limit)?;
    let first_unchecked;
    let mut n = k;
    loop {
        let Some((a, e)) = w.block(n) else {
            // past a finite table its last endpoint bounds every later block
            let start = w.iota(n).unwrap_or_else(|| (1..n).rev().find_map(|j| w.iota(j + 1)).unwrap_or(1));
            first_unchecked = Some((n, start));
            break;
        };
        if e - 1 > limit {
            first_unchecked = Some((n, a));
            break;
        }
        if bits[(a - 1) as usize..(e - 1) as usize].all() {
            return Ok(Tri::False);
        }
        n += 1;
    }
    let Some((n0, start0)) = first_unchecked else { return Ok(Tri::Unknown) };

    if let Some(p) = s.periodic_form() {
        if p.is_eventually_full() {
            return Ok(Tri::False);
        }
        // a block at least one period long meets every residue
        if block_lengths_nondecreasing(w) && p.offset <= start0 {
            if let Some((a, e)) = w.block(n0) {
                if e - a >= p.period {
                    return Ok(Tri::True);
                }
            }
        }
    }
    if eventually_empty_after(s).is_some_and(|m| m <= start0) {
        return Ok(Tri::True);
    }
    if let (Some(p), Some(l)) = (sparse_from(s), w.long_blocks_from()) {
        if p <= start0 && n0 >= l {
            return Ok(Tri::True);
        }
    }
    if periodic_misses_outnumber_thin(w, s, n0, start0)? {
        return Ok(Tri::True);
    }
    Ok(Tri::Unknown)
}

/// Bound on `e / a` over blocks `[a, e)` with index at least 2.
fn block_ratio_bound(w: &WitnessIntervals) -> Option<Q> {
    match w.generator() {
        IotaGenerator::RowCoverage => Some(Q::from_integer(3.into())),
        IotaGenerator::DensityRatio { q: r, .. } => {
            let one = Q::from_integer(1.into());
            Some((&one + &one - r) / (&one - r))
        }
        _ => None,
    }
}

/// Per-block member bound for a part of a union that is not periodic.
fn thin_bound(s: &NatSet, from: u64, ratio: &Q) -> Option<u64> {
    match s.node() {
        SetNode::Finite(v) => Some(v.iter().filter(|&&m| m >= from).count() as u64),
        // powers b^i and b^(i+t) in one block force e/a > b^t
        SetNode::PowersOf { base } => {
            let (mut t, mut reach) = (1u64, Q::from_integer((*base).into()));
            while reach < *ratio {
                reach *= Q::from_integer((*base).into());
                t += 1;
            }
            Some(t)
        }
        SetNode::Intersection(a, b) => match (thin_bound(a, from, ratio), thin_bound(b, from, ratio)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        _ => None,
    }
}

/// A union of a periodic part and thin parts contains no later block when
/// every block leaves more periodic gaps than the thin parts can fill.
fn periodic_misses_outnumber_thin(w: &WitnessIntervals, s: &NatSet, n0: u64, start0: u64) -> Result<bool> {
    let (Some(ratio), Some((a, e))) = (block_ratio_bound(w), w.block(n0)) else { return Ok(false) };
    if n0 < 2 || !block_lengths_nondecreasing(w) {
        return Ok(false);
    }
    let mut leaves = vec![s.clone()];
    let (mut periodic, mut thin) = (Vec::new(), 0u64);
    while let Some(t) = leaves.pop() {
        if let SetNode::Union(x, y) = t.node() {
            leaves.push(x.clone());
            leaves.push(y.clone());
        } else if t.periodic_form().is_some() {
            periodic.push(t);
        } else {
            match thin_bound(&t, start0, &ratio) {
                Some(b) => thin += b,
                None => return Ok(false),
            }
        }
    }
    let Some(p) = NatSet::union_all(periodic)?.periodic_form() else { return Ok(false) };
    if p.offset > start0.min(a) {
        return Ok(false);
    }
    let missing = p.period - p.count();
    Ok((e - a) / p.period * missing > thin)
}

/// Smallest `k <= max_k` with `fk_holds`, if any. Past the first 32 indices
/// the search bisects, relying on `F_k` growing with `k`.
pub fn separating_k(w: &WitnessIntervals, s: &NatSet, max_k: u64, horizon: u64) -> Result<Option<u64>> {
    const LINEAR: u64 = 32;
    for k in 1..=max_k.min(LINEAR) {
        if fk_holds(w, s, k, horizon)? == Tri::True {
            return Ok(Some(k));
        }
    }
    if max_k <= LINEAR || fk_holds(w, s, max_k, horizon)? != Tri::True {
        return Ok(None);
    }
    let (mut lo, mut hi) = (LINEAR, max_k);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fk_holds(w, s, mid, horizon)? == Tri::True {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Number of blocks starting within `horizon`, plus one.
fn visible_blocks(w: &WitnessIntervals, horizon: u64) -> u64 {
    (1..).take_while(|&n| w.iota(n).is_some_and(|i| i <= horizon)).count() as u64 + 1
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub set: String,
    pub verdict: Membership,
    #[serde(with = "serde_q_opt")]
    pub numeric: Option<Q>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub row_hits: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub ideal: String,
    pub witness: String,
    pub trials: usize,
    pub horizon: u64,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
    #[serde(with = "serde_q_opt")]
    pub min_numeric: Option<Q>,
    pub members_checked: usize,
    pub members_separated: usize,
    pub cofinite_checked: usize,
    pub cofinite_rejected: usize,
    pub pass: bool,
}

/// Rows `0..=rows` each hit by a member of `s` up to `n`.
pub fn row_hits(s: &NatSet, n: u64, rows: u32) -> Result<Vec<u64>> {
    let mut hits = vec![0u64; rows as usize + 1];
    for i in s.prefix(n)?.iter_ones() {
        let r = nu2(i as u64 + 1);
        if r <= rows {
            hits[r as usize] += 1;
        }
    }
    Ok(hits)
}

/// Random selector picking one residue class of block indices.
pub fn random_selector(rng: &mut ChaCha8Rng) -> Result<BlockSelector> {
    const PERIODS: [u64; 4] = [1, 2, 3, 5];
    let k = PERIODS[rng.gen_range(0..PERIODS.len())];
    let r = rng.gen_range(1..=k);
    Ok(BlockSelector::IndexSet(NatSet::progression(r, k)?))
}

fn random_noise(rng: &mut ChaCha8Rng, horizon: u64) -> Result<NatSet> {
    let n = rng.gen_range(0..20);
    NatSet::finite((0..n).map(|_| rng.gen_range(1..=horizon)))
}

/// Members of the ideal: finite sets, or for ideals holding infinite sets,
/// shapes every such built-in ideal contains.
fn random_member(rng: &mut ChaCha8Rng, w: &Arc<WitnessIntervals>, horizon: u64, finite_only: bool) -> Result<NatSet> {
    let noise = random_noise(rng, horizon.min(1 << 16))?;
    if finite_only {
        return Ok(noise);
    }
    Ok(match rng.gen_range(0..4) {
        0 => noise,
        1 => NatSet::union(noise, NatSet::powers_of(rng.gen_range(2..=7))?)?,
        2 => {
            let count = rng.gen_range(1..=4);
            let idx = NatSet::finite((0..count).map(|_| rng.gen_range(1..=8)))?;
            NatSet::union(NatSet::block_union(w.clone(), BlockSelector::IndexSet(idx))?, noise)?
        }
        _ => NatSet::intersection(NatSet::powers_of(rng.gen_range(2..=5))?, NatSet::progression(1, rng.gen_range(1..=4))?)?,
    })
}

/// Samples unions of infinitely many witness blocks and checks they fall
/// outside the ideal; samples members and checks they lie in some `F_k`.
pub fn verify_witness(
    ideal: &IdealHandle,
    w: &WitnessIntervals,
    trials: usize,
    horizon: u64,
    seed: u64,
) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let w = Arc::new(w.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = DecideParams::with_horizon(horizon);
    let slack = q(1, 20);
    let mut samples = Vec::with_capacity(trials);
    let mut min_numeric: Option<Q> = None;
    let row_cover = ideal.lscsm().is_none();
    let finite_only = matches!(ideal.lscsm(), Some(Lscsm::CountingCap));

    for _ in 0..trials {
        let sel = random_selector(&mut rng)?;
        let s = NatSet::union(NatSet::block_union(w.clone(), sel)?, random_noise(&mut rng, horizon)?)?;
        let d = ideal.decide(&s, &params)?;
        let numeric = d.estimate.as_ref().map(|e| e.numeric.clone());
        if let Some(v) = &numeric {
            if min_numeric.as_ref().is_none_or(|m| v < m) {
                min_numeric = Some(v.clone());
            }
        }
        let ok = match d.verdict {
            Membership::NotIn => true,
            Membership::Undecided => d.estimate.as_ref().is_some_and(|e| {
                e.numeric >= w.q0() - &slack && e.trend != crate::submeasure::Trend::Decaying
            }),
            Membership::In => false,
        };
        if !ok {
            return Err(Error::WitnessRefuted(format!("{s} decided {}", d.verdict)));
        }
        let hits = if row_cover { row_hits(&s, horizon, 10)? } else { Vec::new() };
        if hits.contains(&0) {
            return Err(Error::WitnessRefuted(format!("{s} misses a 2-adic row up to 10")));
        }
        samples.push(SampleRecord { set: s.to_string(), verdict: d.verdict, numeric, row_hits: hits });
    }

    let mut members_checked = 0;
    let mut members_separated = 0;
    for _ in 0..trials {
        let s = random_member(&mut rng, &w, horizon, finite_only)?;
        if ideal.decide(&s, &params)?.verdict != Membership::In {
            continue;
        }
        members_checked += 1;
        let max_k = visible_blocks(&w, horizon);
        if separating_k(&w, &s, max_k, horizon)?.is_some() {
            members_separated += 1;
        } else {
            return Err(Error::WitnessRefuted(format!("member {s} lies in no F_k for k <= {max_k}")));
        }
    }

    let mut cofinite_rejected = 0;
    let cofinite_checked = trials.min(20);
    for _ in 0..cofinite_checked {
        let excluded: Vec<u64> = (0..rng.gen_range(0..10)).map(|_| rng.gen_range(1..=1000)).collect();
        let s = NatSet::cofinite(excluded)?;
        if (1..=20).all(|k| fk_holds(&w, &s, k, horizon).map(|t| t != Tri::True).unwrap_or(false)) {
            cofinite_rejected += 1;
        } else {
            return Err(Error::WitnessRefuted(format!("cofinite {s} lies in some F_k")));
        }
    }

    Ok(VerifyReport {
        ideal: ideal.name().into(),
        witness: w.describe(),
        trials,
        horizon,
        seed,
        samples,
        min_numeric,
        members_checked,
        members_separated,
        cofinite_checked,
        cofinite_rejected,
        pass: true,
    })
}
