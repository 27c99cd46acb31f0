//! Finite-extension games on subsequences and rearrangements.
//!
//! An adversary and a strategy alternately extend a prefix. The strategy
//! appends a run of positions whose values land in a small ball around the
//! target until the run's submeasure exceeds `q`.

use bitvec::prelude::*;
use rand::distributions::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::Ideal;
use crate::natset::NatSet;
use crate::rational::{q, serde_coord, serde_coord_vec, serde_q, to_f64, Coord, Q};
use crate::sequence::cluster::RadiusSchedule;
use crate::sequence::{within, Point, SequenceSpec};
use crate::submeasure::Lscsm;
use crate::transforms::{PermutationMap, SubTail, SubsequenceMap};

pub const DISCLAIMER: &str = "finite games illustrate the strategy; they do not prove comeagerness";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Sigma,
    Pi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameTarget {
    #[serde(with = "serde_coord_vec")]
    pub ell: Point,
    #[serde(with = "serde_q")]
    pub q: Q,
    pub schedule: RadiusSchedule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adversary {
    pub seed: u64,
    /// Chance of ending a move after each value.
    #[serde(with = "serde_q")]
    pub stop: Q,
    /// Success probability of the geometric gap between values.
    #[serde(with = "serde_q")]
    pub gap: Q,
    /// Fresh integers shuffled per rearrangement move.
    pub window: u64,
}

impl Adversary {
    pub fn new(seed: u64) -> Self {
        Adversary { seed, stop: q(1, 8), gap: q(1, 2), window: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    Adversary,
    Strategy,
}

/// Exact record of one strategy move.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeCertificate {
    /// Radius index, 1-based.
    pub k: usize,
    #[serde(with = "serde_coord")]
    pub eps: Coord,
    pub start: u64,
    pub end: u64,
    pub hits: u64,
    #[serde(with = "serde_q")]
    pub phi: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Move {
    pub player: Player,
    pub round: u64,
    /// First position written.
    pub start: u64,
    pub values: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<EscapeCertificate>,
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub kind: MapKind,
    pub prefix: Vec<u64>,
    pub round: u64,
    pub target: GameTarget,
    pub transcript: Vec<Move>,
    /// Values taken, for rearrangements.
    used: BitVec,
    low: u64,
}

impl GameState {
    pub fn new(kind: MapKind, target: GameTarget) -> Self {
        GameState { kind, prefix: Vec::new(), round: 0, target, transcript: Vec::new(), used: BitVec::new(), low: 1 }
    }

    fn last(&self) -> u64 {
        self.prefix.last().copied().unwrap_or(0)
    }

    fn is_used(&self, v: u64) -> bool {
        self.used.get(v as usize).is_some_and(|b| *b)
    }

    fn push(&mut self, v: u64) {
        if self.kind == MapKind::Pi {
            if self.used.len() <= v as usize {
                self.used.resize(v as usize + 1, false);
            }
            self.used.set(v as usize, true);
            while self.is_used(self.low) {
                self.low += 1;
            }
        }
        self.prefix.push(v);
    }

    /// Smallest integers not yet taken, above the prefix for subsequences.
    fn fresh(&self, count: usize) -> Vec<u64> {
        match self.kind {
            MapKind::Sigma => (self.last() + 1..).take(count).collect(),
            MapKind::Pi => (self.low..).filter(|&v| !self.is_used(v)).take(count).collect(),
        }
    }

    /// The prefix as a map: a strictly increasing table, or a permutation of
    /// `[1, max]` closed with the integers passed over.
    pub fn to_sigma(&self) -> Result<SubsequenceMap> {
        SubsequenceMap::new(self.prefix.clone(), SubTail::Unfinished)
    }

    pub fn to_pi(&self) -> Result<PermutationMap> {
        let mut table = self.prefix.clone();
        let max = table.iter().copied().max().unwrap_or(0);
        table.extend((1..=max).filter(|&v| !self.is_used(v)));
        PermutationMap::from_table(table)
    }
}

fn supply(k: usize, detail: impl Into<String>) -> Error {
    Error::SupplyExhausted { k, detail: detail.into() }
}

/// Next value for position `n`: the next member of `ball` above the prefix
/// for subsequences, the smallest untaken member for rearrangements.
fn next_value(state: &GameState, ball: &NatSet, cursor: &mut u64, horizon: u64) -> Result<Option<u64>> {
    let lim = ball.known_horizon().map_or(horizon, |h| h.min(horizon));
    match state.kind {
        MapKind::Sigma => ball.next_member(state.last(), lim),
        MapKind::Pi => loop {
            let Some(v) = ball.next_member(*cursor, lim)? else { return Ok(None) };
            *cursor = v;
            if !state.is_used(v) {
                return Ok(Some(v));
            }
        },
    }
}

fn escape_with(state: &mut GameState, ball: &NatSet, k: usize, q: &Q, phi: &Lscsm, horizon: u64) -> Result<EscapeCertificate> {
    let eps = *state
        .target
        .schedule
        .radii()
        .get(k - 1)
        .ok_or_else(|| Error::InvalidParameter(format!("radius index {k} outside the schedule")))?;
    let start = state.prefix.len() as u64 + 1;
    let mut acc = phi.accumulator_to(q);
    let mut values = Vec::new();
    let mut cursor = 0;
    let mut n = start;
    loop {
        let v = next_value(state, ball, &mut cursor, horizon)?.ok_or_else(|| {
            supply(k, format!("ball {} holds no further value below {horizon} for position {n}", crate::rational::fmt_coord(&eps)))
        })?;
        state.push(v);
        values.push(v);
        acc.push(n);
        if acc.reached() && acc.bound().lo > *q {
            break;
        }
        n += 1;
    }
    let cert = EscapeCertificate { k, eps, start, end: n, hits: n - start + 1, phi: acc.bound().lo };
    state.transcript.push(Move { player: Player::Strategy, round: state.round, start, values, certificate: Some(cert.clone()) });
    Ok(cert)
}

/// Extends a subsequence prefix by positions whose values lie in the ball of
/// radius index `k` until the run's mass exceeds `q`.
pub fn escape_extension(state: &mut GameState, x: &SequenceSpec, k: usize, phi: &Lscsm, horizon: u64) -> Result<EscapeCertificate> {
    let ball = ball_at(x, &state.target, k, horizon)?;
    let q = state.target.q.clone();
    escape_with(state, &ball, k, &q, phi, horizon)
}

/// As [`escape_extension`] for a rearrangement prefix: values are the
/// smallest ball members not yet used.
pub fn escape_extension_pi(state: &mut GameState, x: &SequenceSpec, k: usize, phi: &Lscsm, horizon: u64) -> Result<EscapeCertificate> {
    if state.kind != MapKind::Pi {
        return Err(Error::InvalidParameter("state holds a subsequence prefix".into()));
    }
    escape_extension(state, x, k, phi, horizon)
}

fn ball_at(x: &SequenceSpec, target: &GameTarget, k: usize, horizon: u64) -> Result<NatSet> {
    let eps = target
        .schedule
        .radii()
        .get(k.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidParameter(format!("radius index {k} outside the schedule")))?;
    x.indicator_set(&target.ell, eps, horizon)
}

fn adversary_move(state: &mut GameState, rng: &mut ChaCha8Rng, adv: &Adversary, horizon: u64) -> Result<()> {
    let stop = Bernoulli::new(to_f64(&adv.stop)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let gap = Bernoulli::new(to_f64(&adv.gap)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut len = 1usize;
    while !stop.sample(rng) {
        len += 1;
    }
    let start = state.prefix.len() as u64 + 1;
    let values: Vec<u64> = match state.kind {
        MapKind::Sigma => {
            let mut out = Vec::with_capacity(len);
            let mut v = state.last();
            for _ in 0..len {
                v += 1;
                while !gap.sample(rng) {
                    v += 1;
                }
                if v > horizon {
                    break;
                }
                out.push(v);
            }
            out
        }
        MapKind::Pi => {
            let mut pool = state.fresh(len.max(adv.window as usize));
            pool.retain(|&v| v <= horizon);
            pool.shuffle(rng);
            pool.truncate(len);
            pool
        }
    };
    for &v in &values {
        state.push(v);
    }
    state.transcript.push(Move { player: Player::Adversary, round: state.round, start, values, certificate: None });
    Ok(())
}

/// `1, 1, 2, 1, 2, 3, ...` capped at `max`.
pub fn radius_cycle(max: usize) -> impl Iterator<Item = usize> {
    (1..).flat_map(|m| 1..=m).map(move |k| k.min(max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Verdict {
    Win,
    Loss { error: String, detail: String },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub sequence: String,
    pub ideal: String,
    pub kind: MapKind,
    pub target: GameTarget,
    pub adversary: Adversary,
    pub rounds: u64,
    pub horizon: u64,
    pub transcript: Vec<Move>,
    pub verdict: Verdict,
    /// Radius indices the strategy played.
    pub radii_reached: Vec<usize>,
    pub disclaimer: &'static str,
}

#[allow(clippy::too_many_arguments)]
pub fn run_game(
    x: &SequenceSpec,
    ideal: &dyn Ideal,
    kind: MapKind,
    target: &GameTarget,
    adversary: &Adversary,
    rounds: u64,
    horizon: u64,
) -> Result<GameReport> {
    let phi = ideal.lscsm().ok_or_else(|| Error::NotAnalyticP(ideal.name().to_string()))?;
    target.schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(adversary.seed);
    let mut state = GameState::new(kind, target.clone());
    let radii = target.schedule.radii().len();
    let balls = (1..=radii).map(|k| ball_at(x, target, k, horizon)).collect::<Result<Vec<_>>>()?;
    let mut cycle = radius_cycle(radii);
    let mut verdict = if rounds == 0 { Verdict::Undetermined } else { Verdict::Win };
    for r in 1..=rounds {
        state.round = r;
        adversary_move(&mut state, &mut rng, adversary, horizon)?;
        let k = cycle.next().expect("endless cycle");
        match escape_with(&mut state, &balls[k - 1], k, &target.q, phi, horizon) {
            Ok(_) => {}
            Err(e @ Error::SupplyExhausted { .. }) => {
                verdict = Verdict::Loss { error: e.kind().into(), detail: e.to_string() };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let mut radii_reached: Vec<usize> = state.transcript.iter().filter_map(|m| m.certificate.as_ref().map(|c| c.k)).collect();
    radii_reached.sort_unstable();
    radii_reached.dedup();
    let report = GameReport {
        sequence: x.name.clone(),
        ideal: ideal.name().to_string(),
        kind,
        target: target.clone(),
        adversary: adversary.clone(),
        rounds,
        horizon,
        transcript: state.transcript,
        verdict,
        radii_reached,
        disclaimer: DISCLAIMER,
    };
    if report.verdict == Verdict::Win && !audit_transcript(x, phi, &report)? {
        return Err(Error::InvalidMap("strategy moves failed their own audit".into()));
    }
    Ok(report)
}

/// Rebuilds the final prefix from the transcript and rechecks every strategy
/// certificate against the sequence with exact arithmetic.
pub fn audit_transcript(x: &SequenceSpec, phi: &Lscsm, report: &GameReport) -> Result<bool> {
    let prefix: Vec<u64> = report.transcript.iter().flat_map(|m| m.values.iter().copied()).collect();
    let shape_ok = match report.kind {
        MapKind::Sigma => prefix.first().is_none_or(|&v| v >= 1) && prefix.windows(2).all(|p| p[0] < p[1]),
        MapKind::Pi => {
            let mut seen = std::collections::HashSet::new();
            prefix.iter().all(|&v| v >= 1 && seen.insert(v))
        }
    };
    if !shape_ok {
        return Ok(false);
    }
    let mut pos = 0u64;
    let mut reached = Vec::new();
    for m in &report.transcript {
        if m.start != pos + 1 {
            return Ok(false);
        }
        if let Some(c) = &m.certificate {
            let hits: Vec<u64> = (c.start..=c.end)
                .map(|n| x.point(prefix[n as usize - 1]).map(|p| within(&p, &report.target.ell, &c.eps).then_some(n)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            let value = phi.phi_exact_members(&hits);
            if value <= report.target.q || value != c.phi {
                return Ok(false);
            }
            reached.push(c.k);
        }
        pos += m.values.len() as u64;
    }
    reached.sort_unstable();
    reached.dedup();
    Ok(reached == report.radii_reached)
}
