//! Strictly increasing maps and bijections of the index set, their action on
//! sequences, and builders that steer cluster sets.

pub mod builders;
pub mod extraction;

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::distributions::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natset::{Bits, NatSet, Tri, MAX_PERIOD};
use crate::rational::{serde_q, to_f64, Coord, Q};
use crate::sequence::{FiniteAlphabet, Point, PointGenerator, SequenceSpec};

pub use builders::{
    cluster_adding_pi, cluster_adding_sigma, cluster_preserving_pi, cluster_preserving_sigma, generic_permutation,
    generic_subsequence, BuildAudit, BuildParams, PermutationBuild, SigmaBuild,
};
pub use extraction::{limit_witness_extraction, ExtractionBlock, ExtractionCertificate};

/// For `n > from` with `n % c == j` (`c = offsets.len()`), `f(n) = scale*n + offsets[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineTail {
    pub from: u64,
    pub scale: u64,
    pub offsets: Vec<i128>,
}

impl AffineTail {
    fn is_identity(&self) -> bool {
        self.scale == 1 && self.offsets.iter().all(|&b| b == 0)
    }
}

/// A map `n -> f(n)` on the positive integers.
pub trait IndexMap: Send + Sync + fmt::Debug {
    fn eval(&self, n: u64) -> Result<u64>;

    /// Largest argument the map answers, if limited.
    fn valid_to(&self) -> Option<u64>;

    fn affine_tail(&self) -> Option<AffineTail>;

    /// Strictly increasing maps allow binary search on values.
    fn increasing(&self) -> bool;

    fn label(&self) -> String;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubTail {
    /// `sigma(n) = n + offset` past the table.
    IdentityShift { offset: u64 },
    /// Steps of `step` past the last table value (or from 0).
    Arithmetic { step: u64 },
    /// Nothing is known past the table.
    Unfinished,
}

/// A strictly increasing `sigma`: an explicit prefix plus a tail rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubsequenceRecord", into = "SubsequenceRecord")]
pub struct SubsequenceMap {
    table: Vec<u64>,
    tail: SubTail,
}

#[derive(Serialize, Deserialize)]
struct SubsequenceRecord {
    table: Vec<u64>,
    tail: SubTail,
    /// Last index answered; absent when the tail rule is total.
    #[serde(default)]
    horizon: Option<u64>,
}

impl TryFrom<SubsequenceRecord> for SubsequenceMap {
    type Error = Error;

    fn try_from(r: SubsequenceRecord) -> Result<Self> {
        SubsequenceMap::new(r.table, r.tail)
    }
}

impl From<SubsequenceMap> for SubsequenceRecord {
    fn from(m: SubsequenceMap) -> Self {
        let horizon = m.valid_to();
        SubsequenceRecord { table: m.table, tail: m.tail, horizon }
    }
}

impl SubsequenceMap {
    pub fn new(table: Vec<u64>, tail: SubTail) -> Result<Self> {
        let m = SubsequenceMap { table, tail };
        m.validate()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        SubsequenceMap { table: Vec::new(), tail: SubTail::IdentityShift { offset: 0 } }
    }

    pub fn shift(offset: u64) -> Self {
        SubsequenceMap { table: Vec::new(), tail: SubTail::IdentityShift { offset } }
    }

    /// `sigma(n) = step * n`.
    pub fn multiples(step: u64) -> Result<Self> {
        Self::new(Vec::new(), SubTail::Arithmetic { step })
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn tail(&self) -> &SubTail {
        &self.tail
    }

    /// Strictly increasing table starting at or above 1, with a tail that
    /// continues above the last entry.
    pub fn validate(&self) -> Result<()> {
        if self.table.first().is_some_and(|&v| v == 0) {
            return Err(Error::InvalidMap("values start at 1".into()));
        }
        if let Some(i) = self.table.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap(format!("table not increasing at position {}", i + 2)));
        }
        let m = self.table.len() as u64;
        let last = self.table.last().copied().unwrap_or(0);
        match self.tail {
            SubTail::IdentityShift { offset } if m + 1 + offset <= last => {
                Err(Error::InvalidMap("shift tail would repeat table values".into()))
            }
            SubTail::Arithmetic { step: 0 } => Err(Error::InvalidMap("arithmetic tail needs a positive step".into())),
            _ => Ok(()),
        }
    }

    pub fn apply_to(&self, x: &SequenceSpec) -> Result<SequenceSpec> {
        apply(Arc::new(self.clone()), x)
    }
}

impl IndexMap for SubsequenceMap {
    fn eval(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidParameter("indices start at 1".into()));
        }
        let m = self.table.len() as u64;
        if n <= m {
            return Ok(self.table[n as usize - 1]);
        }
        let overflow = || Error::InvalidMap(format!("value at {n} overflows"));
        match self.tail {
            SubTail::IdentityShift { offset } => n.checked_add(offset).ok_or_else(overflow),
            SubTail::Arithmetic { step } => {
                let last = self.table.last().copied().unwrap_or(0);
                (n - m).checked_mul(step).and_then(|d| d.checked_add(last)).ok_or_else(overflow)
            }
            SubTail::Unfinished => Err(Error::horizon(n, m)),
        }
    }

    fn valid_to(&self) -> Option<u64> {
        matches!(self.tail, SubTail::Unfinished).then_some(self.table.len() as u64)
    }

    fn affine_tail(&self) -> Option<AffineTail> {
        let m = self.table.len() as u64;
        match self.tail {
            SubTail::IdentityShift { offset } => Some(AffineTail { from: m, scale: 1, offsets: vec![i128::from(offset)] }),
            SubTail::Arithmetic { step } => {
                let last = i128::from(self.table.last().copied().unwrap_or(0));
                Some(AffineTail { from: m, scale: step, offsets: vec![last - i128::from(m) * i128::from(step)] })
            }
            SubTail::Unfinished => None,
        }
    }

    fn increasing(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        match (&self.tail, self.table.len()) {
            (SubTail::IdentityShift { offset: 0 }, 0) => "id".into(),
            (SubTail::IdentityShift { offset }, 0) => format!("n+{offset}"),
            (SubTail::Arithmetic { step }, 0) => format!("{step}n"),
            (_, m) => format!("sigma[{m}]"),
        }
    }
}

/// A bijection: a permutation of `[1, m]` extended by the identity, or the
/// swap `2n-1 <-> 2n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermutationMap {
    Table { table: Vec<u64> },
    OddEvenSwap,
}

impl PermutationMap {
    pub fn from_table(table: Vec<u64>) -> Result<Self> {
        let p = PermutationMap::Table { table };
        p.validate()?;
        Ok(p)
    }

    /// Inverse-table check.
    pub fn validate(&self) -> Result<()> {
        if let PermutationMap::Table { table } = self {
            inverse_table(table)?;
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<PermutationMap> {
        match self {
            PermutationMap::Table { table } => Ok(PermutationMap::Table { table: inverse_table(table)? }),
            PermutationMap::OddEvenSwap => Ok(PermutationMap::OddEvenSwap),
        }
    }

    /// Replaces a table that spells out the swap.
    pub fn simplified(self) -> Self {
        match &self {
            PermutationMap::Table { table }
                if !table.is_empty()
                    && table.len() % 2 == 0
                    && table.iter().enumerate().all(|(i, &v)| v == swap(i as u64 + 1)) =>
            {
                PermutationMap::OddEvenSwap
            }
            _ => self,
        }
    }

    pub fn apply_to(&self, x: &SequenceSpec) -> Result<SequenceSpec> {
        apply(Arc::new(self.clone()), x)
    }
}

fn swap(n: u64) -> u64 {
    if n % 2 == 1 {
        n + 1
    } else {
        n - 1
    }
}

pub fn inverse_table(table: &[u64]) -> Result<Vec<u64>> {
    let m = table.len();
    let mut inv = vec![0u64; m];
    for (i, &v) in table.iter().enumerate() {
        if v == 0 || v as usize > m {
            return Err(Error::InvalidMap(format!("value {v} at {} leaves [1, {m}]", i + 1)));
        }
        let slot = &mut inv[v as usize - 1];
        if *slot != 0 {
            return Err(Error::InvalidMap(format!("value {v} taken twice")));
        }
        *slot = i as u64 + 1;
    }
    Ok(inv)
}

impl IndexMap for PermutationMap {
    fn eval(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidParameter("indices start at 1".into()));
        }
        Ok(match self {
            PermutationMap::Table { table } => table.get(n as usize - 1).copied().unwrap_or(n),
            PermutationMap::OddEvenSwap => swap(n),
        })
    }

    fn valid_to(&self) -> Option<u64> {
        None
    }

    fn affine_tail(&self) -> Option<AffineTail> {
        Some(match self {
            PermutationMap::Table { table } => AffineTail { from: table.len() as u64, scale: 1, offsets: vec![0] },
            PermutationMap::OddEvenSwap => AffineTail { from: 0, scale: 1, offsets: vec![-1, 1] },
        })
    }

    fn increasing(&self) -> bool {
        false
    }

    fn label(&self) -> String {
        match self {
            PermutationMap::Table { table } => format!("pi[{}]", table.len()),
            PermutationMap::OddEvenSwap => "swap".into(),
        }
    }
}

/// Most residues written out as progressions before falling back to a bitmap.
const MAX_RESIDUE_TERMS: u64 = 64;

fn assemble(head: Vec<u64>, head_len: u64, n0: u64, period: u64, residues: &[bool]) -> Result<Option<NatSet>> {
    let ones = residues.iter().filter(|&&b| b).count() as u64;
    let pick = |want: bool| -> Result<NatSet> {
        NatSet::union_all(
            residues
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == want)
                .map(|(r, _)| NatSet::progression(n0 + r as u64, period))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let head_set = NatSet::finite(head.iter().copied())?;
    if ones == 0 {
        return Ok(Some(head_set));
    }
    if ones == period {
        let missing: Vec<u64> = (1..=head_len).filter(|n| head.binary_search(n).is_err()).collect();
        return Ok(Some(NatSet::cofinite(missing)?));
    }
    let tail = if ones <= MAX_RESIDUE_TERMS {
        pick(true)?
    } else if period - ones <= MAX_RESIDUE_TERMS {
        NatSet::difference(NatSet::tail_from(n0), pick(false)?)?
    } else {
        return Ok(None);
    };
    Ok(Some(if head.is_empty() { tail } else { NatSet::union(head_set, tail)? }))
}

/// `{n : f(n) in s}` in closed form, when the map's tail and the set allow it.
pub fn preimage_exact(map: &dyn IndexMap, s: &NatSet) -> Option<Result<NatSet>> {
    let tail = map.affine_tail()?;
    let member = |n: u64| -> Option<bool> {
        match map.eval(n).ok().map(|v| s.member(v)) {
            Some(Tri::True) => Some(true),
            Some(Tri::False) => Some(false),
            _ => None,
        }
    };
    if tail.is_identity() {
        if tail.from == 0 {
            return Some(Ok(s.clone()));
        }
        let head: Option<Vec<u64>> = (1..=tail.from).map(|n| member(n).map(|b| (n, b))).collect::<Option<Vec<_>>>().map(|v| {
            v.into_iter().filter(|(_, b)| *b).map(|(n, _)| n).collect()
        });
        let head = head?;
        let build = || -> Result<NatSet> {
            let rest = NatSet::intersection(s.clone(), NatSet::tail_from(tail.from + 1))?;
            NatSet::union(NatSet::finite(head)?, rest)
        };
        return Some(build());
    }
    let p = s.periodic_form()?;
    let c = tail.offsets.len() as u64;
    let period = c.lcm(&(p.period / tail.scale.gcd(&p.period)));
    if period > MAX_PERIOD {
        return None;
    }
    let min_off = tail.offsets.iter().copied().min().unwrap_or(0).min(0);
    let n0 = (tail.from + 1).max(p.offset + min_off.unsigned_abs() as u64);
    let head: Vec<u64> = (1..n0).map(|n| member(n).map(|b| (n, b))).collect::<Option<Vec<_>>>()?.into_iter().filter(|(_, b)| *b).map(|(n, _)| n).collect();
    let residues: Vec<bool> = (n0..n0 + period).map(member).collect::<Option<Vec<_>>>()?;
    assemble(head, n0 - 1, n0, period, &residues).transpose()
}

/// `{n <= horizon : f(n) in s}`, exact where possible and a bitmap otherwise.
pub fn preimage(map: &dyn IndexMap, s: &NatSet, horizon: u64) -> Result<NatSet> {
    if let Some(r) = preimage_exact(map, s) {
        return r;
    }
    let h = map.valid_to().map_or(horizon, |v| v.min(horizon));
    let mut bits = Bits::repeat(false, h as usize);
    for n in 1..=h {
        match s.member(map.eval(n)?) {
            Tri::True => bits.set(n as usize - 1, true),
            Tri::False => {}
            Tri::Unknown => {
                bits.truncate(n as usize - 1);
                break;
            }
        }
    }
    Ok(NatSet::bitmap(bits))
}

struct Composed {
    inner: SequenceSpec,
    map: Arc<dyn IndexMap>,
}

impl PointGenerator for Composed {
    fn point(&self, n: u64) -> Result<Point> {
        self.inner.point(self.map.eval(n)?)
    }

    fn indicator(&self, center: &[Coord], eps: &Coord) -> Option<Result<NatSet>> {
        match self.inner.generator.indicator(center, eps)? {
            Ok(s) => preimage_exact(self.map.as_ref(), &s),
            Err(e) => Some(Err(e)),
        }
    }
}

/// Largest `n` with `f(n) <= limit`, for increasing maps.
fn last_within(map: &dyn IndexMap, limit: u64, upto: u64) -> u64 {
    let (mut lo, mut hi) = (0u64, upto);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if map.eval(mid).is_ok_and(|v| v <= limit) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// The sequence `n -> x_{f(n)}`. Alphabet structure survives when every
/// index set has a closed-form preimage.
pub fn apply(map: Arc<dyn IndexMap>, x: &SequenceSpec) -> Result<SequenceSpec> {
    let name = format!("{}[{}]", x.name, map.label());
    if let Some(a) = &x.alphabet {
        let sets: Option<Vec<NatSet>> = a
            .sets
            .iter()
            .map(|s| preimage_exact(map.as_ref(), s))
            .collect::<Option<Vec<_>>>()
            .map(|v| v.into_iter().collect::<Result<Vec<_>>>())
            .transpose()?;
        if let (Some(sets), None) = (sets, map.valid_to()) {
            let letters = a.letters.iter().map(|l| l.0.clone()).collect();
            return SequenceSpec::from_alphabet(name, FiniteAlphabet::new(letters, sets)?);
        }
    }
    let valid_to = match (map.valid_to(), x.valid_to) {
        (m, None) => m,
        (m, Some(v)) => {
            let upto = m.unwrap_or(v);
            Some(if map.increasing() { last_within(map.as_ref(), v, upto) } else { upto.min(v) })
        }
    };
    let generator = Arc::new(Composed { inner: x.clone(), map });
    Ok(SequenceSpec::from_fn(name, x.dim, x.bound, generator, valid_to))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GapLaw {
    /// Gap `1 + G` with `G` geometric on `{0, 1, ...}`, success probability `p`.
    Geometric {
        #[serde(with = "serde_q")]
        p: Q,
    },
    /// Gap uniform on `1..=max`.
    Uniform { max: u64 },
}

/// Pseudo-random strictly increasing table of length `len`.
pub fn random_sigma(seed: u64, law: &GapLaw, len: usize) -> Result<SubsequenceMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Vec::with_capacity(len);
    let mut v = 0u64;
    match law {
        GapLaw::Geometric { p } => {
            let coin = Bernoulli::new(to_f64(p)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for _ in 0..len {
                v += 1;
                while !coin.sample(&mut rng) {
                    v += 1;
                }
                table.push(v);
            }
        }
        GapLaw::Uniform { max } => {
            if *max == 0 {
                return Err(Error::InvalidParameter("uniform gap needs max >= 1".into()));
            }
            for _ in 0..len {
                v += rng.gen_range(1..=*max);
                table.push(v);
            }
        }
    }
    SubsequenceMap::new(table, SubTail::Unfinished)
}

/// Pseudo-random bijection permuting each window `[jw+1, (j+1)w]` of a prefix
/// of at least `len` indices.
pub fn random_pi(seed: u64, window: u64, len: u64) -> Result<PermutationMap> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = len.div_ceil(window) * window;
    let mut table: Vec<u64> = (1..=m).collect();
    for chunk in table.chunks_mut(window as usize) {
        chunk.shuffle(&mut rng);
    }
    PermutationMap::from_table(table)
}
