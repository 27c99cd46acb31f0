//! Symbolic subsets of the positive integers.
//!
//! A [`NatSet`] is an immutable expression tree over a closed family of leaf
//! shapes. Every query is exact: membership is tri-state, and windows or
//! counts that would need information a leaf does not have fail with
//! [`Error::HorizonExceeded`] instead of guessing.

use std::fmt;
use std::sync::Arc;

use bitvec::prelude::*;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meager::intervals::{Locate, WitnessIntervals};

pub type Bits = BitVec<u64, Lsb0>;

/// Maximum depth of a boolean combination tree.
pub const MAX_DEPTH: usize = 32;

/// Largest period tracked by [`NatSet::periodic_form`].
pub const MAX_PERIOD: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Tri::True
    }

    pub fn is_false(self) -> bool {
        self == Tri::False
    }
}

impl From<bool> for Tri {
    fn from(b: bool) -> Self {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

/// Which blocks of a [`WitnessIntervals`] a `BlockUnion` keeps.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockSelector {
    All,
    /// Block indices divisible by `k`.
    EveryKth(u64),
    IndexSet(NatSet),
}

impl BlockSelector {
    pub fn selects(&self, n: u64) -> Tri {
        match self {
            BlockSelector::All => Tri::True,
            BlockSelector::EveryKth(k) => Tri::from(n % k == 0),
            BlockSelector::IndexSet(s) => s.member(n),
        }
    }

    pub fn is_infinite(&self) -> Tri {
        match self {
            BlockSelector::All | BlockSelector::EveryKth(_) => Tri::True,
            BlockSelector::IndexSet(s) => s.is_infinite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetNode {
    Finite(Vec<u64>),
    Cofinite(Vec<u64>),
    Progression { first: u64, step: u64 },
    /// `{b^k : k >= 1}`.
    PowersOf { base: u64 },
    BlockUnion { blocks: Arc<WitnessIntervals>, selector: BlockSelector },
    /// Bit `i` describes the integer `i + 1`; nothing is known past the end.
    PrefixBitmap(Arc<Bits>),
    Union(NatSet, NatSet),
    Intersection(NatSet, NatSet),
    Complement(NatSet),
}

#[derive(Clone, PartialEq)]
pub struct NatSet {
    node: Arc<SetNode>,
    depth: usize,
}

/// Eventually periodic description: for `n >= offset`, `n` is a member iff
/// `residues[(n - offset) % period]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Periodic {
    pub offset: u64,
    pub period: u64,
    pub residues: Vec<bool>,
}

impl Periodic {
    pub fn count(&self) -> u64 {
        self.residues.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_eventually_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_eventually_full(&self) -> bool {
        self.count() == self.period
    }
}

fn sorted_unique(it: impl IntoIterator<Item = u64>) -> Result<Vec<u64>> {
    let mut v: Vec<u64> = it.into_iter().collect();
    if v.contains(&0) {
        return Err(Error::InvalidSet("members must be positive integers".into()));
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

impl NatSet {
    fn leaf(node: SetNode) -> NatSet {
        NatSet { node: Arc::new(node), depth: 1 }
    }

    fn branch(node: SetNode, depth: usize) -> Result<NatSet> {
        if depth > MAX_DEPTH {
            return Err(Error::DepthExceeded { max: MAX_DEPTH });
        }
        Ok(NatSet { node: Arc::new(node), depth })
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Result<NatSet> {
        Ok(Self::leaf(SetNode::Finite(sorted_unique(members)?)))
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = u64>) -> Result<NatSet> {
        Ok(Self::leaf(SetNode::Cofinite(sorted_unique(excluded)?)))
    }

    pub fn empty() -> NatSet {
        Self::leaf(SetNode::Finite(Vec::new()))
    }

    pub fn all() -> NatSet {
        Self::leaf(SetNode::Cofinite(Vec::new()))
    }

    pub fn progression(first: u64, step: u64) -> Result<NatSet> {
        if first == 0 || step == 0 {
            return Err(Error::InvalidSet("progression needs first >= 1 and step >= 1".into()));
        }
        Ok(Self::leaf(SetNode::Progression { first, step }))
    }

    /// `[from, infinity)`.
    pub fn tail_from(from: u64) -> NatSet {
        Self::leaf(SetNode::Progression { first: from.max(1), step: 1 })
    }

    pub fn powers_of(base: u64) -> Result<NatSet> {
        if base < 2 {
            return Err(Error::InvalidSet("powers need base >= 2".into()));
        }
        Ok(Self::leaf(SetNode::PowersOf { base }))
    }

    pub fn block_union(blocks: Arc<WitnessIntervals>, selector: BlockSelector) -> Result<NatSet> {
        let depth = match &selector {
            BlockSelector::EveryKth(0) => {
                return Err(Error::InvalidSet("EveryKth needs k >= 1".into()));
            }
            BlockSelector::IndexSet(s) => s.depth + 1,
            _ => 1,
        };
        Self::branch(SetNode::BlockUnion { blocks, selector }, depth)
    }

    pub fn bitmap(bits: Bits) -> NatSet {
        Self::leaf(SetNode::PrefixBitmap(Arc::new(bits)))
    }

    pub fn bitmap_from_members(horizon: u64, members: impl IntoIterator<Item = u64>) -> Result<NatSet> {
        let mut bits = bitvec![u64, Lsb0; 0; horizon as usize];
        for m in members {
            if m == 0 || m > horizon {
                return Err(Error::InvalidSet(format!("bitmap member {m} outside [1, {horizon}]")));
            }
            bits.set(m as usize - 1, true);
        }
        Ok(Self::bitmap(bits))
    }

    pub fn union(a: NatSet, b: NatSet) -> Result<NatSet> {
        let d = a.depth.max(b.depth) + 1;
        Self::branch(SetNode::Union(a, b), d)
    }

    pub fn intersection(a: NatSet, b: NatSet) -> Result<NatSet> {
        let d = a.depth.max(b.depth) + 1;
        Self::branch(SetNode::Intersection(a, b), d)
    }

    pub fn complement(a: NatSet) -> Result<NatSet> {
        match a.node() {
            SetNode::Complement(b) => return Ok(b.clone()),
            SetNode::Finite(v) => return Ok(NatSet::leaf(SetNode::Cofinite(v.clone()))),
            SetNode::Cofinite(v) => return Ok(NatSet::leaf(SetNode::Finite(v.clone()))),
            _ => {}
        }
        let d = a.depth + 1;
        Self::branch(SetNode::Complement(a), d)
    }

    /// `a \ b`.
    pub fn difference(a: NatSet, b: NatSet) -> Result<NatSet> {
        Self::intersection(a, Self::complement(b)?)
    }

    pub fn union_all(sets: impl IntoIterator<Item = NatSet>) -> Result<NatSet> {
        let mut sets: Vec<NatSet> = sets.into_iter().collect();
        if sets.is_empty() {
            return Ok(Self::empty());
        }
        // balanced fold keeps depth logarithmic
        while sets.len() > 1 {
            let mut next = Vec::with_capacity(sets.len().div_ceil(2));
            let mut it = sets.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(Self::union(a, b)?),
                    None => next.push(a),
                }
            }
            sets = next;
        }
        Ok(sets.pop().unwrap())
    }

    pub fn node(&self) -> &SetNode {
        &self.node
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Largest `N` for which `prefix(N)` can succeed, if bounded.
    pub fn known_horizon(&self) -> Option<u64> {
        match self.node() {
            SetNode::PrefixBitmap(b) => Some(b.len() as u64),
            SetNode::BlockUnion { blocks, .. } => blocks.known_end(),
            SetNode::Union(a, b) | SetNode::Intersection(a, b) => match (a.known_horizon(), b.known_horizon()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            },
            SetNode::Complement(a) => a.known_horizon(),
            _ => None,
        }
    }

    pub fn member(&self, n: u64) -> Tri {
        if n == 0 {
            return Tri::False;
        }
        match self.node() {
            SetNode::Finite(v) => Tri::from(v.binary_search(&n).is_ok()),
            SetNode::Cofinite(v) => Tri::from(v.binary_search(&n).is_err()),
            SetNode::Progression { first, step } => Tri::from(n >= *first && (n - first) % step == 0),
            SetNode::PowersOf { base } => Tri::from(is_power_of(n, *base)),
            SetNode::BlockUnion { blocks, selector } => match blocks.locate(n) {
                Locate::Before => Tri::False,
                Locate::Block(k) => selector.selects(k),
                Locate::Beyond => Tri::Unknown,
            },
            SetNode::PrefixBitmap(bits) => {
                if n as usize <= bits.len() {
                    Tri::from(bits[n as usize - 1])
                } else {
                    Tri::Unknown
                }
            }
            SetNode::Union(a, b) => a.member(n).or(b.member(n)),
            SetNode::Intersection(a, b) => a.member(n).and(b.member(n)),
            SetNode::Complement(a) => a.member(n).not(),
        }
    }

    /// Indicator of `[1, n]`.
    pub fn prefix(&self, n: u64) -> Result<Bits> {
        self.window(1, n)
    }

    /// Indicator of `[lo, hi]`; bit `i` describes `lo + i`. Empty when `hi < lo`.
    pub fn window(&self, lo: u64, hi: u64) -> Result<Bits> {
        let lo = lo.max(1);
        if hi < lo {
            return Ok(Bits::new());
        }
        let len = (hi - lo + 1) as usize;
        let mut out = bitvec![u64, Lsb0; 0; len];
        match self.node() {
            SetNode::Finite(v) => {
                let start = v.partition_point(|&m| m < lo);
                for &m in v[start..].iter().take_while(|&&m| m <= hi) {
                    out.set((m - lo) as usize, true);
                }
            }
            SetNode::Cofinite(v) => {
                out.fill(true);
                let start = v.partition_point(|&m| m < lo);
                for &m in v[start..].iter().take_while(|&&m| m <= hi) {
                    out.set((m - lo) as usize, false);
                }
            }
            SetNode::Progression { first, step } => {
                let mut m = if lo <= *first {
                    *first
                } else {
                    first + (lo - first).div_ceil(*step) * step
                };
                while m <= hi {
                    out.set((m - lo) as usize, true);
                    match m.checked_add(*step) {
                        Some(x) => m = x,
                        None => break,
                    }
                }
            }
            SetNode::PowersOf { base } => {
                let mut p = *base;
                while p <= hi {
                    if p >= lo {
                        out.set((p - lo) as usize, true);
                    }
                    match p.checked_mul(*base) {
                        Some(x) => p = x,
                        None => break,
                    }
                }
            }
            SetNode::BlockUnion { blocks, selector } => {
                let mut k = match blocks.locate(lo) {
                    Locate::Before => 1,
                    Locate::Block(k) => k,
                    Locate::Beyond => return Err(Error::horizon(hi, lo.saturating_sub(1))),
                };
                loop {
                    let Some((s, e)) = blocks.block(k) else {
                        let known = blocks.iota(k).map(|i| i - 1).unwrap_or(0);
                        if known >= hi {
                            break;
                        }
                        return Err(Error::horizon(hi, known));
                    };
                    if s > hi {
                        break;
                    }
                    match selector.selects(k) {
                        Tri::True => {
                            let a = s.max(lo);
                            let b = (e - 1).min(hi);
                            if a <= b {
                                out[(a - lo) as usize..=(b - lo) as usize].fill(true);
                            }
                        }
                        Tri::False => {}
                        Tri::Unknown => return Err(Error::horizon(hi, s.saturating_sub(1))),
                    }
                    k += 1;
                }
            }
            SetNode::PrefixBitmap(bits) => {
                if hi as usize > bits.len() {
                    return Err(Error::horizon(hi, bits.len() as u64));
                }
                out.copy_from_bitslice(&bits[(lo - 1) as usize..hi as usize]);
            }
            SetNode::Union(a, b) => {
                out = a.window(lo, hi)?;
                out |= b.window(lo, hi)?;
            }
            SetNode::Intersection(a, b) => {
                out = a.window(lo, hi)?;
                out &= b.window(lo, hi)?;
            }
            SetNode::Complement(a) => {
                out = !a.window(lo, hi)?;
            }
        }
        Ok(out)
    }

    /// `|s ∩ [1, n]|`, closed form for the simple leaves.
    pub fn count_up_to(&self, n: u64) -> Result<u64> {
        match self.node() {
            SetNode::Finite(v) => Ok(v.partition_point(|&m| m <= n) as u64),
            SetNode::Cofinite(v) => Ok(n - v.partition_point(|&m| m <= n) as u64),
            SetNode::Progression { first, step } => Ok(if n >= *first { (n - first) / step + 1 } else { 0 }),
            SetNode::PowersOf { base } => {
                let mut c = 0;
                let mut p = *base;
                while p <= n {
                    c += 1;
                    match p.checked_mul(*base) {
                        Some(x) => p = x,
                        None => break,
                    }
                }
                Ok(c)
            }
            _ => {
                const CHUNK: u64 = 1 << 22;
                let mut total = 0u64;
                let mut lo = 1u64;
                while lo <= n {
                    let hi = n.min(lo.saturating_add(CHUNK - 1));
                    total += self.window(lo, hi)?.count_ones() as u64;
                    if hi == u64::MAX {
                        break;
                    }
                    lo = hi + 1;
                }
                Ok(total)
            }
        }
    }

    /// Smallest member `m` with `after < m <= limit`.
    pub fn next_member(&self, after: u64, limit: u64) -> Result<Option<u64>> {
        if after >= limit {
            return Ok(None);
        }
        let found = match self.node() {
            SetNode::Finite(v) => v.get(v.partition_point(|&m| m <= after)).copied(),
            SetNode::Cofinite(v) => {
                let mut c = after + 1;
                let mut i = v.partition_point(|&m| m < c);
                while i < v.len() && v[i] == c {
                    c += 1;
                    i += 1;
                }
                Some(c)
            }
            SetNode::Progression { first, step } => {
                if after < *first {
                    Some(*first)
                } else {
                    let k = (after - first) / step + 1;
                    k.checked_mul(*step).and_then(|x| x.checked_add(*first))
                }
            }
            SetNode::PowersOf { base } => {
                let mut p = *base;
                loop {
                    if p > after {
                        break Some(p);
                    }
                    match p.checked_mul(*base) {
                        Some(x) => p = x,
                        None => break None,
                    }
                }
            }
            SetNode::PrefixBitmap(bits) => {
                let start = after as usize;
                let end = (limit as usize).min(bits.len());
                if start < end {
                    if let Some(i) = bits[start..end].first_one() {
                        return Ok(Some((start + i + 1) as u64));
                    }
                }
                if limit as usize > bits.len() {
                    return Err(Error::horizon(limit, bits.len() as u64));
                }
                None
            }
            SetNode::BlockUnion { blocks, selector } => {
                let mut m = after + 1;
                loop {
                    if m > limit {
                        break None;
                    }
                    match blocks.locate(m) {
                        Locate::Before => m = blocks.iota(1).unwrap_or(m + 1),
                        Locate::Block(k) => match selector.selects(k) {
                            Tri::True => break Some(m),
                            Tri::False => match blocks.block(k) {
                                Some((_, e)) => m = e,
                                None => return Err(Error::horizon(limit, m)),
                            },
                            Tri::Unknown => return Err(Error::horizon(limit, m)),
                        },
                        Locate::Beyond => return Err(Error::horizon(limit, m)),
                    }
                }
            }
            SetNode::Union(a, b) => match (a.next_member(after, limit)?, b.next_member(after, limit)?) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            },
            SetNode::Intersection(a, b) => {
                let mut cur = after;
                loop {
                    match a.next_member(cur, limit)? {
                        None => break None,
                        Some(m) => match b.member(m) {
                            Tri::True => break Some(m),
                            Tri::False => cur = m,
                            Tri::Unknown => return Err(Error::horizon(limit, m - 1)),
                        },
                    }
                }
            }
            SetNode::Complement(_) => {
                let mut lo = after + 1;
                let mut chunk = 64u64;
                loop {
                    if lo > limit {
                        break None;
                    }
                    let hi = limit.min(lo.saturating_add(chunk - 1));
                    if let Some(i) = self.window(lo, hi)?.first_one() {
                        break Some(lo + i as u64);
                    }
                    if hi == u64::MAX {
                        break None;
                    }
                    lo = hi + 1;
                    chunk = (chunk * 2).min(1 << 20);
                }
            }
        };
        Ok(found.filter(|&m| m <= limit))
    }

    /// Members in `[lo, hi]`, ascending.
    pub fn members_in(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        let lo = lo.max(1);
        Ok(self.window(lo, hi)?.iter_ones().map(|i| lo + i as u64).collect())
    }

    pub fn is_infinite(&self) -> Tri {
        match self.node() {
            SetNode::Finite(_) => Tri::False,
            SetNode::Cofinite(_) | SetNode::Progression { .. } | SetNode::PowersOf { .. } => Tri::True,
            SetNode::BlockUnion { selector, .. } => selector.is_infinite(),
            SetNode::PrefixBitmap(_) => Tri::Unknown,
            SetNode::Union(a, b) => {
                let t = a.is_infinite().or(b.is_infinite());
                if t == Tri::Unknown {
                    self.periodic_infinite()
                } else {
                    t
                }
            }
            SetNode::Intersection(a, b) => {
                if a.is_infinite().is_false() || b.is_infinite().is_false() {
                    Tri::False
                } else {
                    self.periodic_infinite()
                }
            }
            SetNode::Complement(a) => {
                if a.is_infinite().is_false() {
                    Tri::True
                } else {
                    self.periodic_infinite()
                }
            }
        }
    }

    fn periodic_infinite(&self) -> Tri {
        match self.periodic_form() {
            Some(p) => Tri::from(!p.is_eventually_empty()),
            None => Tri::Unknown,
        }
    }

    /// Eventually periodic form for trees built from finite, cofinite,
    /// progression and singleton-block leaves.
    pub fn periodic_form(&self) -> Option<Periodic> {
        let (offset, period) = self.offset_period()?;
        let residues = (0..period)
            .map(|i| self.member(offset + i).is_true())
            .collect();
        Some(Periodic { offset, period, residues })
    }

    fn offset_period(&self) -> Option<(u64, u64)> {
        match self.node() {
            SetNode::Finite(v) | SetNode::Cofinite(v) => Some((v.last().map_or(1, |m| m + 1), 1)),
            SetNode::Progression { first, step } => (*step <= MAX_PERIOD).then_some((*first, *step)),
            SetNode::BlockUnion { blocks, selector } => {
                if *blocks.generator() != crate::meager::intervals::IotaGenerator::Singletons {
                    return None;
                }
                match selector {
                    BlockSelector::All => Some((1, 1)),
                    BlockSelector::EveryKth(k) => (*k <= MAX_PERIOD).then_some((1, *k)),
                    BlockSelector::IndexSet(s) => s.offset_period(),
                }
            }
            SetNode::PowersOf { .. } | SetNode::PrefixBitmap(_) => None,
            SetNode::Union(a, b) | SetNode::Intersection(a, b) => {
                let (oa, pa) = a.offset_period()?;
                let (ob, pb) = b.offset_period()?;
                let p = pa.lcm(&pb);
                (p <= MAX_PERIOD).then_some((oa.max(ob), p))
            }
            SetNode::Complement(a) => a.offset_period(),
        }
    }

    /// Replaces every subtree for which `is_null` holds by the empty set.
    /// The result differs from `self` only inside the union of those subtrees.
    pub fn without_null(&self, is_null: &dyn Fn(&NatSet) -> bool) -> Result<NatSet> {
        if is_null(self) {
            return Ok(NatSet::empty());
        }
        match self.node() {
            SetNode::Union(a, b) => NatSet::union(a.without_null(is_null)?, b.without_null(is_null)?),
            SetNode::Intersection(a, b) => NatSet::intersection(a.without_null(is_null)?, b.without_null(is_null)?),
            SetNode::Complement(a) => NatSet::complement(a.without_null(is_null)?),
            _ => Ok(self.clone()),
        }
    }
}

pub fn is_power_of(n: u64, base: u64) -> bool {
    if n < base {
        return false;
    }
    let mut m = n;
    while m % base == 0 {
        m /= base;
    }
    m == 1
}

/// 2-adic valuation of a positive integer.
pub fn nu2(n: u64) -> u32 {
    debug_assert!(n > 0);
    n.trailing_zeros()
}

impl fmt::Debug for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, v: &[u64]) -> fmt::Result {
            let shown: Vec<String> = v.iter().take(8).map(|m| m.to_string()).collect();
            write!(f, "{{{}{}}}", shown.join(","), if v.len() > 8 { ",…" } else { "" })
        }
        match self.node() {
            SetNode::Finite(v) => {
                write!(f, "finite")?;
                list(f, v)
            }
            SetNode::Cofinite(v) => {
                write!(f, "cofinite")?;
                list(f, v)
            }
            SetNode::Progression { first, step } => write!(f, "prog({first},{step})"),
            SetNode::PowersOf { base } => write!(f, "powers({base})"),
            SetNode::BlockUnion { blocks, selector } => {
                let sel = match selector {
                    BlockSelector::All => "all".to_string(),
                    BlockSelector::EveryKth(k) => format!("every-{k}"),
                    BlockSelector::IndexSet(s) => format!("index {s}"),
                };
                write!(f, "blocks[{}; {}]", blocks.describe(), sel)
            }
            SetNode::PrefixBitmap(b) => write!(f, "bitmap[{}; {} ones]", b.len(), b.count_ones()),
            SetNode::Union(a, b) => write!(f, "({a} ∪ {b})"),
            SetNode::Intersection(a, b) => write!(f, "({a} ∩ {b})"),
            SetNode::Complement(a) => write!(f, "¬{a}"),
        }
    }
}

// ---- JSON expression tree ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetExpr {
    Finite { members: Vec<u64> },
    Cofinite { excluded: Vec<u64> },
    Progression { first: u64, step: u64 },
    PowersOf { base: u64 },
    BlockUnion { witness: WitnessIntervals, selector: SelectorExpr },
    Bitmap { horizon: u64, ones: Vec<u64> },
    Union { left: Box<SetExpr>, right: Box<SetExpr> },
    Intersection { left: Box<SetExpr>, right: Box<SetExpr> },
    Complement { of: Box<SetExpr> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SelectorExpr {
    All,
    EveryKth { k: u64 },
    IndexSet { set: Box<SetExpr> },
}

impl From<&NatSet> for SetExpr {
    fn from(s: &NatSet) -> Self {
        match s.node() {
            SetNode::Finite(v) => SetExpr::Finite { members: v.clone() },
            SetNode::Cofinite(v) => SetExpr::Cofinite { excluded: v.clone() },
            SetNode::Progression { first, step } => SetExpr::Progression { first: *first, step: *step },
            SetNode::PowersOf { base } => SetExpr::PowersOf { base: *base },
            SetNode::BlockUnion { blocks, selector } => SetExpr::BlockUnion {
                witness: (**blocks).clone(),
                selector: match selector {
                    BlockSelector::All => SelectorExpr::All,
                    BlockSelector::EveryKth(k) => SelectorExpr::EveryKth { k: *k },
                    BlockSelector::IndexSet(s) => SelectorExpr::IndexSet { set: Box::new(s.into()) },
                },
            },
            SetNode::PrefixBitmap(b) => SetExpr::Bitmap {
                horizon: b.len() as u64,
                ones: b.iter_ones().map(|i| i as u64 + 1).collect(),
            },
            SetNode::Union(a, b) => SetExpr::Union { left: Box::new(a.into()), right: Box::new(b.into()) },
            SetNode::Intersection(a, b) => SetExpr::Intersection { left: Box::new(a.into()), right: Box::new(b.into()) },
            SetNode::Complement(a) => SetExpr::Complement { of: Box::new(a.into()) },
        }
    }
}

impl TryFrom<SetExpr> for NatSet {
    type Error = Error;

    fn try_from(e: SetExpr) -> Result<NatSet> {
        match e {
            SetExpr::Finite { members } => NatSet::finite(members),
            SetExpr::Cofinite { excluded } => NatSet::cofinite(excluded),
            SetExpr::Progression { first, step } => NatSet::progression(first, step),
            SetExpr::PowersOf { base } => NatSet::powers_of(base),
            SetExpr::BlockUnion { witness, selector } => {
                let selector = match selector {
                    SelectorExpr::All => BlockSelector::All,
                    SelectorExpr::EveryKth { k } => BlockSelector::EveryKth(k),
                    SelectorExpr::IndexSet { set } => BlockSelector::IndexSet(NatSet::try_from(*set)?),
                };
                NatSet::block_union(Arc::new(witness), selector)
            }
            SetExpr::Bitmap { horizon, ones } => NatSet::bitmap_from_members(horizon, ones),
            SetExpr::Union { left, right } => NatSet::union(NatSet::try_from(*left)?, NatSet::try_from(*right)?),
            SetExpr::Intersection { left, right } => {
                NatSet::intersection(NatSet::try_from(*left)?, NatSet::try_from(*right)?)
            }
            SetExpr::Complement { of } => NatSet::complement(NatSet::try_from(*of)?),
        }
    }
}

impl Serialize for NatSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetExpr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for NatSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = SetExpr::deserialize(d)?;
        NatSet::try_from(e).map_err(serde::de::Error::custom)
    }
}
