//! Lower semicontinuous submeasures and the exhaustive norm.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meager::intervals::{IotaGenerator, WitnessIntervals};
use crate::natset::{BlockSelector, NatSet, SetNode};
use crate::rational::{q, q_int, q_ratio, serde_q, serde_q_vec, Q};

/// Partition of the positive integers into consecutive finite blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockLaw {
    /// `[2^{n-1}, 2^n)`.
    Dyadic,
    /// `[b^{n-1}, b^n)`.
    Geometric { base: u64 },
    /// Block `n` ends (exclusive) at `ends[n-1]`; past the table each end doubles.
    Explicit { ends: Vec<u64> },
}

impl BlockLaw {
    /// `(n, start, end_exclusive)` of the block holding `a`.
    pub fn block_of(&self, a: u64) -> (u64, u64, u128) {
        debug_assert!(a >= 1);
        match self {
            BlockLaw::Dyadic => {
                let n = 64 - u64::from(a.leading_zeros());
                (n, 1u64 << (n - 1), 1u128 << n)
            }
            BlockLaw::Geometric { base } => {
                let b = u128::from(*base);
                let (mut n, mut lo) = (1u64, 1u128);
                while lo * b <= u128::from(a) {
                    lo *= b;
                    n += 1;
                }
                (n, lo as u64, lo * b)
            }
            BlockLaw::Explicit { ends } => {
                let i = ends.partition_point(|&e| e <= a);
                if i < ends.len() {
                    let start = if i == 0 { 1 } else { ends[i - 1] };
                    return (i as u64 + 1, start, u128::from(ends[i]));
                }
                let (mut n, mut start) = (ends.len() as u64, u128::from(*ends.last().unwrap_or(&1)));
                if ends.is_empty() {
                    // degenerate table behaves like the dyadic law
                    return BlockLaw::Dyadic.block_of(a);
                }
                loop {
                    n += 1;
                    let end = start * 2;
                    if u128::from(a) < end {
                        return (n, start as u64, end);
                    }
                    start = end;
                }
            }
        }
    }

    /// `(start, end_exclusive)` of block `n`.
    pub fn block(&self, n: u64) -> (u64, u128) {
        match self {
            BlockLaw::Dyadic => (1u64 << (n - 1), 1u128 << n),
            BlockLaw::Geometric { base } => {
                let b = u128::from(*base);
                let lo = b.pow(n as u32 - 1);
                (lo as u64, lo * b)
            }
            BlockLaw::Explicit { ends } => {
                let i = n as usize - 1;
                if i < ends.len() {
                    (if i == 0 { 1 } else { ends[i - 1] }, u128::from(ends[i]))
                } else if ends.is_empty() {
                    BlockLaw::Dyadic.block(n)
                } else {
                    let last = u128::from(*ends.last().unwrap());
                    let extra = (i - ends.len()) as u32;
                    let s = last << extra;
                    (s as u64, s * 2)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BlockLaw::Dyadic => Ok(()),
            BlockLaw::Geometric { base } if *base >= 2 => Ok(()),
            BlockLaw::Geometric { .. } => Err(Error::InvalidParameter("geometric blocks need base >= 2".into())),
            BlockLaw::Explicit { ends } => {
                if ends.first().is_some_and(|&e| e < 2) || ends.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidParameter("block ends must be increasing and >= 2".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightLaw {
    /// `w_a = 1/a`.
    Harmonic,
    /// `w_a = 1/a^p` with `p >= 2`.
    InversePower { p: u32 },
    Constant {
        #[serde(with = "serde_q")]
        value: Q,
    },
}

impl WeightLaw {
    pub fn weight(&self, a: u64) -> Q {
        match self {
            WeightLaw::Harmonic => q_ratio(1, a),
            WeightLaw::InversePower { p } => Q::new(BigInt::one(), num_traits::pow(BigInt::from(a), *p as usize)),
            WeightLaw::Constant { value } => value.clone(),
        }
    }

    /// Total weight of the positive integers is finite.
    pub fn summable(&self) -> bool {
        matches!(self, WeightLaw::InversePower { .. }) || matches!(self, WeightLaw::Constant { value } if value.is_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Lscsm {
    /// `sup_n w_n |A ∩ D_n| / |D_n|`.
    DensityFamily {
        blocks: BlockLaw,
        #[serde(with = "serde_q_vec", default)]
        weights: Vec<Q>,
        #[serde(with = "serde_q")]
        tail_weight: Q,
    },
    /// `sup_n |A ∩ [1,n]| / n`.
    RunningDensity,
    /// `min(cap, scale * sum_{a in A} w_a)`.
    WeightedSum {
        law: WeightLaw,
        #[serde(with = "serde_q")]
        cap: Q,
        #[serde(with = "serde_q")]
        scale: Q,
    },
    /// `min(1, |A|)`.
    CountingCap,
}

/// Enclosure `lo <= phi <= hi`; `lo == hi` when exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiBound {
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

impl PhiBound {
    pub fn exact(v: Q) -> Self {
        PhiBound { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn value(&self) -> Option<&Q> {
        self.is_exact().then_some(&self.lo)
    }
}

impl Lscsm {
    pub fn density_family(blocks: BlockLaw, weights: Vec<Q>, tail_weight: Q) -> Result<Lscsm> {
        blocks.validate()?;
        if weights.iter().any(|w| *w <= Q::zero()) || tail_weight <= Q::zero() {
            return Err(Error::InvalidParameter("density weights must be positive".into()));
        }
        Ok(Lscsm::DensityFamily { blocks, weights, tail_weight })
    }

    pub fn weighted_sum(law: WeightLaw, cap: Q) -> Result<Lscsm> {
        if cap <= Q::zero() {
            return Err(Error::InvalidParameter("cap must be positive".into()));
        }
        match &law {
            WeightLaw::InversePower { p } if *p < 2 => {
                return Err(Error::InvalidParameter("inverse power needs p >= 2".into()))
            }
            WeightLaw::Constant { value } if *value < Q::zero() => {
                return Err(Error::InvalidParameter("weights must be nonnegative".into()))
            }
            _ => {}
        }
        Ok(Lscsm::WeightedSum { law, cap, scale: Q::one() })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Lscsm::DensityFamily { blocks, weights, tail_weight } => {
                Lscsm::density_family(blocks.clone(), weights.clone(), tail_weight.clone()).map(|_| ())
            }
            Lscsm::WeightedSum { law, cap, scale } => {
                if *scale <= Q::zero() {
                    return Err(Error::InvalidParameter("scale must be positive".into()));
                }
                Lscsm::weighted_sum(law.clone(), cap.clone()).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Lscsm::DensityFamily { .. } => "DensityFamily",
            Lscsm::RunningDensity => "RunningDensity",
            Lscsm::WeightedSum { .. } => "WeightedSum",
            Lscsm::CountingCap => "CountingCap",
        }
    }

    /// Rescaled so the norm of the whole of `N` is 1. Summable weights have
    /// zero norm everywhere and are left alone.
    pub fn normalized(&self) -> Lscsm {
        match self {
            Lscsm::DensityFamily { blocks, weights, tail_weight } => Lscsm::DensityFamily {
                blocks: blocks.clone(),
                weights: weights.iter().map(|w| w / tail_weight).collect(),
                tail_weight: Q::one(),
            },
            Lscsm::WeightedSum { law, cap, scale } if !law.summable() => Lscsm::WeightedSum {
                law: law.clone(),
                cap: Q::one(),
                scale: scale / cap,
            },
            other => other.clone(),
        }
    }

    pub fn accumulator(&self) -> PhiAccumulator<'_> {
        let state = match self {
            Lscsm::RunningDensity => Acc::Running { count: 0, best: (0, 1) },
            Lscsm::CountingCap => Acc::Counting { count: 0 },
            Lscsm::DensityFamily { .. } => Acc::Family { open: None, best: Q::zero() },
            Lscsm::WeightedSum { law, cap, scale } => Acc::Weighted(Box::new(WeightedAcc::new(law, cap, scale))),
        };
        PhiAccumulator { m: self, state, target: None }
    }

    /// Accumulator that also tracks whether the value has reached `q`.
    pub fn accumulator_to(&self, q: &Q) -> PhiAccumulator<'_> {
        let mut acc = self.accumulator();
        let frac = match (q.numer().to_u128(), q.denom().to_u128()) {
            (Some(n), Some(d)) if n < 1 << 64 && d < 1 << 64 => Some((n, d)),
            _ => None,
        };
        let fixed = (q * Q::from_integer(BigInt::one() << FRAC_BITS)).ceil().to_integer().to_u128();
        acc.target = Some(Target { q: q.clone(), frac, fixed, needed: u128::MAX, reached: !q.is_positive() });
        acc
    }

    /// `phi` of an explicit finite set, exactly.
    pub fn phi_exact_members(&self, members: &[u64]) -> Q {
        let mut v: Vec<u64> = members.iter().copied().filter(|&a| a > 0).collect();
        v.sort_unstable();
        v.dedup();
        if let Lscsm::WeightedSum { law, cap, scale } = self {
            let mut total = Q::zero();
            for &a in &v {
                total += law.weight(a);
                if &total * scale >= *cap {
                    return cap.clone();
                }
            }
            return total * scale;
        }
        let mut acc = self.accumulator();
        for a in v {
            acc.push(a);
        }
        acc.bound().lo
    }

    /// Enclosure of `phi` on an increasing stream of members.
    pub fn phi_bound_members(&self, members: impl IntoIterator<Item = u64>) -> PhiBound {
        let mut acc = self.accumulator();
        for a in members {
            acc.push(a);
            if acc.saturated() {
                break;
            }
        }
        acc.bound()
    }

    /// `phi(s ∩ [1, n])`, exactly.
    pub fn phi(&self, s: &NatSet, n: u64) -> Result<Q> {
        let b = self.phi_window(s, 1, n)?;
        if b.is_exact() {
            return Ok(b.lo);
        }
        Ok(self.phi_exact_members(&s.members_in(1, n)?))
    }

    /// Enclosure of `phi(s ∩ [lo, hi])`.
    pub fn phi_window(&self, s: &NatSet, lo: u64, hi: u64) -> Result<PhiBound> {
        let lo = lo.max(1);
        let bits = s.window(lo, hi)?;
        Ok(self.phi_bound_members(bits.iter_ones().map(|i| lo + i as u64)))
    }

    /// Smallest `m` with `phi({a}) < q` for every `a >= m`, when one exists.
    pub fn singleton_floor(&self, q: &Q) -> Option<u64> {
        let ceil_inv = |x: Q| -> Option<u64> { x.floor().to_integer().to_u64().map(|v| v + 1) };
        match self {
            Lscsm::RunningDensity => ceil_inv(Q::one() / q),
            Lscsm::CountingCap => None,
            Lscsm::WeightedSum { law, cap, scale } => {
                if cap < q {
                    return Some(1);
                }
                match law {
                    WeightLaw::Harmonic => ceil_inv(scale / q),
                    WeightLaw::InversePower { p } => {
                        let mut m = 1u64;
                        while scale * law.weight(m) >= *q {
                            m = m.checked_mul(2)?;
                        }
                        let _ = p;
                        Some(m)
                    }
                    WeightLaw::Constant { value } => (scale * value < *q).then_some(1),
                }
            }
            Lscsm::DensityFamily { blocks, weights, tail_weight } => {
                let explicit = match blocks {
                    BlockLaw::Explicit { ends } => ends.len(),
                    _ => 0,
                };
                let mut n = weights.len().max(explicit) as u64 + 1;
                loop {
                    let (start, end) = blocks.block(n);
                    let len = end - u128::from(start);
                    if len > 1u128 << 62 {
                        return None;
                    }
                    if *tail_weight < q * q_int(len as u64) {
                        return Some(start);
                    }
                    n += 1;
                }
            }
        }
    }

    fn weight_of_block(&self, n: u64) -> Q {
        match self {
            Lscsm::DensityFamily { weights, tail_weight, .. } => {
                weights.get(n as usize - 1).cloned().unwrap_or_else(|| tail_weight.clone())
            }
            _ => Q::one(),
        }
    }

    /// Leaves whose norm is zero under every structure this submeasure sees.
    pub fn is_null_leaf(&self, s: &NatSet) -> bool {
        if let Lscsm::WeightedSum { law, .. } = self {
            if law.summable() {
                return true;
            }
        }
        match s.node() {
            SetNode::Finite(_) => true,
            SetNode::PowersOf { .. } => !matches!(
                self,
                Lscsm::CountingCap | Lscsm::WeightedSum { law: WeightLaw::Constant { .. }, .. }
            ),
            SetNode::BlockUnion { selector, .. } => selector.is_infinite().is_false(),
            _ => false,
        }
    }

    /// Norm of the whole space after normalization-independent scaling.
    fn full_norm(&self) -> Q {
        match self {
            Lscsm::DensityFamily { tail_weight, .. } => tail_weight.clone(),
            Lscsm::RunningDensity | Lscsm::CountingCap => Q::one(),
            Lscsm::WeightedSum { law, cap, .. } => {
                if law.summable() {
                    Q::zero()
                } else {
                    cap.clone()
                }
            }
        }
    }

    /// Norm of an eventually periodic set of density `rho`.
    fn periodic_norm(&self, rho: &Q) -> Q {
        match self {
            Lscsm::RunningDensity => rho.clone(),
            Lscsm::DensityFamily { tail_weight, .. } => tail_weight * rho,
            _ => {
                if rho.is_zero() {
                    Q::zero()
                } else {
                    self.full_norm()
                }
            }
        }
    }

    /// Exact or certified-lower information about `‖s‖`.
    /// `certifies` reports whether a witness's blocks carry mass `q0` under this submeasure.
    pub fn norm_info(&self, s: &NatSet, certifies: &dyn Fn(&WitnessIntervals) -> bool) -> NormInfo {
        if self.is_null_leaf(s) {
            return NormInfo::exact(Q::zero());
        }
        if let Ok(stripped) = s.without_null(&|t| self.is_null_leaf(t)) {
            if let Some(p) = stripped.periodic_form() {
                let rho = q_ratio(p.count(), p.period);
                return NormInfo::exact(self.periodic_norm(&rho));
            }
        }
        match s.node() {
            SetNode::Union(a, b) => {
                let (ia, ib) = (self.norm_info(a, certifies), self.norm_info(b, certifies));
                if ia.is_zero() {
                    return ib;
                }
                if ib.is_zero() {
                    return ia;
                }
                NormInfo { exact: None, lower: max_opt(ia.floor(), ib.floor()) }
            }
            SetNode::Intersection(a, b) => {
                let (ia, ib) = (self.norm_info(a, certifies), self.norm_info(b, certifies));
                if ia.is_zero() || ib.is_zero() {
                    return NormInfo::exact(Q::zero());
                }
                // removing a null set leaves the norm unchanged
                if let SetNode::Complement(c) = b.node() {
                    if self.norm_info(c, certifies).is_zero() {
                        return ia;
                    }
                }
                if let SetNode::Complement(c) = a.node() {
                    if self.norm_info(c, certifies).is_zero() {
                        return ib;
                    }
                }
                NormInfo::default()
            }
            SetNode::BlockUnion { blocks, selector } => self.block_union_norm(blocks, selector, certifies),
            _ => NormInfo::default(),
        }
    }

    fn block_union_norm(
        &self,
        w: &WitnessIntervals,
        selector: &BlockSelector,
        certifies: &dyn Fn(&WitnessIntervals) -> bool,
    ) -> NormInfo {
        if !selector.is_infinite().is_true() {
            return NormInfo::default();
        }
        match self {
            Lscsm::CountingCap => return NormInfo::exact(Q::one()),
            Lscsm::WeightedSum { law, .. } if matches!(law, WeightLaw::Constant { .. }) => {
                return NormInfo::exact(self.full_norm())
            }
            _ => {}
        }
        if let IotaGenerator::DensityRatio { first: 2, q: ratio } = w.generator() {
            if *ratio == q(1, 2) {
                match self {
                    Lscsm::RunningDensity => {
                        if let Some(k) = selector_period(selector) {
                            let two_k = q_int(1u64 << k.min(62));
                            return NormInfo::exact(&two_k / q_int(2) / (&two_k - Q::one()));
                        }
                    }
                    // blocks coincide with the dyadic partition shifted by one
                    Lscsm::DensityFamily { blocks: BlockLaw::Dyadic, tail_weight, .. } => {
                        return NormInfo::exact(tail_weight.clone());
                    }
                    _ => {}
                }
            }
        }
        if let (Lscsm::WeightedSum { law: WeightLaw::Harmonic, .. }, IotaGenerator::DensityRatio { .. }) =
            (self, w.generator())
        {
            // each block carries harmonic mass >= q0, so the sum diverges
            return NormInfo::exact(self.full_norm());
        }
        if certifies(w) {
            return NormInfo { exact: None, lower: Some(w.q0().clone()) };
        }
        NormInfo::default()
    }

    /// Norm estimate at horizon `n` using the given cut points.
    pub fn norm_estimate(
        &self,
        s: &NatSet,
        n: u64,
        cuts: &[u64],
        certifies: &dyn Fn(&WitnessIntervals) -> bool,
    ) -> Result<NormEstimate> {
        if cuts.is_empty() || cuts.windows(2).any(|w| w[0] >= w[1]) || *cuts.last().unwrap() >= n {
            return Err(Error::InvalidParameter("cut points must increase and stay below the horizon".into()));
        }
        let info = self.norm_info(s, certifies);
        let horizon = match s.known_horizon() {
            Some(h) if h < n && h > *cuts.last().unwrap() => h,
            _ => n,
        };
        let lo = cuts[0] + 1;
        let bits = s.window(lo, horizon)?;
        let mut accs: Vec<PhiAccumulator<'_>> = cuts.iter().map(|_| self.accumulator()).collect();
        for i in bits.iter_ones() {
            let a = lo + i as u64;
            for (acc, &t) in accs.iter_mut().zip(cuts) {
                if a > t && !acc.saturated() {
                    acc.push(a);
                }
            }
        }
        let values: Vec<CutValue> = accs
            .iter()
            .zip(cuts)
            .map(|(acc, &t)| {
                let b = acc.bound();
                CutValue { cut: t, lo: b.lo, hi: b.hi }
            })
            .collect();
        let trend = Trend::classify(&values[values.len().saturating_sub(2)].lo, &values[values.len() - 1].lo);
        let numeric = values[values.len() - 1].lo.clone();
        Ok(NormEstimate {
            exact: info.exact,
            certified_lower: info.lower,
            numeric,
            horizon,
            cuts: values,
            trend,
        })
    }
}

fn max_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x >= y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `k` when the selector picks exactly the block indices in one residue class mod `k`.
fn selector_period(sel: &BlockSelector) -> Option<u64> {
    match sel {
        BlockSelector::All => Some(1),
        BlockSelector::EveryKth(k) => Some(*k),
        BlockSelector::IndexSet(s) => match s.node() {
            SetNode::Progression { step, .. } => Some(*step),
            SetNode::Cofinite(_) => Some(1),
            _ => None,
        },
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormInfo {
    pub exact: Option<Q>,
    pub lower: Option<Q>,
}

impl NormInfo {
    fn exact(v: Q) -> Self {
        NormInfo { exact: Some(v), lower: None }
    }

    fn is_zero(&self) -> bool {
        self.exact.as_ref().is_some_and(|v| v.is_zero())
    }

    fn floor(&self) -> Option<Q> {
        self.exact.clone().or_else(|| self.lower.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Decaying,
    Stable,
    Mixed,
}

impl Trend {
    /// Compares the last two tail windows.
    pub fn classify(first: &Q, last: &Q) -> Trend {
        let two = q_int(2);
        if last.is_zero() || &two * last <= *first {
            Trend::Decaying
        } else if q_int(4) * last >= q_int(3) * first {
            Trend::Stable
        } else {
            Trend::Mixed
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutValue {
    pub cut: u64,
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    #[serde(with = "crate::rational::serde_q_opt")]
    pub exact: Option<Q>,
    #[serde(with = "crate::rational::serde_q_opt")]
    pub certified_lower: Option<Q>,
    /// Certified lower bound of `phi` on the tail past the largest cut.
    #[serde(with = "serde_q")]
    pub numeric: Q,
    pub horizon: u64,
    pub cuts: Vec<CutValue>,
    pub trend: Trend,
}

/// Cut points used when none are given. The last cut is the largest power
/// of two not above `n/24`, so a periodic set of density `rho` keeps at least
/// `rho * 23/24` of its value in the final window, and dyadic blocks are never
/// split by it.
pub fn default_cuts(n: u64) -> Vec<u64> {
    if n >= 24 * 64 {
        let p = prev_pow2(n / 24);
        return vec![p / 64, p / 8, p];
    }
    let mut cuts = vec![0, n / 4, n / 2];
    cuts.dedup();
    cuts.retain(|&c| c < n);
    if cuts.is_empty() {
        cuts.push(0);
    }
    cuts
}

fn prev_pow2(n: u64) -> u64 {
    1u64 << (63 - n.leading_zeros())
}

// ---- incremental evaluation ----

const FRAC_BITS: u32 = 64;
const EXACT_TERMS: usize = 64;

struct WeightedAcc {
    law: WeightLaw,
    cap: Q,
    scale: Q,
    /// `floor(2^64 * scale * w_a)` summed, and the matching ceilings.
    lo: u128,
    hi: u128,
    lo_overflow: bool,
    cap_fixed: Option<u128>,
    /// Members kept while few enough to sum exactly on demand.
    small: Vec<u64>,
    terms: usize,
    scale_frac: Option<(u128, u128)>,
}

impl WeightedAcc {
    fn new(law: &WeightLaw, cap: &Q, scale: &Q) -> Self {
        let fixed = |v: &Q| -> Option<u128> {
            let scaled = v * Q::from_integer(BigInt::one() << FRAC_BITS);
            scaled.ceil().to_integer().to_u128()
        };
        let scale_frac = {
            let eff = match law {
                WeightLaw::Constant { value } => scale * value,
                _ => scale.clone(),
            };
            match (eff.numer().to_u128(), eff.denom().to_u128()) {
                (Some(n), Some(d)) if n < 1 << 60 => Some((n, d)),
                _ => None,
            }
        };
        WeightedAcc {
            law: law.clone(),
            cap: cap.clone(),
            scale: scale.clone(),
            lo: 0,
            hi: 0,
            lo_overflow: false,
            cap_fixed: fixed(cap),
            small: Vec::new(),
            terms: 0,
            scale_frac,
        }
    }

    /// Floor and ceiling of `2^64 * scale * w_a`.
    fn fixed_term(&self, a: u64) -> (u128, u128) {
        if let Some((n, d)) = self.scale_frac {
            let den = match &self.law {
                WeightLaw::Harmonic => d.checked_mul(u128::from(a)),
                WeightLaw::InversePower { p } => u128::from(a).checked_pow(*p).and_then(|x| x.checked_mul(d)),
                WeightLaw::Constant { .. } => Some(d),
            };
            if let Some(den) = den {
                if let Some(num) = n.checked_mul(1u128 << FRAC_BITS) {
                    let (f, r) = num.div_rem(&den);
                    return (f, if r == 0 { f } else { f + 1 });
                }
            } else {
                return (0, 1);
            }
        }
        let v = &self.scale * self.law.weight(a) * Q::from_integer(BigInt::one() << FRAC_BITS);
        let f = v.floor().to_integer().to_u128().unwrap_or(u128::MAX >> 1);
        let c = v.ceil().to_integer().to_u128().unwrap_or(u128::MAX >> 1);
        (f, c)
    }

    fn push(&mut self, a: u64) {
        let (f, c) = self.fixed_term(a);
        match self.lo.checked_add(f) {
            Some(v) => self.lo = v,
            None => self.lo_overflow = true,
        }
        self.hi = self.hi.saturating_add(c);
        self.terms += 1;
        if self.terms <= EXACT_TERMS {
            self.small.push(a);
        } else if !self.small.is_empty() {
            self.small = Vec::new();
        }
    }

    fn saturated(&self) -> bool {
        self.lo_overflow || self.cap_fixed.is_some_and(|c| self.lo >= c)
    }

    fn bound(&self) -> PhiBound {
        if self.saturated() {
            return PhiBound::exact(self.cap.clone());
        }
        if self.terms <= EXACT_TERMS {
            let e: Q = self.small.iter().map(|&a| self.law.weight(a)).sum();
            let v = e * &self.scale;
            return PhiBound::exact(if v >= self.cap { self.cap.clone() } else { v });
        }
        let denom = BigInt::one() << FRAC_BITS;
        let lo = Q::new(BigInt::from(self.lo), denom.clone());
        let hi = Q::new(BigInt::from(self.hi), denom);
        let clamp = |v: Q| if v >= self.cap { self.cap.clone() } else { v };
        PhiBound { lo: clamp(lo), hi: clamp(hi) }
    }
}

enum Acc {
    Running { count: u64, best: (u64, u64) },
    Counting { count: u64 },
    Family { open: Option<(u64, u64, u128, u64)>, best: Q },
    Weighted(Box<WeightedAcc>),
}

/// Evaluates `phi` on a set whose members arrive in increasing order.
pub struct PhiAccumulator<'a> {
    m: &'a Lscsm,
    state: Acc,
    target: Option<Target>,
}

/// Precomputed forms of a threshold `q` for cheap per-member checks.
struct Target {
    q: Q,
    frac: Option<(u128, u128)>,
    fixed: Option<u128>,
    /// Members of the open density block needed to reach `q`.
    needed: u128,
    reached: bool,
}

impl PhiAccumulator<'_> {
    /// Value has reached the target given to [`Lscsm::accumulator_to`].
    pub fn reached(&self) -> bool {
        self.target.as_ref().is_some_and(|t| t.reached)
    }

    fn update_target(&mut self, opened: Option<(u64, u64, u128)>, closed: Option<Q>) {
        let Some(t) = self.target.as_mut() else { return };
        if t.reached {
            return;
        }
        t.reached = match &self.state {
            Acc::Running { best, .. } => match t.frac {
                Some((n, d)) => u128::from(best.0) * d >= n * u128::from(best.1),
                None => q_ratio(best.0, best.1) >= t.q,
            },
            Acc::Counting { count } => *count >= 1 && t.q <= Q::one(),
            Acc::Weighted(w) => {
                w.saturated() && w.cap >= t.q || t.fixed.is_some_and(|f| w.lo >= f)
            }
            Acc::Family { open, .. } => {
                if closed.is_some_and(|v| v >= t.q) {
                    true
                } else {
                    if let Some((n, start, end)) = opened {
                        let len = Q::from_integer(BigInt::from(end - u128::from(start)));
                        let need = (&t.q * len / self.m.weight_of_block(n)).ceil().to_integer();
                        t.needed = need.to_u128().unwrap_or(u128::MAX);
                    }
                    open.is_some_and(|o| u128::from(o.3) >= t.needed)
                }
            }
        };
    }

    pub fn push(&mut self, a: u64) {
        let (opened, closed) = self.push_inner(a);
        if self.target.is_some() {
            self.update_target(opened, closed);
        }
    }

    fn push_inner(&mut self, a: u64) -> (Option<(u64, u64, u128)>, Option<Q>) {
        let mut opened = None;
        let mut closed = None;
        match &mut self.state {
            Acc::Running { count, best } => {
                *count += 1;
                // count/a > best.0/best.1
                if u128::from(*count) * u128::from(best.1) > u128::from(best.0) * u128::from(a) {
                    *best = (*count, a);
                }
            }
            Acc::Counting { count } => *count += 1,
            Acc::Family { open, best } => {
                let Lscsm::DensityFamily { blocks, .. } = self.m else { unreachable!() };
                match open {
                    Some((_, _, end, c)) if u128::from(a) < *end => *c += 1,
                    _ => {
                        if let Some(done) = open.take() {
                            let v = family_value(self.m, done);
                            if v > *best {
                                *best = v.clone();
                            }
                            closed = Some(v);
                        }
                        let (n, start, end) = blocks.block_of(a);
                        *open = Some((n, start, end, 1));
                        opened = Some((n, start, end));
                    }
                }
            }
            Acc::Weighted(w) => w.push(a),
        }
        (opened, closed)
    }

    /// No further member can raise the value.
    pub fn saturated(&self) -> bool {
        match &self.state {
            Acc::Counting { count } => *count >= 1,
            Acc::Weighted(w) => w.saturated(),
            _ => false,
        }
    }

    pub fn bound(&self) -> PhiBound {
        match &self.state {
            Acc::Running { best, .. } => PhiBound::exact(q_ratio(best.0, best.1)),
            Acc::Counting { count } => PhiBound::exact(q_int((*count).min(1))),
            Acc::Family { open, best } => {
                let mut v = best.clone();
                if let Some(o) = open {
                    let x = family_value(self.m, *o);
                    if x > v {
                        v = x;
                    }
                }
                PhiBound::exact(v)
            }
            Acc::Weighted(w) => w.bound(),
        }
    }
}

fn family_value(m: &Lscsm, (n, start, end, count): (u64, u64, u128, u64)) -> Q {
    let len = end - u128::from(start);
    let len_q = Q::from_integer(BigInt::from(len));
    m.weight_of_block(n) * q_int(count) / len_q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn harmonic(cap: i64) -> Lscsm {
        Lscsm::weighted_sum(WeightLaw::Harmonic, q(cap, 1)).unwrap()
    }

    fn none(_: &WitnessIntervals) -> bool {
        false
    }

    /// Direct definitions, evaluated on explicit finite sets.
    fn brute_running(members: &[u64]) -> Q {
        let max = members.iter().copied().max().unwrap_or(0);
        let mut best = Q::zero();
        for n in 1..=max {
            let c = members.iter().filter(|&&a| a <= n).count() as u64;
            let v = q_ratio(c, n);
            if v > best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn phi_examples() {
        let evens = NatSet::progression(2, 2).unwrap();
        let want = brute_running(&(1..=100).filter(|a| a % 2 == 0).collect::<Vec<_>>());
        assert_eq!(want, q(1, 2));
        assert_eq!(Lscsm::RunningDensity.phi(&evens, 100).unwrap(), want);
        assert_eq!(Lscsm::CountingCap.phi(&NatSet::finite([3, 7]).unwrap(), 10).unwrap(), q(1, 1));
        assert_eq!(harmonic(10).phi(&NatSet::finite([1, 2, 4]).unwrap(), 10).unwrap(), q(7, 4));
    }

    #[test]
    fn family_blocks_partition() {
        for law in [BlockLaw::Dyadic, BlockLaw::Geometric { base: 3 }, BlockLaw::Explicit { ends: vec![2, 5, 9] }] {
            let mut prev_end = 1u128;
            for n in 1..20 {
                let (s, e) = law.block(n);
                assert_eq!(u128::from(s), prev_end);
                assert!(e > u128::from(s));
                for a in [s, (e - 1) as u64] {
                    assert_eq!(law.block_of(a), (n, s, e));
                }
                prev_end = e;
            }
        }
    }

    #[test]
    fn family_phi_matches_definition() {
        let m = Lscsm::density_family(BlockLaw::Dyadic, vec![q(1, 2)], q(1, 1)).unwrap();
        // D_1 = {1} weight 1/2, D_3 = {4..7}
        assert_eq!(m.phi_exact_members(&[1]), q(1, 2));
        assert_eq!(m.phi_exact_members(&[1, 4, 5, 6]), q(3, 4));
    }

    #[test]
    fn harmonic_enclosure_contains_exact_sum() {
        let m = harmonic(100);
        let members: Vec<u64> = (1..=5000).filter(|a| a % 3 == 1).collect();
        let b = m.phi_bound_members(members.iter().copied());
        let exact = m.phi_exact_members(&members);
        assert!(b.lo <= exact && exact <= b.hi, "{b:?}");
        assert!(&b.hi - &b.lo < q(1, 1_000_000_000));
    }

    #[test]
    fn harmonic_saturates_at_cap() {
        let m = harmonic(1).normalized();
        let b = m.phi_bound_members(1..=10);
        assert_eq!(b, PhiBound::exact(q(1, 1)));
    }

    #[test]
    fn norm_examples_running_density() {
        let m = Lscsm::RunningDensity;
        let n = 1_000_000;
        let cuts = default_cuts(n);
        let e = m.norm_estimate(&NatSet::progression(2, 2).unwrap(), n, &cuts, &none).unwrap();
        assert_eq!(e.exact, Some(q(1, 2)));
        assert!((crate::rational::to_f64(&e.numeric) - 0.5).abs() <= 0.05);
        let e = m.norm_estimate(&NatSet::finite(1..=1000).unwrap(), n, &cuts, &none).unwrap();
        assert_eq!(e.exact, Some(Q::zero()));
        let e = m.norm_estimate(&NatSet::powers_of(2).unwrap(), n, &cuts, &none).unwrap();
        assert_eq!(e.exact, Some(Q::zero()));
        assert!(e.numeric <= q(20, 1_000_000), "{}", e.numeric);
        assert_eq!(e.trend, Trend::Decaying);
    }

    #[test]
    fn dyadic_block_union_density() {
        let w = WitnessIntervals::closed_form(
            crate::meager::intervals::CertRule::DensityRatio,
            q(1, 2),
            "density-zero",
            IotaGenerator::DensityRatio { first: 2, q: q(1, 2) },
            1 << 20,
        )
        .unwrap();
        let w = std::sync::Arc::new(w);
        for k in 1..=4u64 {
            let s = NatSet::block_union(w.clone(), BlockSelector::EveryKth(k)).unwrap();
            let info = Lscsm::RunningDensity.norm_info(&s, &none);
            let two_k = 1i64 << k;
            assert_eq!(info.exact, Some(q(two_k / 2, two_k - 1)));
            // brute force at the end of a selected block
            let end = (1u64 << (18 / k * k + 1)) - 1;
            let members = s.members_in(1, end).unwrap();
            let at_end = q_ratio(members.len() as u64, end);
            let diff = crate::rational::to_f64(&(at_end - info.exact.clone().unwrap())).abs();
            assert!(diff < 0.01, "k={k} diff={diff}");
        }
    }

    #[test]
    fn normalization_gives_unit_norm() {
        let cases = vec![
            Lscsm::RunningDensity,
            Lscsm::CountingCap,
            harmonic(10).normalized(),
            Lscsm::density_family(BlockLaw::Geometric { base: 3 }, vec![q(5, 1)], q(3, 1)).unwrap().normalized(),
        ];
        for m in cases {
            let info = m.norm_info(&NatSet::all(), &none);
            assert_eq!(info.exact, Some(Q::one()), "{m:?}");
        }
    }

    #[test]
    fn singleton_floor_bounds_point_mass() {
        let cases = vec![
            Lscsm::RunningDensity,
            harmonic(1).normalized(),
            Lscsm::density_family(BlockLaw::Dyadic, vec![], q(1, 1)).unwrap(),
        ];
        for m in cases {
            let qq = q(1, 3);
            let f = m.singleton_floor(&qq).unwrap();
            for a in f..f + 200 {
                assert!(m.phi_exact_members(&[a]) < qq, "{m:?} a={a}");
            }
        }
        assert_eq!(Lscsm::CountingCap.singleton_floor(&q(1, 2)), None);
    }

    #[test]
    fn default_cuts_increase() {
        for n in [2u64, 10, 100, 1 << 10, 1 << 20, 1_000_000] {
            let c = default_cuts(n);
            assert!(c.windows(2).all(|w| w[0] < w[1]) && *c.last().unwrap() < n, "{n}: {c:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let m = Lscsm::density_family(BlockLaw::Explicit { ends: vec![3, 10] }, vec![q(1, 2)], q(2, 1)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: Lscsm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
