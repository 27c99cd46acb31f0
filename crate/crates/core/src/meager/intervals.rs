use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, serde_q, Q};

/// How the increasing sequence `iota_1 < iota_2 < ...` is generated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IotaGenerator {
    /// `iota_n = n`.
    Singletons,
    /// `iota_1 = 1`, `iota_{n+1} = iota_n + 2^{n+1}`, i.e. `iota_n = 2^{n+1} - 3`.
    RowCoverage,
    /// `iota_1 = first`, `iota_{n+1} = ceil(iota_n / (1 - q))`.
    DensityRatio {
        first: u64,
        #[serde(with = "serde_q")]
        q: Q,
    },
    /// Explicit table found by block search; nothing is known past its end.
    Table,
}

/// The inequality each block was certified with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertRule {
    /// `(iota_{n+1} - iota_n) / iota_{n+1} >= q0`.
    DensityRatio,
    /// `phi(I_n) >= q0` for the ideal's own submeasure.
    PhiBlock,
    /// Block `n` contains an integer of 2-adic valuation `r` for every `r <= n`.
    RowCoverage,
}

impl CertRule {
    pub fn tag(&self) -> &'static str {
        match self {
            CertRule::DensityRatio => "density-ratio",
            CertRule::PhiBlock => "phi-block",
            CertRule::RowCoverage => "row-coverage",
        }
    }
}

/// Where an integer falls relative to the blocks `I_n = [iota_n, iota_{n+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locate {
    Before,
    Block(u64),
    Beyond,
}

/// Number of leading `iota` values written out for closed-form generators.
pub const JSON_IOTA_PREFIX: usize = 1024;

/// Strictly increasing interval endpoints certifying that every set containing
/// infinitely many of the blocks `[iota_n, iota_{n+1})` lies outside an ideal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WitnessRecord", into = "WitnessRecord")]
pub struct WitnessIntervals {
    rule: CertRule,
    q0: Q,
    ideal: String,
    generator: IotaGenerator,
    /// Materialized values for `DensityRatio` and `Table`; empty otherwise.
    iotas: Vec<u64>,
    horizon: u64,
    long_blocks_from: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct WitnessRecord {
    rule: CertRule,
    #[serde(with = "serde_q")]
    q0: Q,
    ideal: String,
    generator: IotaGenerator,
    iota: Vec<u64>,
    horizon: u64,
    #[serde(default)]
    long_blocks_from: Option<u64>,
}

impl From<WitnessIntervals> for WitnessRecord {
    fn from(w: WitnessIntervals) -> Self {
        let iota = match w.generator {
            IotaGenerator::Table => w.iotas.clone(),
            _ => (1..)
                .map_while(|n| w.iota(n))
                .take_while(|&i| i <= w.horizon)
                .take(JSON_IOTA_PREFIX)
                .collect(),
        };
        WitnessRecord {
            rule: w.rule,
            q0: w.q0,
            ideal: w.ideal,
            generator: w.generator,
            iota,
            horizon: w.horizon,
            long_blocks_from: w.long_blocks_from,
        }
    }
}

impl TryFrom<WitnessRecord> for WitnessIntervals {
    type Error = Error;

    fn try_from(r: WitnessRecord) -> Result<Self> {
        let w = match r.generator {
            IotaGenerator::Table => WitnessIntervals::from_table(r.rule, r.q0, r.ideal, r.iota, r.horizon)?,
            g => {
                let w = WitnessIntervals::closed_form(r.rule, r.q0, r.ideal, g, r.horizon)?;
                for (i, &v) in r.iota.iter().enumerate() {
                    if w.iota(i as u64 + 1) != Some(v) {
                        return Err(Error::InvalidSet(format!(
                            "iota prefix disagrees with generator at index {}",
                            i + 1
                        )));
                    }
                }
                w
            }
        };
        Ok(w.with_long_blocks_from(r.long_blocks_from))
    }
}

impl WitnessIntervals {
    pub fn closed_form(rule: CertRule, q0: Q, ideal: impl Into<String>, generator: IotaGenerator, horizon: u64) -> Result<Self> {
        let iotas = match &generator {
            IotaGenerator::DensityRatio { first, q } => density_ratio_iotas(*first, q)?,
            IotaGenerator::Table => {
                return Err(Error::InvalidSet("table witnesses need explicit iota values".into()))
            }
            _ => Vec::new(),
        };
        Ok(WitnessIntervals {
            rule,
            q0,
            ideal: ideal.into(),
            generator,
            iotas,
            horizon,
            long_blocks_from: None,
        })
    }

    pub fn from_table(rule: CertRule, q0: Q, ideal: impl Into<String>, iotas: Vec<u64>, horizon: u64) -> Result<Self> {
        if iotas.len() < 2 {
            return Err(Error::InvalidSet("a witness table needs at least two endpoints".into()));
        }
        if iotas[0] == 0 || iotas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSet("iota must be positive and strictly increasing".into()));
        }
        Ok(WitnessIntervals {
            rule,
            q0,
            ideal: ideal.into(),
            generator: IotaGenerator::Table,
            iotas,
            horizon,
            long_blocks_from: None,
        })
    }

    pub fn with_long_blocks_from(mut self, from: Option<u64>) -> Self {
        self.long_blocks_from = from;
        self
    }

    pub fn rule(&self) -> CertRule {
        self.rule
    }

    pub fn q0(&self) -> &Q {
        &self.q0
    }

    pub fn ideal(&self) -> &str {
        &self.ideal
    }

    pub fn generator(&self) -> &IotaGenerator {
        &self.generator
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Every block starting at or after this point has at least two elements.
    pub fn long_blocks_from(&self) -> Option<u64> {
        match self.generator {
            IotaGenerator::RowCoverage => Some(1),
            IotaGenerator::Singletons => None,
            _ => self.long_blocks_from,
        }
    }

    pub fn iota(&self, n: u64) -> Option<u64> {
        if n == 0 {
            return None;
        }
        match self.generator {
            IotaGenerator::Singletons => Some(n),
            IotaGenerator::RowCoverage => {
                if n <= 62 {
                    Some((1u64 << (n + 1)) - 3)
                } else {
                    None
                }
            }
            IotaGenerator::DensityRatio { .. } | IotaGenerator::Table => self.iotas.get(n as usize - 1).copied(),
        }
    }

    /// Last integer covered by a materialized table, if the generator stops.
    pub fn known_end(&self) -> Option<u64> {
        match self.generator {
            IotaGenerator::Table => self.iotas.last().map(|&i| i - 1),
            _ => None,
        }
    }

    pub fn block_count_hint(&self) -> Option<usize> {
        match self.generator {
            IotaGenerator::Table => Some(self.iotas.len() - 1),
            _ => None,
        }
    }

    /// Half-open block `[iota_n, iota_{n+1})`.
    pub fn block(&self, n: u64) -> Option<(u64, u64)> {
        Some((self.iota(n)?, self.iota(n + 1)?))
    }

    pub fn locate(&self, m: u64) -> Locate {
        match self.generator {
            IotaGenerator::Singletons => {
                if m == 0 {
                    Locate::Before
                } else if m == u64::MAX {
                    Locate::Beyond
                } else {
                    Locate::Block(m)
                }
            }
            IotaGenerator::RowCoverage => {
                if m == 0 {
                    return Locate::Before;
                }
                let n = u64::from(63 - (m.saturating_add(3)).leading_zeros()) - 1;
                if n >= 62 {
                    Locate::Beyond
                } else {
                    Locate::Block(n)
                }
            }
            IotaGenerator::DensityRatio { .. } | IotaGenerator::Table => {
                if m < self.iotas[0] {
                    return Locate::Before;
                }
                let idx = self.iotas.partition_point(|&i| i <= m);
                if idx >= self.iotas.len() {
                    Locate::Beyond
                } else {
                    Locate::Block(idx as u64)
                }
            }
        }
    }

    /// Blocks entirely contained in `[1, limit]`, in order.
    pub fn blocks_within(&self, limit: u64) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        (1u64..)
            .map_while(move |n| self.block(n).map(|(s, e)| (n, s, e)))
            .take_while(move |&(_, _, e)| e - 1 <= limit)
    }

    pub fn describe(&self) -> String {
        format!("{}(q0={}, ideal={})", self.rule.tag(), fmt_q(&self.q0), self.ideal)
    }
}

fn density_ratio_iotas(first: u64, q: &Q) -> Result<Vec<u64>> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, ToPrimitive, Zero};

    if first == 0 || !q.is_positive() || *q >= Q::one() {
        return Err(Error::InvalidParameter("density-ratio needs first >= 1 and q in (0,1)".into()));
    }
    let one_minus = Q::one() - q;
    let (num, den) = (one_minus.numer().clone(), one_minus.denom().clone());
    let mut out = vec![first];
    let mut cur = BigInt::from(first);
    loop {
        // ceil(cur * den / num)
        let (quot, rem) = (&cur * &den).div_rem(&num);
        let next = if rem.is_zero() { quot } else { quot + 1 };
        match next.to_u64() {
            Some(v) if v < u64::MAX => {
                out.push(v);
                cur = next;
            }
            _ => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn dyadic() -> WitnessIntervals {
        WitnessIntervals::closed_form(
            CertRule::DensityRatio,
            q(1, 2),
            "density-zero",
            IotaGenerator::DensityRatio { first: 2, q: q(1, 2) },
            1 << 20,
        )
        .unwrap()
    }

    #[test]
    fn density_ratio_half_is_powers_of_two() {
        let w = dyadic();
        let first: Vec<u64> = (1..=6).map(|n| w.iota(n).unwrap()).collect();
        assert_eq!(first, vec![2, 4, 8, 16, 32, 64]);
        assert_eq!(w.locate(1), Locate::Before);
        assert_eq!(w.locate(2), Locate::Block(1));
        assert_eq!(w.locate(7), Locate::Block(2));
        assert_eq!(w.locate(8), Locate::Block(3));
    }

    #[test]
    fn row_coverage_closed_form_matches_recurrence() {
        let w = WitnessIntervals::closed_form(CertRule::RowCoverage, q(1, 1), "fin-x-fin", IotaGenerator::RowCoverage, 100_000).unwrap();
        let mut iota = 1u64;
        for n in 1..40u64 {
            assert_eq!(w.iota(n), Some(iota));
            assert_eq!(w.locate(iota), Locate::Block(n));
            assert_eq!(w.locate(iota + (1 << (n + 1)) - 1), Locate::Block(n));
            iota += 1 << (n + 1);
        }
    }

    #[test]
    fn table_rejects_non_increasing() {
        assert!(WitnessIntervals::from_table(CertRule::PhiBlock, q(1, 2), "x", vec![1, 3, 3], 10).is_err());
        let w = WitnessIntervals::from_table(CertRule::PhiBlock, q(1, 2), "x", vec![1, 3, 7], 10).unwrap();
        assert_eq!(w.locate(6), Locate::Block(2));
        assert_eq!(w.locate(7), Locate::Beyond);
        assert_eq!(w.blocks_within(10).count(), 2);
    }

    #[test]
    fn json_round_trip_keeps_generator() {
        let w = dyadic();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"iota\":[2,4,8,16"));
        let back: WitnessIntervals = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
