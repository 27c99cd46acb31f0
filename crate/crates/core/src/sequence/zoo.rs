//! Named sequences addressable from the command line.

use std::sync::{Arc, OnceLock};

use num_traits::Signed;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::natset::NatSet;
use crate::rational::{parse_coord, Coord};

use super::{FiniteAlphabet, Point, PointGenerator, SequenceSpec};

pub const NAMES: &[&str] = &["char:evens", "char:odds", "char:powers2", "harmonic", "rationals", "const:<c>", "alphabet:<json>"];

fn int(n: i64) -> Point {
    vec![Coord::from_integer(n)]
}

/// 0/1 sequence that is 1 exactly on `ones`.
pub fn characteristic(name: &str, ones: NatSet) -> Result<SequenceSpec> {
    let zeros = NatSet::complement(ones.clone())?;
    SequenceSpec::from_alphabet(name, FiniteAlphabet::new(vec![int(0), int(1)], vec![zeros, ones])?)
}

struct Harmonic;

impl PointGenerator for Harmonic {
    fn point(&self, n: u64) -> Result<Point> {
        Ok(vec![Coord::new(1, n as i64)])
    }

    // c - eps <= 1/n <= c + eps is an interval of indices
    fn indicator(&self, center: &[Coord], eps: &Coord) -> Option<Result<NatSet>> {
        let [c] = center else { return Some(Ok(NatSet::empty())) };
        let zero = Coord::from_integer(0);
        let (top, bottom) = (c + eps, c - eps);
        if top <= zero {
            return Some(Ok(NatSet::empty()));
        }
        let inv = top.recip();
        let lo = ((*inv.numer() + *inv.denom() - 1) / *inv.denom()).max(1) as u64;
        let from = NatSet::tail_from(lo);
        if bottom <= zero {
            return Some(Ok(from));
        }
        let hi = bottom.recip().floor().to_integer() as u64;
        Some(NatSet::difference(from, NatSet::tail_from(hi + 1)))
    }
}

pub fn harmonic() -> SequenceSpec {
    SequenceSpec::from_fn("harmonic", 1, Coord::from_integer(1), Arc::new(Harmonic), None)
}

/// Largest denominator the rationals enumeration tabulates.
const MAX_DENOM: usize = 1 << 16;

struct Totients {
    phi: Vec<u32>,
    /// `cum[d]` = number of fractions with denominator in `[2, d]`.
    cum: Vec<u64>,
}

fn totients() -> &'static Totients {
    static T: OnceLock<Totients> = OnceLock::new();
    T.get_or_init(|| {
        let mut phi: Vec<u32> = (0..=MAX_DENOM as u32).collect();
        for p in 2..=MAX_DENOM {
            if phi[p] == p as u32 {
                for m in (p..=MAX_DENOM).step_by(p) {
                    phi[m] -= phi[m] / p as u32;
                }
            }
        }
        let mut cum = vec![0u64; MAX_DENOM + 1];
        for d in 2..=MAX_DENOM {
            cum[d] = cum[d - 1] + u64::from(phi[d]);
        }
        Totients { phi, cum }
    })
}

fn prime_factors(mut d: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= d {
        if d % p == 0 {
            out.push(p);
            while d % p == 0 {
                d /= p;
            }
        }
        p += 1;
    }
    if d > 1 {
        out.push(d);
    }
    out
}

/// Integers in `[1, k]` coprime to the product of `primes`.
fn coprime_count(k: u64, primes: &[u64]) -> u64 {
    let mut total: i64 = 0;
    for mask in 0u32..(1 << primes.len()) {
        let prod: u64 = primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p).product();
        let term = (k / prod) as i64;
        total += if mask.count_ones() % 2 == 0 { term } else { -term };
    }
    total as u64
}

/// `0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, …`: reduced fractions by denominator,
/// then numerator.
struct Rationals;

impl Rationals {
    fn valid_to() -> u64 {
        totients().cum[MAX_DENOM] + 2
    }
}

impl PointGenerator for Rationals {
    fn point(&self, n: u64) -> Result<Point> {
        match n {
            1 => return Ok(int(0)),
            2 => return Ok(int(1)),
            _ => {}
        }
        let t = totients();
        let m = n - 2;
        if m > t.cum[MAX_DENOM] {
            return Err(Error::horizon(n, Self::valid_to()));
        }
        let d = t.cum.partition_point(|&c| c < m) as u64;
        let j = m - t.cum[d as usize - 1];
        debug_assert!(j >= 1 && j <= u64::from(t.phi[d as usize]));
        let primes = prime_factors(d);
        let (mut lo, mut hi) = (1u64, d - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if coprime_count(mid, &primes) >= j {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(vec![Coord::new(lo as i64, d as i64)])
    }
}

pub fn rationals() -> SequenceSpec {
    SequenceSpec::from_fn("rationals", 1, Coord::from_integer(1), Arc::new(Rationals), Some(Rationals::valid_to()))
}

struct Constant(Point);

impl PointGenerator for Constant {
    fn point(&self, _n: u64) -> Result<Point> {
        Ok(self.0.clone())
    }
}

pub fn constant(p: Point) -> Result<SequenceSpec> {
    let name = format!("const:{}", super::fmt_point(&p));
    SequenceSpec::from_alphabet(name, FiniteAlphabet::new(vec![p], vec![NatSet::all()])?)
}

/// A constant sequence without alphabet structure, for tests of the bitmap paths.
pub fn constant_plain(p: Point) -> SequenceSpec {
    let bound = p.iter().map(|c| c.abs()).max().unwrap_or_else(|| Coord::from_integer(0));
    SequenceSpec::from_fn("const-plain", p.len(), bound, Arc::new(Constant(p)), None)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphabetJson {
    letters: Vec<Vec<String>>,
    sets: Vec<NatSet>,
}

/// Alphabet sequences are checked as partitions up to this index.
pub const PARTITION_CHECK: u64 = 1 << 12;

pub fn alphabet_from_json(text: &str) -> Result<SequenceSpec> {
    let a: AlphabetJson = serde_json::from_str(text)?;
    let letters = a
        .letters
        .iter()
        .map(|l| l.iter().map(|c| parse_coord(c)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let alphabet = FiniteAlphabet::new(letters, a.sets)?;
    alphabet.check_partition(PARTITION_CHECK)?;
    SequenceSpec::from_alphabet("alphabet", alphabet)
}

/// Looks a sequence up by its command-line name.
pub fn sequence(name: &str) -> Result<SequenceSpec> {
    if let Some(json) = name.strip_prefix("alphabet:") {
        return alphabet_from_json(json);
    }
    if let Some(c) = name.strip_prefix("const:") {
        let p = c.split(',').map(|v| parse_coord(v.trim())).collect::<Result<Vec<_>>>()?;
        return constant(p);
    }
    match name {
        "char:evens" => characteristic(name, NatSet::progression(2, 2)?),
        "char:odds" => characteristic(name, NatSet::progression(1, 2)?),
        "char:powers2" => characteristic(name, NatSet::powers_of(2)?),
        "harmonic" => Ok(harmonic()),
        "rationals" => Ok(rationals()),
        _ => Err(Error::UnknownSequence(name.into())),
    }
}
