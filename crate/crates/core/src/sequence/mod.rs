//! Bounded sequences in rational boxes and their hit sets.

pub mod cluster;
pub mod zoo;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natset::{Bits, NatSet, Tri};
use crate::rational::{fmt_coord, serde_coord_vec, Coord};

pub type Point = Vec<Coord>;

pub fn fmt_point(p: &[Coord]) -> String {
    let parts: Vec<String> = p.iter().map(fmt_coord).collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

/// `|a - b| <= eps`, exactly.
fn coord_within(a: &Coord, b: &Coord, eps: &Coord) -> bool {
    let (an, ad) = (i128::from(*a.numer()), i128::from(*a.denom()));
    let (bn, bd) = (i128::from(*b.numer()), i128::from(*b.denom()));
    let (en, ed) = (i128::from(*eps.numer()), i128::from(*eps.denom()));
    // |an*bd - bn*ad| * ed <= en * ad * bd
    let fast = (|| {
        let diff = an.checked_mul(bd)?.checked_sub(bn.checked_mul(ad)?)?.checked_abs()?;
        let lhs = diff.checked_mul(ed)?;
        let rhs = en.checked_mul(ad)?.checked_mul(bd)?;
        Some(lhs <= rhs)
    })();
    fast.unwrap_or_else(|| {
        let big = |c: &Coord| num_rational::BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()));
        (big(a) - big(b)).abs() <= big(eps)
    })
}

/// Closed sup-norm ball test.
pub fn within(x: &[Coord], center: &[Coord], eps: &Coord) -> bool {
    x.len() == center.len() && x.iter().zip(center).all(|(a, b)| coord_within(a, b, eps))
}

pub trait PointGenerator: Send + Sync {
    fn point(&self, n: u64) -> Result<Point>;

    /// Symbolic `{n : d(x_n, center) <= eps}` when the generator knows it.
    fn indicator(&self, _center: &[Coord], _eps: &Coord) -> Option<Result<NatSet>> {
        None
    }
}

/// Finitely many values, each taken on a symbolic index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteAlphabet {
    pub letters: Vec<LetterPoint>,
    pub sets: Vec<NatSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LetterPoint(#[serde(with = "serde_coord_vec")] pub Point);

impl FiniteAlphabet {
    pub fn new(letters: Vec<Point>, sets: Vec<NatSet>) -> Result<Self> {
        if letters.is_empty() || letters.len() != sets.len() {
            return Err(Error::InvalidSequence("alphabet needs one index set per letter".into()));
        }
        let d = letters[0].len();
        if d == 0 || letters.iter().any(|l| l.len() != d) {
            return Err(Error::InvalidSequence("letters must share a positive dimension".into()));
        }
        Ok(FiniteAlphabet { letters: letters.into_iter().map(LetterPoint).collect(), sets })
    }

    pub fn letter(&self, i: usize) -> &Point {
        &self.letters[i].0
    }

    /// Index sets are disjoint and cover `[1, n]`.
    pub fn check_partition(&self, n: u64) -> Result<()> {
        let mut seen: Option<Bits> = None;
        for s in &self.sets {
            let p = s.prefix(n)?;
            seen = Some(match seen {
                None => p,
                Some(acc) => {
                    if (acc.clone() & p.clone()).any() {
                        return Err(Error::InvalidSequence("alphabet index sets overlap".into()));
                    }
                    acc | p
                }
            });
        }
        if !seen.is_some_and(|b| b.all()) {
            return Err(Error::InvalidSequence("alphabet index sets leave a gap".into()));
        }
        Ok(())
    }

    pub fn letter_of(&self, n: u64) -> Result<usize> {
        for (i, s) in self.sets.iter().enumerate() {
            match s.member(n) {
                Tri::True => return Ok(i),
                Tri::False => {}
                Tri::Unknown => return Err(Error::horizon(n, n - 1)),
            }
        }
        Err(Error::InvalidSequence(format!("no letter owns index {n}")))
    }
}

struct AlphabetGenerator(FiniteAlphabet);

impl PointGenerator for AlphabetGenerator {
    fn point(&self, n: u64) -> Result<Point> {
        Ok(self.0.letter(self.0.letter_of(n)?).clone())
    }

    fn indicator(&self, center: &[Coord], eps: &Coord) -> Option<Result<NatSet>> {
        Some(alphabet_indicator(&self.0, center, eps))
    }
}

#[derive(Clone)]
pub struct SequenceSpec {
    pub name: String,
    pub dim: usize,
    /// All coordinates lie in `[-bound, bound]`.
    pub bound: Coord,
    pub generator: Arc<dyn PointGenerator>,
    pub alphabet: Option<FiniteAlphabet>,
    /// Largest index the generator answers, if limited.
    pub valid_to: Option<u64>,
}

impl fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SequenceSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("alphabet", &self.alphabet.is_some())
            .field("valid_to", &self.valid_to)
            .finish()
    }
}

impl SequenceSpec {
    pub fn from_alphabet(name: impl Into<String>, alphabet: FiniteAlphabet) -> Result<Self> {
        let dim = alphabet.letter(0).len();
        let bound = alphabet
            .letters
            .iter()
            .flat_map(|l| l.0.iter().map(|c| c.abs()))
            .max()
            .unwrap_or_else(|| Coord::from_integer(0));
        Ok(SequenceSpec {
            name: name.into(),
            dim,
            bound,
            generator: Arc::new(AlphabetGenerator(alphabet.clone())),
            alphabet: Some(alphabet),
            valid_to: None,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        dim: usize,
        bound: Coord,
        generator: Arc<dyn PointGenerator>,
        valid_to: Option<u64>,
    ) -> Self {
        SequenceSpec { name: name.into(), dim, bound, generator, alphabet: None, valid_to }
    }

    pub fn usable_horizon(&self, n: u64) -> u64 {
        self.valid_to.map_or(n, |v| v.min(n))
    }

    pub fn point(&self, n: u64) -> Result<Point> {
        if n == 0 {
            return Err(Error::InvalidParameter("indices start at 1".into()));
        }
        if let Some(v) = self.valid_to {
            if n > v {
                return Err(Error::horizon(n, v));
            }
        }
        let p = self.generator.point(n)?;
        if p.len() != self.dim || p.iter().any(|c| c.abs() > self.bound) {
            return Err(Error::InvalidSequence(format!("x_{n} = {} leaves the declared box", fmt_point(&p))));
        }
        Ok(p)
    }

    pub fn points(&self, n: u64) -> Result<Vec<Point>> {
        (1..=n).map(|i| self.point(i)).collect()
    }

    /// `{n : d(x_n, center) <= eps}`; symbolic when the generator supports it,
    /// a bitmap up to `horizon` otherwise.
    pub fn indicator_set(&self, center: &[Coord], eps: &Coord, horizon: u64) -> Result<NatSet> {
        if *eps <= Coord::from_integer(0) {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        if let Some(s) = self.generator.indicator(center, eps) {
            return s;
        }
        let n = self.usable_horizon(horizon);
        let pts = self.points(n)?;
        Ok(bitmap_indicator(&pts, center, eps))
    }
}

pub fn alphabet_indicator(a: &FiniteAlphabet, center: &[Coord], eps: &Coord) -> Result<NatSet> {
    let near: Vec<usize> = (0..a.letters.len()).filter(|&i| within(a.letter(i), center, eps)).collect();
    if near.len() == a.letters.len() {
        return Ok(NatSet::all());
    }
    NatSet::union_all(near.into_iter().map(|i| a.sets[i].clone()))
}

pub fn bitmap_indicator(points: &[Point], center: &[Coord], eps: &Coord) -> NatSet {
    let mut bits = Bits::repeat(false, points.len());
    for (i, p) in points.iter().enumerate() {
        if within(p, center, eps) {
            bits.set(i, true);
        }
    }
    NatSet::bitmap(bits)
}
