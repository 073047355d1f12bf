//! Words of the free semigroup `G+`, depth-`n` cylinders of `X = {0,1}^{G+}`,
//! the shifts `T1`, `T2`, twin composition and the product measure.
//!
//! Coordinates are frozen in canonical order: words sorted by length, then
//! lexicographically with `T1 < T2`. A length-`l` word with letter bits
//! `b1..bl` (`T1 -> 0`, `T2 -> 1`) has index `(2^l - 1) + sum b_k 2^(l-k)`.
//! A depth-`n` cylinder fixes the labels of the `2^(n+1) - 1` words of length
//! at most `n`; its `code` has bit `k` equal to the label at word index `k`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Deepest cylinder whose code fits in a `u64` (63 label bits).
pub const MAX_DEPTH: u32 = 5;

/// Default cap for exhaustive enumeration (`2^15` cylinders).
pub const ENUMERATION_CAP: u32 = 3;

/// Opt-in cap for exhaustive enumeration (`2^31` cylinders).
pub const EXTENDED_ENUMERATION_CAP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    T1,
    T2,
}

impl Generator {
    pub const ALL: [Generator; 2] = [Generator::T1, Generator::T2];

    pub fn bit(self) -> u64 {
        match self {
            Generator::T1 => 0,
            Generator::T2 => 1,
        }
    }

    pub fn from_bit(bit: u64) -> Generator {
        if bit == 0 {
            Generator::T1
        } else {
            Generator::T2
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::T1 => f.write_str("T1"),
            Generator::T2 => f.write_str("T2"),
        }
    }
}

/// A finite word over `{T1, T2}`; the empty word is the identity `e`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Generator>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn new(letters: Vec<Generator>) -> Self {
        Word { letters }
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Generator> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Generator> {
        self.letters.last().copied()
    }

    /// `g·self`, i.e. the letter prepended on the left.
    pub fn prepend(&self, g: Generator) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(g);
        letters.extend_from_slice(&self.letters);
        Word { letters }
    }

    /// `self·g`, i.e. the letter appended on the right.
    pub fn append(&self, g: Generator) -> Word {
        let mut letters = self.letters.clone();
        letters.push(g);
        Word { letters }
    }

    /// Canonical index. Panics for words longer than 62 letters.
    pub fn index(&self) -> u64 {
        word_index(self)
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(index: u64) -> Word {
        let len = level_of(index);
        let value = index - ((1u64 << len) - 1);
        let letters = (0..len)
            .map(|k| Generator::from_bit((value >> (len - 1 - k)) & 1))
            .collect();
        Word { letters }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for g in &self.letters {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Canonical index of `w`: by length, then lexicographic with `T1 < T2`.
pub fn word_index(w: &Word) -> u64 {
    let len = w.len() as u32;
    assert!(len <= 62, "word too long for a u64 index");
    let value = w.letters.iter().fold(0u64, |acc, g| (acc << 1) | g.bit());
    ((1u64 << len) - 1) + value
}

/// Length of the word with canonical index `index`.
fn level_of(index: u64) -> u32 {
    63 - (index + 1).leading_zeros()
}

/// Number of label bits of a depth-`n` cylinder: `2^(n+1) - 1`.
pub fn label_count(depth: u32) -> u32 {
    (1u32 << (depth + 1)) - 1
}

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// `|C_n| = 2^(2^(n+1) - 1)`; overflow is reported rather than wrapped.
pub fn cylinder_count(depth: u32) -> Result<u64> {
    if depth > MAX_DEPTH {
        return Err(Error::Overflow { what: format!("cylinder count at depth {depth}") });
    }
    Ok(1u64 << label_count(depth))
}

/// A depth-`n` cylinder of `X`, stored as its bit-packed label code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cylinder {
    depth: u32,
    code: u64,
}

impl Cylinder {
    pub fn new(depth: u32, code: u64) -> Result<Cylinder> {
        if depth > MAX_DEPTH {
            return Err(Error::Overflow { what: format!("cylinder depth {depth}") });
        }
        if code & !mask(label_count(depth)) != 0 {
            return Err(Error::InvalidArgument(format!(
                "code {code:#x} has bits beyond the {} labels of a depth-{depth} cylinder",
                label_count(depth)
            )));
        }
        Ok(Cylinder { depth, code })
    }

    /// Builds a cylinder from explicit labels in canonical word order.
    pub fn from_labels(labels: &[u8]) -> Result<Cylinder> {
        let n = labels.len() as u64 + 1;
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "{} labels is not 2^(n+1) - 1 for any depth",
                labels.len()
            )));
        }
        let depth = n.trailing_zeros() - 1;
        let code = labels
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &b)| acc | (u64::from(b & 1) << k));
        Cylinder::new(depth, code)
    }

    pub(crate) fn new_unchecked(depth: u32, code: u64) -> Cylinder {
        debug_assert!(Cylinder::new(depth, code).is_ok());
        Cylinder { depth, code }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    /// Label at canonical word index `index` (must be `< label_count(depth)`).
    pub fn label(&self, index: u64) -> u8 {
        assert!(index < u64::from(label_count(self.depth)), "word outside the cylinder");
        ((self.code >> index) & 1) as u8
    }

    pub fn label_at(&self, w: &Word) -> u8 {
        self.label(w.index())
    }

    /// The `x^e` label.
    pub fn e_label(&self) -> u8 {
        (self.code & 1) as u8
    }

    pub fn labels(&self) -> Vec<u8> {
        (0..u64::from(label_count(self.depth))).map(|k| self.label(k)).collect()
    }

    /// The depth-`depth` cylinder containing this one.
    pub fn truncate(&self, depth: u32) -> Result<Cylinder> {
        if depth > self.depth {
            return Err(Error::DepthMismatch { expected: self.depth, got: depth });
        }
        Ok(Cylinder { depth, code: self.code & mask(label_count(depth)) })
    }

    /// `T_g(c)`: the label at `V` is this cylinder's label at `g·V`.
    pub fn shift(&self, g: Generator) -> Result<Cylinder> {
        shift(self, g)
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}[{:#x}]", self.depth, self.code)
    }
}

/// `T_g(c)` for a cylinder of depth at least one.
pub fn shift(c: &Cylinder, g: Generator) -> Result<Cylinder> {
    if c.depth == 0 {
        return Err(Error::NoShift(0));
    }
    let mut code = 0u64;
    for level in 0..c.depth {
        let width = 1u32 << level;
        let src = (2u32 << level) - 1 + g.bit() as u32 * width;
        let block = (c.code >> src) & mask(width);
        code |= block << (width - 1);
    }
    Ok(Cylinder { depth: c.depth - 1, code })
}

/// The twin over `(c1, c2)` with `x^e = e_bit`: the unique depth-`n+1`
/// cylinder whose `T1`-image is `c1` and `T2`-image is `c2`.
pub fn compose(e_bit: u8, c1: &Cylinder, c2: &Cylinder) -> Result<Cylinder> {
    if c1.depth != c2.depth {
        return Err(Error::DepthMismatch { expected: c1.depth, got: c2.depth });
    }
    let depth = c1.depth + 1;
    if depth > MAX_DEPTH {
        return Err(Error::Overflow { what: format!("cylinder depth {depth}") });
    }
    let mut code = u64::from(e_bit & 1);
    for level in 0..c1.depth + 1 {
        let width = 1u32 << level;
        let src = width - 1;
        let dst = (2u32 << level) - 1;
        code |= ((c1.code >> src) & mask(width)) << dst;
        code |= ((c2.code >> src) & mask(width)) << (dst + width);
    }
    Ok(Cylinder { depth, code })
}

/// All depth-`n` cylinders in code order.
pub fn cylinders(depth: u32) -> Result<impl Iterator<Item = Cylinder>> {
    let count = cylinder_count(depth)?;
    Ok((0..count).map(move |code| Cylinder { depth, code }))
}

/// A uniformly random depth-`n` cylinder, deterministic in `seed`.
pub fn sample_cylinder(depth: u32, seed: u64) -> Result<Cylinder> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_cylinder_with(depth, &mut rng)
}

pub fn sample_cylinder_with<R: Rng + ?Sized>(depth: u32, rng: &mut R) -> Result<Cylinder> {
    if depth > MAX_DEPTH {
        return Err(Error::Overflow { what: format!("cylinder depth {depth}") });
    }
    let code = rng.random::<u64>() & mask(label_count(depth));
    Ok(Cylinder { depth, code })
}

/// An exact dyadic rational `numerator / 2^log2_denominator` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicMass {
    numerator: u128,
    log2_denominator: u32,
}

impl DyadicMass {
    pub fn new(numerator: u128, log2_denominator: u32) -> Result<DyadicMass> {
        if log2_denominator > 126 {
            return Err(Error::Overflow { what: format!("dyadic denominator 2^{log2_denominator}") });
        }
        if numerator > 1u128 << log2_denominator {
            return Err(Error::InvalidArgument("dyadic mass above one".into()));
        }
        Ok(DyadicMass { numerator, log2_denominator }.normalized())
    }

    pub fn zero() -> DyadicMass {
        DyadicMass { numerator: 0, log2_denominator: 0 }
    }

    pub fn one() -> DyadicMass {
        DyadicMass { numerator: 1, log2_denominator: 0 }
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    fn normalized(mut self) -> DyadicMass {
        if self.numerator == 0 {
            self.log2_denominator = 0;
            return self;
        }
        let tz = self.numerator.trailing_zeros().min(self.log2_denominator);
        self.numerator >>= tz;
        self.log2_denominator -= tz;
        self
    }

    /// Exact sum; fails if the result would exceed one.
    pub fn checked_add(&self, other: &DyadicMass) -> Result<DyadicMass> {
        let k = self.log2_denominator.max(other.log2_denominator);
        let a = self.numerator << (k - self.log2_denominator);
        let b = other.numerator << (k - other.log2_denominator);
        let sum = a
            .checked_add(b)
            .ok_or_else(|| Error::Overflow { what: "dyadic sum".into() })?;
        DyadicMass::new(sum, k)
    }

    /// `count` copies of this mass.
    pub fn times(&self, count: u64) -> Result<DyadicMass> {
        let n = self
            .numerator
            .checked_mul(u128::from(count))
            .ok_or_else(|| Error::Overflow { what: "dyadic multiple".into() })?;
        DyadicMass::new(n, self.log2_denominator)
    }

    pub fn checked_mul(&self, other: &DyadicMass) -> Result<DyadicMass> {
        let a = self.normalized();
        let b = other.normalized();
        let n = a
            .numerator
            .checked_mul(b.numerator)
            .ok_or_else(|| Error::Overflow { what: "dyadic product".into() })?;
        DyadicMass::new(n, a.log2_denominator + b.log2_denominator)
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.numerator), BigInt::one() << self.log2_denominator)
    }
}

/// `m(c) = 2^-(2^(n+1) - 1)` for a depth-`n` cylinder.
pub fn measure(c: &Cylinder) -> DyadicMass {
    DyadicMass { numerator: 1, log2_denominator: label_count(c.depth) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn w(s: &str) -> Word {
        Word::new(
            s.split_inclusive(['1', '2'])
                .map(|t| if t.ends_with('1') { Generator::T1 } else { Generator::T2 })
                .collect(),
        )
    }

    #[test]
    fn word_indices_follow_canonical_order() {
        assert_eq!(word_index(&Word::identity()), 0);
        assert_eq!(word_index(&w("T1")), 1);
        assert_eq!(word_index(&w("T2")), 2);
        assert_eq!(word_index(&w("T1T1")), 3);
        assert_eq!(word_index(&w("T1T2")), 4);
        assert_eq!(word_index(&w("T2T1")), 5);
        assert_eq!(word_index(&w("T2T2")), 6);
        assert_eq!(w("T2T1").to_string(), "T2T1");
        assert_eq!(Word::identity().to_string(), "e");
    }

    #[test]
    fn index_word_round_trip() {
        for k in 0..(1u64 << 14) {
            assert_eq!(Word::from_index(k).index(), k);
        }
    }

    #[test]
    fn counts_and_measures() {
        assert_eq!(cylinder_count(0).unwrap(), 2);
        assert_eq!(cylinder_count(1).unwrap(), 8);
        assert_eq!(cylinder_count(2).unwrap(), 128);
        assert_eq!(cylinder_count(5).unwrap(), 1 << 63);
        assert!(matches!(cylinder_count(6), Err(Error::Overflow { .. })));

        let c0 = Cylinder::new(0, 1).unwrap();
        assert_eq!(measure(&c0).to_rational(), ratio(1, 2));
        let c1 = Cylinder::new(1, 0).unwrap();
        assert_eq!(measure(&c1).to_rational(), ratio(1, 8));
        let total = measure(&c1).times(cylinder_count(1).unwrap()).unwrap();
        assert_eq!(total, DyadicMass::one());
    }

    #[test]
    fn shift_examples() {
        // labels (e=0, T1=1, T2=0)
        let c = Cylinder::from_labels(&[0, 1, 0]).unwrap();
        assert_eq!(shift(&c, Generator::T1).unwrap().e_label(), 1);
        assert_eq!(shift(&c, Generator::T2).unwrap().e_label(), 0);
        assert!(matches!(shift(&Cylinder::new(0, 0).unwrap(), Generator::T1), Err(Error::NoShift(0))));
    }

    #[test]
    fn shift_reads_left_concatenation() {
        let t12 = w("T1T2");
        for c in cylinders(2).unwrap() {
            let s = shift(&shift(&c, Generator::T1).unwrap(), Generator::T2).unwrap();
            assert_eq!(s.e_label(), c.label_at(&t12));
        }
        for c in cylinders(3).unwrap() {
            for g in Generator::ALL {
                let s = shift(&c, g).unwrap();
                for k in 0..u64::from(label_count(2)) {
                    let v = Word::from_index(k);
                    assert_eq!(s.label(k), c.label_at(&v.prepend(g)));
                }
            }
        }
    }

    #[test]
    fn compose_inverts_shifts() {
        for c1 in cylinders(1).unwrap() {
            for c2 in cylinders(1).unwrap() {
                let t0 = compose(0, &c1, &c2).unwrap();
                let t1 = compose(1, &c1, &c2).unwrap();
                for t in [t0, t1] {
                    assert_eq!(shift(&t, Generator::T1).unwrap(), c1);
                    assert_eq!(shift(&t, Generator::T2).unwrap(), c2);
                }
                assert_eq!(t0.code() ^ t1.code(), 1);
            }
        }
        let a = Cylinder::new(0, 0).unwrap();
        let b = Cylinder::new(1, 0).unwrap();
        assert!(matches!(compose(0, &a, &b), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn compose_is_a_bijection_at_depth_one() {
        let mut seen = std::collections::HashSet::new();
        for e in 0..2 {
            for c1 in cylinders(1).unwrap() {
                for c2 in cylinders(1).unwrap() {
                    assert!(seen.insert(compose(e, &c1, &c2).unwrap()));
                }
            }
        }
        assert_eq!(seen.len() as u64, 2 * 8 * 8);
        assert_eq!(seen.len() as u64, cylinder_count(2).unwrap());
    }

    #[test]
    fn shifts_preserve_measure() {
        for n in 0..=2 {
            let child_mass = measure(&Cylinder::new(n + 1, 0).unwrap());
            for g in Generator::ALL {
                let mut counts = vec![0u64; cylinder_count(n).unwrap() as usize];
                for t in cylinders(n + 1).unwrap() {
                    counts[shift(&t, g).unwrap().code() as usize] += 1;
                }
                for a in cylinders(n).unwrap() {
                    let mass = child_mass.times(counts[a.code() as usize]).unwrap();
                    assert_eq!(mass, measure(&a));
                }
            }
        }
    }

    #[test]
    fn truncation_keeps_low_levels() {
        let c = Cylinder::new(2, 0b101_1011).unwrap();
        assert_eq!(c.truncate(1).unwrap().code(), 0b011);
        assert_eq!(c.truncate(0).unwrap().code(), 1);
        assert!(c.truncate(3).is_err());
    }

    #[test]
    fn sampling_is_reproducible_and_uniform() {
        assert_eq!(sample_cylinder(3, 42).unwrap(), sample_cylinder(3, 42).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_cylinder_with(2, &mut rng).unwrap().e_label() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        // 3 sigma of a fair binomial at 1e5 draws is 0.0047.
        assert!((freq - 0.5).abs() < 5e-3, "frequency {freq}");
    }

    #[test]
    fn dyadic_arithmetic() {
        let a = DyadicMass::new(1, 3).unwrap();
        let b = DyadicMass::new(3, 4).unwrap();
        assert_eq!(a.checked_add(&b).unwrap().to_rational(), ratio(5, 16));
        assert_eq!(a.checked_mul(&b).unwrap().to_rational(), ratio(3, 128));
        assert_eq!(DyadicMass::new(4, 3).unwrap(), DyadicMass::new(1, 1).unwrap());
        assert!(DyadicMass::new(9, 3).is_err());
        assert!(DyadicMass::one().checked_add(&a).is_err());
    }
}
