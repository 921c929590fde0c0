//! Arithmetic on the Prüfer group `Q_p/Z_p`, the dual of the p-adic integers.
//!
//! Every [`PruferElement`] is kept in reduced form `m/p^n` with `p ∤ m` (or the
//! zero class `0/p^0`), so its norm and sign can be read off directly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PqcError, Result};

/// An odd prime `p ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) || !is_prime(p) {
            return Err(PqcError::InvalidPrime(p));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^n`, or `None` if it does not fit in a `u64`.
    pub fn checked_pow(self, n: u32) -> Option<u64> {
        self.0.checked_pow(n)
    }

    /// `p^n` for levels that are known to be addressable.
    ///
    /// Panics if `p^n` overflows `u64`; use [`Prime::checked_pow`] for
    /// untrusted levels.
    #[inline]
    pub fn pow(self, n: u32) -> u64 {
        self.checked_pow(n).unwrap_or_else(|| panic!("p^n overflows u64 for p = {}, n = {n}", self.0))
    }

    /// Number of level-`n` cosets, as a `usize` index bound.
    #[inline]
    pub fn dim(self, n: u32) -> usize {
        self.pow(n) as usize
    }

    /// Checks that `p^n` is addressable.
    pub fn check_level(self, n: u32) -> Result<u64> {
        self.checked_pow(n).filter(|&d| d <= usize::MAX as u64).ok_or(PqcError::LevelOverflow { p: self.0, level: n })
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        Prime::new(p).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Value of a quadratic character: −1, 0 or +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    #[inline]
    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Zero => 0,
            Sign::Plus => 1,
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        f64::from(self.to_i8())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.to_i8())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_i8())
    }
}

fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = u128::from(modulus);
    let mut b = u128::from(base) % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(t | p)` by Euler's criterion.
pub fn legendre_symbol(t: i64, p: Prime) -> Sign {
    let pp = p.get();
    let r = i128::from(t).rem_euclid(i128::from(pp)) as u64;
    if r == 0 {
        return Sign::Zero;
    }
    if mod_pow(r, (pp - 1) / 2, pp) == 1 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// p-adic valuation of a nonzero integer. `None` for zero.
pub fn valuation(mut j: u64, p: Prime) -> Option<u32> {
    if j == 0 {
        return None;
    }
    let mut v = 0;
    while j.is_multiple_of(p.get()) {
        j /= p.get();
        v += 1;
    }
    Some(v)
}

/// The class of `m / p^n` in `Q_p/Z_p`, stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PruferElement {
    p: Prime,
    num: u64,
    level: u32,
}

impl PruferElement {
    pub fn zero(p: Prime) -> Self {
        PruferElement { p, num: 0, level: 0 }
    }

    /// Reduced representative of `(m mod p^n) / p^n`.
    ///
    /// Panics if `p^n` does not fit in a `u64`.
    pub fn reduce(m: i128, n: u32, p: Prime) -> Self {
        let modulus = p.pow(n);
        let mut num = m.rem_euclid(i128::from(modulus)) as u64;
        if num == 0 {
            return Self::zero(p);
        }
        let mut level = n;
        while num.is_multiple_of(p.get()) {
            num /= p.get();
            level -= 1;
        }
        PruferElement { p, num, level }
    }

    /// The element `t / p^level` labelling DFT bin `t` at that level.
    #[inline]
    pub fn from_index(t: usize, level: u32, p: Prime) -> Self {
        Self::reduce(t as i128, level, p)
    }

    /// DFT bin of this element at `level`, or `None` if its norm exceeds `p^level`.
    pub fn to_index(&self, level: u32) -> Option<usize> {
        if self.level > level {
            return None;
        }
        Some((self.num * self.p.pow(level - self.level)) as usize)
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn numerator(&self) -> u64 {
        self.num
    }

    /// `n` in the reduced form `m/p^n`; 0 for the zero class.
    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `|α|_p`: `p^n` for reduced `m/p^n`, 0 on the zero class.
    pub fn norm(&self) -> u64 {
        if self.is_zero() {
            0
        } else {
            self.p.pow(self.level)
        }
    }

    /// Legendre symbol of the leading p-adic digit; zero on the zero class.
    pub fn sgn(&self) -> Sign {
        if self.is_zero() {
            Sign::Zero
        } else {
            legendre_symbol((self.num % self.p.get()) as i64, self.p)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(PqcError::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        let level = self.level.max(other.level);
        let a = u128::from(self.num) * u128::from(self.p.pow(level - self.level));
        let b = u128::from(other.num) * u128::from(self.p.pow(level - other.level));
        Ok(Self::reduce((a + b) as i128, level, self.p))
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return *self;
        }
        PruferElement { p: self.p, num: self.p.pow(self.level) - self.num, level: self.level }
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    /// Parses `"m/d"` with `d` a power of `p`, `"m/p^n"` or `"0"`.
    pub fn parse(s: &str, p: Prime) -> Result<Self> {
        let malformed = || PqcError::MalformedElement(s.to_string());
        let s = s.trim();
        let Some((num, den)) = s.split_once('/') else {
            let m: i64 = s.parse().map_err(|_| malformed())?;
            return Ok(Self::reduce(i128::from(m), 0, p));
        };
        let m: i64 = num.trim().parse().map_err(|_| malformed())?;
        let den = den.trim();
        let level = if let Some((base, exp)) = den.split_once('^') {
            let base: u64 = base.trim().parse().map_err(|_| malformed())?;
            if base != p.get() {
                return Err(malformed());
            }
            exp.trim().parse::<u32>().map_err(|_| malformed())?
        } else {
            let mut d: u64 = den.parse().map_err(|_| malformed())?;
            let mut n = 0;
            while d > 1 && d.is_multiple_of(p.get()) {
                d /= p.get();
                n += 1;
            }
            if d != 1 {
                return Err(malformed());
            }
            n
        };
        p.check_level(level)?;
        Ok(Self::reduce(i128::from(m), level, p))
    }
}

impl fmt::Display for PruferElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.norm())
        }
    }
}

impl FromStr for Sign {
    type Err = PqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-1" => Ok(Sign::Minus),
            "0" => Ok(Sign::Zero),
            "1" | "+1" => Ok(Sign::Plus),
            other => Err(PqcError::MalformedElement(other.to_string())),
        }
    }
}

/// All `α` with `|α|_p ≤ p^level`, position `t` holding `t / p^level`.
pub fn enumerate_dual(p: Prime, level: u32) -> Vec<PruferElement> {
    (0..p.dim(level)).map(|t| PruferElement::from_index(t, level, p)).collect()
}

/// `sgn` of every dual element at `level`, in enumeration order.
pub fn sign_table(p: Prime, level: u32) -> Vec<Sign> {
    (0..p.dim(level)).map(|t| PruferElement::from_index(t, level, p).sgn()).collect()
}

/// `|α|_p` of every dual element at `level`, in enumeration order.
pub fn norm_table(p: Prime, level: u32) -> Vec<u64> {
    (0..p.dim(level)).map(|t| PruferElement::from_index(t, level, p).norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn el(m: i128, n: u32, pr: u64) -> PruferElement {
        PruferElement::reduce(m, n, p(pr))
    }

    #[test]
    fn prime_validation() {
        assert!(Prime::new(2).is_err());
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(4).is_err());
        for q in [3, 5, 7, 11, 13, 101] {
            assert!(Prime::new(q).is_ok());
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(1, p(3)), Sign::Plus);
        assert_eq!(legendre_symbol(2, p(3)), Sign::Minus);
        assert_eq!(legendre_symbol(4, p(5)), Sign::Plus);
        assert_eq!(legendre_symbol(10, p(5)), Sign::Zero);
        assert_eq!(legendre_symbol(-1, p(5)), Sign::Plus);
        assert_eq!(legendre_symbol(-1, p(7)), Sign::Minus);
    }

    #[test]
    fn legendre_matches_enumerated_squares() {
        for pr in [3u64, 5, 7, 11, 13] {
            let squares: Vec<u64> = (1..pr).map(|x| x * x % pr).collect();
            for t in 1..pr {
                let expected = if squares.contains(&t) { Sign::Plus } else { Sign::Minus };
                assert_eq!(legendre_symbol(t as i64, p(pr)), expected, "t={t} p={pr}");
            }
        }
    }

    #[test]
    fn legendre_multiplicative_and_balanced() {
        for pr in [3u64, 5, 7, 11, 13, 17] {
            let q = p(pr);
            for a in 1..pr as i64 {
                for b in 1..pr as i64 {
                    assert_eq!(
                        legendre_symbol(a * b, q).to_i8(),
                        legendre_symbol(a, q).to_i8() * legendre_symbol(b, q).to_i8()
                    );
                }
            }
            let residues = (1..pr as i64).filter(|&t| legendre_symbol(t, q) == Sign::Plus).count();
            assert_eq!(residues as u64, (pr - 1) / 2);
        }
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(el(3, 2, 3), el(1, 1, 3));
        assert_eq!(el(3, 2, 3).level(), 1);
        assert!(el(9, 2, 3).is_zero());
        assert_eq!(el(10, 2, 3), el(1, 2, 3));
        assert_eq!(el(-1, 1, 3), el(2, 1, 3));
    }

    #[test]
    fn add_neg_norm_examples() {
        let q = p(3);
        let third = el(1, 1, 3);
        assert!(third.checked_add(&el(2, 1, 3)).unwrap().is_zero());
        assert_eq!(third.checked_add(&el(1, 2, 3)).unwrap(), el(4, 2, 3));
        assert_eq!(el(1, 2, 3).checked_add(&el(2, 2, 3)).unwrap(), third);
        assert_eq!(third.neg(), el(2, 1, 3));
        assert_eq!(el(2, 2, 3).norm(), 9);
        assert_eq!(PruferElement::zero(q).norm(), 0);
        let err = third.checked_add(&el(1, 1, 5)).unwrap_err();
        assert!(matches!(err, PqcError::PrimeMismatch { .. }));
    }

    #[test]
    fn sgn_examples() {
        assert_eq!(PruferElement::zero(p(3)).sgn(), Sign::Zero);
        assert_eq!(el(1, 1, 3).sgn(), Sign::Plus);
        assert_eq!(el(2, 1, 3).sgn(), Sign::Minus);
    }

    #[test]
    fn dual_enumeration_examples() {
        assert_eq!(enumerate_dual(p(3), 0), vec![PruferElement::zero(p(3))]);
        let lvl1: Vec<String> = enumerate_dual(p(3), 1).iter().map(|a| a.to_string()).collect();
        assert_eq!(lvl1, ["0", "1/3", "2/3"]);
        let lvl2: Vec<String> = enumerate_dual(p(3), 2).iter().map(|a| a.to_string()).collect();
        assert_eq!(lvl2, ["0", "1/9", "2/9", "1/3", "4/9", "5/9", "2/3", "7/9", "8/9"]);
        for (t, a) in enumerate_dual(p(5), 3).iter().enumerate() {
            assert_eq!(a.to_index(3), Some(t));
        }
    }

    fn small_dual(pr: u64, level: u32) -> Vec<PruferElement> {
        enumerate_dual(p(pr), level)
    }

    #[test]
    fn group_laws_exhaustive() {
        for pr in [3u64, 5] {
            let all = small_dual(pr, 3);
            let zero = PruferElement::zero(p(pr));
            for a in &all {
                assert_eq!(a.neg().checked_add(a).unwrap(), zero);
                assert_eq!(a.checked_add(&zero).unwrap(), *a);
                for b in &all {
                    let ab = a.checked_add(b).unwrap();
                    assert_eq!(ab, b.checked_add(a).unwrap());
                    // ultrametric law
                    let (na, nb, nab) = (a.norm(), b.norm(), ab.norm());
                    assert!(nab <= na.max(nb));
                    if na != nb {
                        assert_eq!(nab, na.max(nb));
                    }
                }
            }
            // associativity on a stride to keep the cube small
            for a in all.iter().step_by(5) {
                for b in all.iter().step_by(3) {
                    for c in &all {
                        let l = a.checked_add(b).unwrap().checked_add(c).unwrap();
                        let r = a.checked_add(&b.checked_add(c).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn sgn_independent_of_representative() {
        for pr in [3u64, 5, 7] {
            for a in small_dual(pr, 2) {
                for k in 0..3u32 {
                    let m = i128::from(a.numerator()) * i128::from(p(pr).pow(k));
                    let b = PruferElement::reduce(m, a.level() + k, p(pr));
                    assert_eq!(b.sgn(), a.sgn());
                    assert_eq!(b, a);
                }
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let q = p(3);
        assert_eq!(PruferElement::parse("2/9", q).unwrap(), el(2, 2, 3));
        assert_eq!(PruferElement::parse("2/3^2", q).unwrap(), el(2, 2, 3));
        assert_eq!(PruferElement::parse("3/9", q).unwrap(), el(1, 1, 3));
        assert!(PruferElement::parse("0", q).unwrap().is_zero());
        assert!(PruferElement::parse("1/6", q).is_err());
        assert!(PruferElement::parse("1/5^2", q).is_err());
        assert!(PruferElement::parse("x/3", q).is_err());
        for a in small_dual(3, 3) {
            assert_eq!(PruferElement::parse(&a.to_string(), q).unwrap(), a);
        }
    }

    #[test]
    fn valuation_basics() {
        assert_eq!(valuation(0, p(3)), None);
        assert_eq!(valuation(18, p(3)), Some(2));
        assert_eq!(valuation(7, p(3)), Some(0));
    }
}
