//! Exact rationals and the small number families used throughout.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Arbitrary precision rational, always reduced with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    /// `n/d`; panics on `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_big(n: BigInt, d: BigInt) -> Self {
        assert!(!d.is_zero(), "zero denominator");
        Rational(BigRational::new(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn pow(&self, e: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, e))
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact square root if both numerator and denominator are perfect squares.
    pub fn sqrt(&self) -> Option<Self> {
        if self.0.is_negative() {
            return None;
        }
        let n = self.0.numer().sqrt();
        let d = self.0.denom().sqrt();
        if &(&n * &n) == self.0.numer() && &(&d * &d) == self.0.denom() {
            Some(Rational(BigRational::new(n, d)))
        } else {
            None
        }
    }

    /// `(-1)^k` as a rational.
    pub fn sign_pow(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Self::one()
        } else {
            Self::from_int(-1)
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            None => Ok(Rational::from_bigint(s.parse().map_err(|_| bad())?)),
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::from_big(n, d))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                Rational((self.0).$m(o.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: &'a Rational) -> Rational {
                Rational((self.0).$m(&o.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, o: &'a Rational) -> Rational {
                Rational((&self.0).$m(&o.0))
            }
        }
        impl $atr for Rational {
            fn $am(&mut self, o: Rational) {
                (self.0).$am(o.0)
            }
        }
        impl<'a> $atr<&'a Rational> for Rational {
            fn $am(&mut self, o: &'a Rational) {
                (self.0).$am(&o.0)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);

impl Div for Rational {
    type Output = Rational;
    fn div(self, o: Rational) -> Rational {
        assert!(!o.is_zero(), "division by zero");
        Rational(self.0 / o.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, o: &'a Rational) -> Rational {
        assert!(!o.is_zero(), "division by zero");
        Rational(&self.0 / &o.0)
    }
}

impl<'a> Div<&'a Rational> for Rational {
    type Output = Rational;
    fn div(self, o: &'a Rational) -> Rational {
        assert!(!o.is_zero(), "division by zero");
        Rational(self.0 / &o.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl<'a> Neg for &'a Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(it: I) -> Rational {
        it.fold(Rational::zero(), |a, b| a + b)
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> Rational {
    if k < 0 {
        return Rational::zero();
    }
    // generalized binomial, valid for negative n as well
    let mut r = Rational::one();
    for i in 0..k {
        r = r * Rational::new(n - i, i + 1);
    }
    r
}

/// Bernoulli number with `t/(e^t - 1)` normalization, so `B_1 = -1/2`.
pub fn bernoulli(m: usize) -> Rational {
    bernoulli_list(m).pop().unwrap()
}

fn bernoulli_list(m: usize) -> Vec<Rational> {
    // sum_{k<=n} C(n+1,k) B_k = 0
    let mut b = vec![Rational::one()];
    for n in 1..=m {
        let mut s = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += binomial(n as i64 + 1, k as i64) * bk;
        }
        b.push(-s / Rational::from_int(n as i64 + 1));
    }
    b
}

/// `k!!` for odd `k`, extended to negative odd arguments by
/// `(-2n-1)!! = (-1)^n / (2n-1)!!`.
pub fn double_factorial_odd(k: i64) -> Result<Rational, Error> {
    if k.rem_euclid(2) == 0 {
        return Err(Error::Domain(format!("double factorial needs an odd argument, got {k}")));
    }
    if k >= -1 {
        let mut r = BigInt::one();
        let mut i = k;
        while i > 1 {
            r *= BigInt::from(i);
            i -= 2;
        }
        return Ok(Rational::from_bigint(r));
    }
    let n = (-k - 1) / 2;
    Ok(Rational::sign_pow(n) / double_factorial_odd(2 * n - 1)?)
}

/// Permutations of `n` points with exactly `k` cycles, all of length at least 3.
pub fn d3_count(n: usize, k: usize) -> BigInt {
    // a[n][k]: element n either opens a 3-cycle with two of the other n-1
    // points, or is inserted after any of the n-1 points already placed.
    let mut a = vec![vec![BigInt::zero(); k + 1]; n + 1];
    a[0][0] = BigInt::one();
    for m in 1..=n {
        for j in 0..=k {
            let mut v = BigInt::zero();
            if m >= 1 {
                v += &a[m - 1][j] * BigInt::from(m - 1);
            }
            if m >= 3 && j >= 1 {
                let pairs = BigInt::from((m - 1) * (m - 2));
                v += &a[m - 3][j - 1] * pairs;
            }
            a[m][j] = v;
        }
    }
    a[n][k].clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Bernoulli,
    DoubleFactorialOdd,
    Binomial,
    D3Count,
}

/// Memoized access to one number family. The cache only grows, and the same
/// index always yields the same value.
#[derive(Debug)]
pub struct NumberFamily {
    kind: FamilyKind,
    cache: Mutex<HashMap<(i64, i64), Rational>>,
}

impl NumberFamily {
    pub fn new(kind: FamilyKind) -> Self {
        NumberFamily { kind, cache: Mutex::new(HashMap::new()) }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Second argument is ignored for the one-index families.
    pub fn get(&self, a: i64, b: i64) -> Result<Rational, Error> {
        let key = match self.kind {
            FamilyKind::Bernoulli | FamilyKind::DoubleFactorialOdd => (a, 0),
            _ => (a, b),
        };
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = match self.kind {
            FamilyKind::Bernoulli => {
                if a < 0 {
                    return Err(Error::Domain(format!("Bernoulli index {a} < 0")));
                }
                bernoulli(a as usize)
            }
            FamilyKind::DoubleFactorialOdd => double_factorial_odd(a)?,
            FamilyKind::Binomial => binomial(a, b),
            FamilyKind::D3Count => {
                if a < 0 || b < 0 {
                    return Err(Error::Domain(format!("d3 count of ({a}, {b})")));
                }
                Rational::from_bigint(d3_count(a as usize, b as usize))
            }
        };
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

pub fn lcm_denominators<'a>(it: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    it.into_iter().fold(BigInt::one(), |a, r| a.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn bernoulli_matches_series_division() {
        // t/(e^t-1) = 1/(sum t^k/(k+1)!)
        let n = 12;
        let e: Vec<Rational> =
            (0..=n).map(|k| Rational::from_big(BigInt::one(), factorial(k as u64 + 1))).collect();
        let mut inv = vec![Rational::zero(); n + 1];
        inv[0] = Rational::one();
        for k in 1..=n {
            let s: Rational = (1..=k).map(|j| &e[j] * &inv[k - j]).sum();
            inv[k] = -s;
        }
        for (m, c) in inv.iter().enumerate() {
            let expect = c * &Rational::from_bigint(factorial(m as u64));
            assert_eq!(bernoulli(m), expect, "B_{m}");
        }
        assert_eq!(bernoulli(1), r(-1, 2));
        assert_eq!(bernoulli(2), r(1, 6));
        for k in 1..10 {
            assert!(bernoulli(2 * k + 1).is_zero());
        }
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(5).unwrap(), r(15, 1));
        assert_eq!(double_factorial_odd(-1).unwrap(), r(1, 1));
        assert_eq!(double_factorial_odd(-3).unwrap(), r(-1, 1));
        assert!(double_factorial_odd(4).is_err());
        for n in 1..10 {
            let p = double_factorial_odd(2 * n - 1).unwrap() * double_factorial_odd(-2 * n - 1).unwrap();
            assert_eq!(p, Rational::sign_pow(n));
        }
    }

    fn cycle_lengths(p: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; p.len()];
        let mut out = vec![];
        for s in 0..p.len() {
            if seen[s] {
                continue;
            }
            let (mut i, mut l) = (s, 0);
            while !seen[i] {
                seen[i] = true;
                i = p[i];
                l += 1;
            }
            out.push(l);
        }
        out
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn d3_against_enumeration() {
        for n in 0..=7 {
            let perms = permutations(n);
            let mut free = 0u64;
            for k in 0..=3 {
                let brute = perms
                    .iter()
                    .filter(|p| {
                        let c = cycle_lengths(p);
                        c.len() == k && c.iter().all(|&l| l >= 3)
                    })
                    .count();
                assert_eq!(d3_count(n, k), BigInt::from(brute), "n={n} k={k}");
                free += brute as u64;
            }
            let no_small = perms.iter().filter(|p| cycle_lengths(p).iter().all(|&l| l >= 3)).count();
            assert_eq!(free, no_small as u64);
        }
        assert_eq!(d3_count(3, 1), BigInt::from(2));
        assert_eq!(d3_count(2, 1), BigInt::from(0));
        assert_eq!(d3_count(6, 2), BigInt::from(40));
    }

    #[test]
    fn family_cache_is_stable() {
        let f = NumberFamily::new(FamilyKind::Bernoulli);
        let a = f.get(10, 0).unwrap();
        assert_eq!(a, f.get(10, 0).unwrap());
        assert_eq!(a, r(5, 66));
        let d = NumberFamily::new(FamilyKind::D3Count);
        assert_eq!(d.get(6, 2).unwrap(), r(40, 1));
    }

    #[test]
    fn string_round_trip() {
        for s in ["0", "-3", "7/12", "-571/2488320"] {
            let x: Rational = s.parse().unwrap();
            assert_eq!(x.to_string(), s);
        }
        assert_eq!("4/6".parse::<Rational>().unwrap().to_string(), "2/3");
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(serde_json::to_string(&r(-1, 2)).unwrap(), "\"-1/2\"");
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(r(9, 4).sqrt(), Some(r(3, 2)));
        assert_eq!(r(2, 1).sqrt(), None);
    }
}
