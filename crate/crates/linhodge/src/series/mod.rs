//! Truncated one-variable Laurent series over the rationals.
//!
//! A series stores the coefficients of exponents `min_exp..=order`. Anything
//! above `order` is unknown, so every operation computes the order it can
//! actually vouch for and comparisons refuse to look past it.

pub mod named;

pub use named::*;

use std::fmt;

use serde::Serialize;

use crate::exactnum::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    Z,
    /// `w = 1/z`, used for series in descending powers of `z`.
    W,
    Y,
    /// `s = (2y)^{1/2}`
    S,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Var::Z => "z",
            Var::W => "w",
            Var::Y => "y",
            Var::S => "s",
        };
        f.write_str(s)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    var: Var,
    min_exp: i64,
    order: i64,
    coeffs: Vec<Rational>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*{}", self.var)?,
                _ => write!(f, "({c})*{}^{e}", self.var)?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O({}^{})", self.var, self.order + 1)
    }
}

impl TruncatedSeries {
    /// `coeffs[i]` is the coefficient of `var^(min_exp + i)`; entries beyond
    /// `order` are dropped and missing ones are zero.
    pub fn new(var: Var, min_exp: i64, mut coeffs: Vec<Rational>, order: i64) -> Self {
        let len = (order - min_exp + 1).max(0) as usize;
        coeffs.resize(len, Rational::zero());
        TruncatedSeries { var, min_exp, order, coeffs }
    }

    pub fn zero(var: Var, order: i64) -> Self {
        Self::new(var, 0, vec![], order)
    }

    pub fn one(var: Var, order: i64) -> Self {
        Self::monomial(var, 0, Rational::one(), order)
    }

    pub fn monomial(var: Var, e: i64, c: Rational, order: i64) -> Self {
        Self::new(var, e.min(order + 1), if e <= order { vec![c] } else { vec![] }, order)
    }

    /// The variable itself, `var^1`.
    pub fn var(var: Var, order: i64) -> Self {
        Self::monomial(var, 1, Rational::one(), order)
    }

    /// From `(exponent, coefficient)` pairs.
    pub fn from_terms(var: Var, terms: &[(i64, Rational)], order: i64) -> Self {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0).min(order + 1);
        let mut s = Self::new(var, lo, vec![], order);
        for (e, c) in terms {
            if *e <= order {
                let i = (e - lo) as usize;
                s.coeffs[i] += c;
            }
        }
        s
    }

    pub fn var_tag(&self) -> Var {
        self.var
    }

    pub fn min_exp(&self) -> i64 {
        self.min_exp
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// Coefficient of `var^e`; asking beyond the known order is an error.
    pub fn coeff(&self, e: i64) -> Result<Rational> {
        if e > self.order {
            return Err(Error::Precision(format!(
                "coefficient of {}^{e} requested but series is only known through order {}",
                self.var, self.order
            )));
        }
        Ok(self.get(e))
    }

    fn get(&self, e: i64) -> Rational {
        if e < self.min_exp || e > self.order {
            Rational::zero()
        } else {
            self.coeffs[(e - self.min_exp) as usize].clone()
        }
    }

    fn get_ref(&self, e: i64) -> Option<&Rational> {
        if e < self.min_exp || e > self.order {
            None
        } else {
            Some(&self.coeffs[(e - self.min_exp) as usize])
        }
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.min_exp + i as i64, c))
    }

    /// Lowest exponent with a nonzero coefficient, if any is known.
    pub fn valuation(&self) -> Option<i64> {
        self.terms().next().map(|t| t.0)
    }

    /// Lower bound on the valuation: the true one, or `order + 1` if every
    /// known coefficient vanishes.
    fn val_bound(&self) -> i64 {
        self.valuation().unwrap_or(self.order + 1)
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        Self::new(self.var, self.min_exp.min(order + 1), self.coeffs.clone(), order)
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    fn same_var(&self, o: &Self) -> Result<()> {
        if self.var != o.var {
            return Err(Error::Domain(format!("series in {} and {} cannot be combined", self.var, o.var)));
        }
        Ok(())
    }

    /// True when the two series agree on every exponent both of them know.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let top = self.order.min(o.order);
        let lo = self.min_exp.min(o.min_exp);
        self.var == o.var && (lo..=top).all(|e| self.get(e) == o.get(e))
    }

    /// Equality through `order`; refuses if either side is not known that far.
    pub fn eq_through(&self, o: &Self, order: i64) -> Result<bool> {
        if order > self.order || order > o.order {
            return Err(Error::Precision(format!(
                "cannot compare through order {order}: known orders are {} and {}",
                self.order, o.order
            )));
        }
        let lo = self.min_exp.min(o.min_exp);
        Ok(self.var == o.var && (lo..=order).all(|e| self.get(e) == o.get(e)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_var(o)?;
        let order = self.order.min(o.order);
        let lo = self.min_exp.min(o.min_exp).min(order + 1);
        let c = (lo..=order).map(|e| self.get(e) + &o.get(e)).collect();
        Ok(Self::new(self.var, lo, c, order))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from_int(-1))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self { coeffs, ..self.clone() }
    }

    /// Multiply by `var^k`; exact, so the order moves with it.
    pub fn shift(&self, k: i64) -> Self {
        Self { min_exp: self.min_exp + k, order: self.order + k, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_var(o)?;
        let (va, vb) = (self.val_bound(), o.val_bound());
        let order = (self.order + vb).min(o.order + va);
        let lo = (va + vb).min(order + 1);
        let mut c = vec![Rational::zero(); (order - lo + 1).max(0) as usize];
        for (ea, ca) in self.terms() {
            for (eb, cb) in o.terms() {
                let e = ea + eb;
                if e > order {
                    break;
                }
                c[(e - lo) as usize] += ca * cb;
            }
        }
        Ok(Self::new(self.var, lo, c, order))
    }

    pub fn inverse(&self) -> Result<Self> {
        let v = self.valuation().ok_or_else(|| {
            Error::Domain(format!("cannot invert a series with no known nonzero coefficient (order {})", self.order))
        })?;
        // self = c var^v (1 + r); invert the unit part degree by degree
        let unit = self.shift(-v);
        let n = unit.order;
        let c0 = unit.get(0);
        let mut inv = vec![Rational::zero(); (n + 1).max(0) as usize];
        if n >= 0 {
            inv[0] = c0.recip();
        }
        for k in 1..=n {
            let mut s = Rational::zero();
            for j in 1..=k {
                if let Some(a) = unit.get_ref(j) {
                    if !a.is_zero() {
                        s += a * &inv[(k - j) as usize];
                    }
                }
            }
            inv[k as usize] = -(s * &inv[0]);
        }
        Ok(Self::new(self.var, 0, inv, n).shift(-v))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.same_var(o)?;
        let inv = o.inverse().map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("division: {m}")),
            other => other,
        })?;
        self.mul(&inv)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        if k == 0 {
            return Ok(Self::one(self.var, self.order - self.val_bound().min(self.order)));
        }
        let mut acc: Option<Self> = None;
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc.unwrap())
    }

    /// d/dvar
    pub fn derivative(&self) -> Self {
        let c = (self.min_exp..=self.order).map(|e| self.get(e) * Rational::from_int(e)).collect();
        Self::new(self.var, self.min_exp - 1, c, self.order - 1)
    }

    /// var · d/dvar, which keeps the order.
    pub fn euler(&self) -> Self {
        self.derivative().shift(1)
    }

    pub fn log(&self) -> Result<Self> {
        if self.min_exp < 0 && (self.min_exp..0).any(|e| !self.get(e).is_zero()) || !self.get(0).is_one() {
            return Err(Error::Domain(format!("log needs leading term 1 at exponent 0; got {}", self)));
        }
        // n L_n = n f_n - sum_{k<n} k L_k f_{n-k}
        let n = self.order;
        let mut l = vec![Rational::zero(); (n + 1).max(0) as usize];
        for m in 1..=n {
            let mut s = Rational::from_int(m) * self.get(m);
            for k in 1..m {
                s -= Rational::from_int(k) * &l[k as usize] * self.get(m - k);
            }
            l[m as usize] = s / Rational::from_int(m);
        }
        Ok(Self::new(self.var, 0, l, n))
    }

    pub fn exp(&self) -> Result<Self> {
        if let Some(v) = self.valuation() {
            if v < 1 {
                return Err(Error::Domain(format!("exp needs valuation >= 1, found a term at exponent {v}")));
            }
        }
        let n = self.order;
        let mut e = vec![Rational::zero(); (n + 1).max(0) as usize];
        if n >= 0 {
            e[0] = Rational::one();
        }
        for m in 1..=n {
            let mut s = Rational::zero();
            for k in 1..=m {
                let g = self.get(k);
                if !g.is_zero() {
                    s += Rational::from_int(k) * g * &e[(m - k) as usize];
                }
            }
            e[m as usize] = s / Rational::from_int(m);
        }
        Ok(Self::new(self.var, 0, e, n))
    }

    /// Square root with positive leading coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        let v = self.valuation().ok_or_else(|| Error::Domain("sqrt of a series with no known nonzero term".into()))?;
        if v % 2 != 0 {
            return Err(Error::Domain(format!("sqrt needs even valuation, got {v}")));
        }
        let c = self.get(v);
        let rc = c
            .sqrt()
            .ok_or_else(|| Error::Domain(format!("sqrt needs a square leading coefficient, got {c} at exponent {v}")))?;
        let unit = self.shift(-v).scale(&c.recip());
        let n = unit.order;
        let mut s = vec![Rational::zero(); (n + 1).max(0) as usize];
        if n >= 0 {
            s[0] = Rational::one();
        }
        for m in 1..=n {
            let mut acc = unit.get(m);
            for k in 1..m {
                acc -= &s[k as usize] * &s[(m - k) as usize];
            }
            s[m as usize] = acc / Rational::from_int(2);
        }
        Ok(Self::new(self.var, 0, s, n).scale(&rc).shift(v / 2))
    }

    /// `outer(inner)`, with `inner` of valuation at least 1. A Laurent outer is
    /// allowed when `inner` has valuation exactly 1.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let vi = inner.valuation().ok_or_else(|| Error::Domain("compose: inner series is zero in its window".into()))?;
        if vi < 1 || (inner.min_exp..1).any(|e| !inner.get(e).is_zero()) {
            return Err(Error::Domain(format!("compose: inner series has a term below exponent 1 (valuation {vi})")));
        }
        let lo_outer = self.valuation().unwrap_or(self.order + 1);
        if lo_outer < 0 && vi != 1 {
            return Err(Error::Domain("compose: Laurent outer needs an inner series of valuation 1".into()));
        }
        // unknown outer terms start at exponent order+1
        let mut order = (self.order + 1) * vi - 1;
        // an error O(var^(N+1)) in inner reaches inner^k at (k-1) vi + N + 1
        if let Some(k) = self.terms().map(|t| t.0).find(|&k| k != 0) {
            order = order.min((k - 1) * vi + inner.order);
        }
        let mut acc = Self::zero(inner.var, order);
        let mut pw = Self::one(inner.var, order);
        let mut cur = 0i64;
        let neg_base = if lo_outer < 0 { Some(inner.inverse()?) } else { None };
        for (e, c) in self.terms() {
            let term = if e >= 0 {
                while cur < e {
                    pw = pw.mul(inner)?.truncate(order);
                    cur += 1;
                }
                pw.clone()
            } else {
                neg_base.as_ref().unwrap().pow(-e)?
            };
            acc = acc.add(&term.scale(c))?;
        }
        Ok(acc.truncate(order))
    }

    /// Compositional inverse of a valuation-1 series, solved order by order.
    pub fn comp_inverse(&self) -> Result<Self> {
        if self.valuation() != Some(1) || (self.min_exp..1).any(|e| !self.get(e).is_zero()) {
            return Err(Error::Domain(format!(
                "comp_inverse needs valuation exactly 1, got {:?}",
                self.valuation()
            )));
        }
        let n = self.order;
        let a1 = self.get(1);
        let mut g = Self::monomial(self.var, 1, a1.recip(), n);
        // [z^k] f(g) picks up g_k only through a1 * g_k
        for k in 2..=n {
            let fg = self.compose(&g.truncate(k))?;
            let err = fg.get(k);
            if !err.is_zero() {
                let fix = Self::monomial(self.var, k, -(err / &a1), n);
                g = g.add(&fix)?;
            }
        }
        Ok(g)
    }

    /// Apply `exp(sign Σ_k a_k var^{k+1} d/dvar + Σ_k mult_k var^k)` to `self`.
    /// `a[0]` is `a_1`; likewise for `mult`. Each application raises the
    /// exponent by at least one, so the exponential series terminates per
    /// coefficient.
    pub fn exp_derivation(&self, a: &[Rational], sign: i64, mult: Option<&[Rational]>) -> Result<Self> {
        let span = self.order - self.min_exp;
        let need = span.max(0) as usize;
        if a.len() < need || mult.is_some_and(|m| m.len() < need) {
            return Err(Error::Precision(format!(
                "exp_derivation over a window of {span} exponents needs {need} coefficients, got {}",
                a.len()
            )));
        }
        let sign = Rational::from_int(sign);
        let apply = |s: &Self| -> Self {
            let mut out = vec![Rational::zero(); s.coeffs.len()];
            for (e, c) in s.terms() {
                for k in 1..=(self.order - e) {
                    let idx = (e + k - s.min_exp) as usize;
                    let ak = &a[(k - 1) as usize];
                    if !ak.is_zero() && e != 0 {
                        out[idx] += &sign * ak * Rational::from_int(e) * c;
                    }
                    if let Some(m) = mult {
                        let mk = &m[(k - 1) as usize];
                        if !mk.is_zero() {
                            out[idx] += mk * c;
                        }
                    }
                }
            }
            Self::new(s.var, s.min_exp, out, s.order)
        };
        let mut total = self.clone();
        let mut term = self.clone();
        for n in 1..=span {
            term = apply(&term).scale(&Rational::new(1, n));
            if term.valuation().is_none() {
                break;
            }
            total = total.add(&term)?;
        }
        Ok(total)
    }

    /// The `a_1, a_2, …` with `exp(sign Σ a_m var^{1+m} d/dvar)·var = self`.
    pub fn solve_derivation_coeffs(&self, sign: i64) -> Result<Vec<Rational>> {
        if self.valuation() != Some(1) || !self.get(1).is_one() || (self.min_exp..1).any(|e| !self.get(e).is_zero()) {
            return Err(Error::Domain(format!("solve_derivation_coeffs needs target var + O(var^2), got {self}")));
        }
        let n = self.order;
        let mut a = vec![Rational::zero(); (n - 1).max(0) as usize];
        // a_m first shows up at var^{m+1}, with coefficient sign; nothing
        // past that order matters for step m
        for m in 1..n {
            let cur = Self::var(self.var, m + 1).exp_derivation(&a, sign, None)?;
            let diff = self.get(m + 1) - cur.get(m + 1);
            a[(m - 1) as usize] = diff * Rational::from_int(sign);
        }
        Ok(a)
    }

    /// For a series `z^n + Σ A_i z^{n-i}` (stored in `w = 1/z`), the
    /// polynomial part of positive degree: exponents `n` down to `1`. The
    /// constant term is dropped. Returned as an exact series in `z`.
    pub fn plus_part(&self) -> Result<Self> {
        if self.var != Var::W {
            return Err(Error::Domain("plus_part expects a series in w = 1/z".into()));
        }
        let v = self.valuation().ok_or_else(|| Error::Domain("plus_part of a zero series".into()))?;
        if v > -1 || !self.get(v).is_one() {
            return Err(Error::Domain(format!(
                "plus_part needs leading term z^n with n >= 1 and coefficient 1, got {} at w^{v}",
                self.get(v)
            )));
        }
        if self.order < 0 {
            return Err(Error::Precision("plus_part needs the series known down to z^0".into()));
        }
        let terms: Vec<(i64, Rational)> = (v..=-1).map(|e| (-e, self.get(e))).collect();
        Ok(Self::from_terms(Var::Z, &terms, -v))
    }

    /// Coefficients as `(exponent, value)` over the whole window, zeros included.
    pub fn window(&self) -> Vec<(i64, Rational)> {
        (self.min_exp..=self.order).map(|e| (e, self.get(e))).collect()
    }

    /// Substitute `var -> c·var`.
    pub fn rescale_var(&self, c: &Rational) -> Self {
        let coeffs = (self.min_exp..=self.order).map(|e| self.get(e) * c.pow(e as i32)).collect();
        Self::new(self.var, self.min_exp, coeffs, self.order)
    }
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    var: Var,
    min_exp: i64,
    order: i64,
    coeffs: Vec<(i64, &'a Rational)>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson { var: self.var, min_exp: self.min_exp, order: self.order, coeffs: self.terms().collect() }
            .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn poly(c: &[i64], order: i64) -> TruncatedSeries {
        TruncatedSeries::new(Var::Z, 0, c.iter().map(|&x| Rational::from_int(x)).collect(), order)
    }

    #[test]
    fn geometric() {
        let a = poly(&[1, 1], 10);
        let inv = a.inverse().unwrap();
        for e in 0..=10 {
            assert_eq!(inv.coeff(e).unwrap(), Rational::sign_pow(e));
        }
        let one = a.mul(&inv).unwrap();
        assert!(one.eq_through(&TruncatedSeries::one(Var::Z, 10), 10).unwrap());
        assert!(inv.coeff(11).is_err());
    }

    #[test]
    fn orders_propagate() {
        let x = TruncatedSeries::var(Var::Z, 8);
        let z2 = x.mul(&x).unwrap();
        assert_eq!(z2.order(), 9);
        let q = poly(&[1, 2, 1], 8).div(&z2).unwrap();
        assert_eq!(q.min_exp(), -2);
        assert_eq!(q.coeff(-2).unwrap(), r(1, 1));
        assert_eq!(q.coeff(-1).unwrap(), r(2, 1));
        assert_eq!(q.coeff(0).unwrap(), r(1, 1));
        assert!(q.coeff(3).unwrap().is_zero());
    }

    #[test]
    fn log_exp_roundtrip() {
        let g = poly(&[0, 1, -3, 5, 0, 7], 9);
        let e = g.exp().unwrap();
        assert!(e.log().unwrap().agrees_with(&g));
        let l = poly(&[1, 1], 6).log().unwrap();
        for k in 1..=6 {
            assert_eq!(l.coeff(k).unwrap(), Rational::sign_pow(k + 1) / Rational::from_int(k));
        }
        assert!(poly(&[2, 1], 5).log().is_err());
        assert!(poly(&[1, 1], 5).exp().is_err());
    }

    #[test]
    fn sqrt_branch() {
        let f = poly(&[1, 1], 10);
        let s = f.sqrt().unwrap();
        assert!(s.mul(&s).unwrap().agrees_with(&f));
        let z2 = poly(&[0, 0, 4, 4], 10);
        let s = z2.sqrt().unwrap();
        assert_eq!(s.coeff(1).unwrap(), r(2, 1));
        assert_eq!(s.order(), 9);
        assert!(poly(&[0, 1], 5).sqrt().is_err());
        assert!(poly(&[2], 5).sqrt().is_err());
    }

    fn lagrange_inverse(f: &TruncatedSeries) -> TruncatedSeries {
        // [z^n] g = (1/n) [w^{n-1}] (w/f)^n
        let n = f.order();
        let phi = f.shift(-1).inverse().unwrap();
        let mut c = vec![Rational::zero(); (n + 1) as usize];
        for k in 1..=n {
            let p = phi.pow(k).unwrap();
            c[k as usize] = p.coeff(k - 1).unwrap() / Rational::from_int(k);
        }
        TruncatedSeries::new(Var::Z, 0, c, n)
    }

    #[test]
    fn inversion_against_lagrange() {
        let f = poly(&[0, 1, 1], 12);
        let g = f.comp_inverse().unwrap();
        assert!(g.agrees_with(&lagrange_inverse(&f)));
        let catalan = [0, 1, -1, 2, -5, 14, -42];
        for (k, c) in catalan.iter().enumerate() {
            assert_eq!(g.coeff(k as i64).unwrap(), Rational::from_int(*c));
        }
        let f2 = poly(&[0, 3, -1, 0, 2, 5], 10);
        assert!(f2.comp_inverse().unwrap().agrees_with(&lagrange_inverse(&f2)));
        assert!(f2.comp_inverse().unwrap().comp_inverse().unwrap().agrees_with(&f2));
        assert!(poly(&[0, 0, 1], 5).comp_inverse().is_err());
    }

    #[test]
    fn compose_identity() {
        let f = poly(&[0, 1, 2, 3], 10);
        let g = f.comp_inverse().unwrap();
        let id = f.compose(&g).unwrap();
        assert!(id.agrees_with(&TruncatedSeries::var(Var::Z, 10)));
        assert_eq!(id.order(), 10);
        assert!(f.compose(&poly(&[1, 1], 5)).is_err());
    }

    #[test]
    fn laurent_outer_compose() {
        // z^{-1} ∘ (z + z^2) = 1/(z(1+z))
        let outer = TruncatedSeries::monomial(Var::Z, -1, Rational::one(), 6);
        let inner = poly(&[0, 1, 1], 8);
        let c = outer.compose(&inner).unwrap();
        let direct = inner.inverse().unwrap();
        assert!(c.agrees_with(&direct));
    }

    #[test]
    fn derivation_flow_is_composition() {
        // exp(a z^2 d/dz) z = z/(1 - a z)
        let a = vec![r(1, 2); 1].into_iter().chain(std::iter::repeat(Rational::zero()).take(20)).collect::<Vec<_>>();
        let out = TruncatedSeries::var(Var::Z, 10).exp_derivation(&a, 1, None).unwrap();
        for k in 1..=10 {
            assert_eq!(out.coeff(k).unwrap(), r(1, 2).pow((k - 1) as i32));
        }
        let back = TruncatedSeries::var(Var::Z, 10).exp_derivation(&a, -1, None).unwrap();
        assert!(out.compose(&back).unwrap().agrees_with(&TruncatedSeries::var(Var::Z, 10)));
        let coeffs = out.solve_derivation_coeffs(1).unwrap();
        assert_eq!(&coeffs[..], &a[..coeffs.len()]);
    }

    #[test]
    fn plus_part_of_descending_series() {
        // z^2 + 3 z + 5 + 7/z in w
        let f = TruncatedSeries::from_terms(Var::W, &[(-2, r(1, 1)), (-1, r(3, 1)), (0, r(5, 1)), (1, r(7, 1))], 4);
        let p = f.plus_part().unwrap();
        assert_eq!(p.coeff(2).unwrap(), r(1, 1));
        assert_eq!(p.coeff(1).unwrap(), r(3, 1));
        assert!(p.coeff(0).unwrap().is_zero());
        let bad = f.scale(&r(2, 1));
        assert!(bad.plus_part().is_err());
    }

    #[test]
    fn refuses_beyond_order() {
        let a = poly(&[1, 2], 3);
        let b = poly(&[1, 2], 5);
        assert!(a.eq_through(&b, 4).is_err());
        assert!(a.eq_through(&b, 3).unwrap());
    }

    #[test]
    fn json_shape() {
        let a = poly(&[1, 0, -1], 2);
        let j = serde_json::to_value(&a).unwrap();
        assert_eq!(j["var"], "z");
        assert_eq!(j["coeffs"][1][1], "-1");
    }
}
