//! Weight-truncated polynomial rings in `q_1, q_2, …` (or `t_0, t_1, …`) with
//! powers of `u` as coefficients. Weights: `u` is 1, `q_k` is `k`, `t_k` is `2k+1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::exactnum::{double_factorial_odd, factorial, Rational};
use crate::tables::BracketTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Q,
    T,
}

impl Family {
    pub fn var_weight(self, k: u16) -> i64 {
        match self {
            Family::Q => k as i64,
            Family::T => 2 * k as i64 + 1,
        }
    }

    pub fn var_name(self) -> &'static str {
        match self {
            Family::Q => "q",
            Family::T => "t",
        }
    }
}

pub type Vars = SmallVec<[u16; 8]>;

/// Cap used for results that are exact rather than truncated.
pub const UNCAPPED: i64 = i64::MAX / 4;

/// `u^u · Π vars`, with `vars` sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub u: i32,
    pub vars: Vars,
}

impl Mono {
    pub fn new(u: i32, mut vars: Vars) -> Self {
        vars.sort_unstable();
        Mono { u, vars }
    }

    pub fn one() -> Self {
        Mono { u: 0, vars: Vars::new() }
    }

    pub fn weight(&self, fam: Family) -> i64 {
        self.u as i64 + self.var_weight(fam)
    }

    /// Weight carried by the variables alone.
    pub fn var_weight(&self, fam: Family) -> i64 {
        self.vars.iter().map(|&k| fam.var_weight(k)).sum()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut v: Vars = Vars::with_capacity(self.vars.len() + o.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() || j < o.vars.len() {
            if j == o.vars.len() || (i < self.vars.len() && self.vars[i] <= o.vars[j]) {
                v.push(self.vars[i]);
                i += 1;
            } else {
                v.push(o.vars[j]);
                j += 1;
            }
        }
        Mono { u: self.u + o.u, vars: v }
    }

    /// Multiplicity of `k` in the monomial.
    pub fn count(&self, k: u16) -> usize {
        self.vars.iter().filter(|&&x| x == k).count()
    }

    /// Remove one copy of `k`; returns the multiplicity before removal.
    pub fn remove_one(&self, k: u16) -> Option<(usize, Mono)> {
        let c = self.count(k);
        if c == 0 {
            return None;
        }
        let pos = self.vars.iter().position(|&x| x == k).unwrap();
        let mut v = self.vars.clone();
        v.remove(pos);
        Some((c, Mono { u: self.u, vars: v }))
    }

    /// Size of the automorphism group of the multiset, `Π k_i!`.
    pub fn aut(&self) -> Rational {
        let mut r = Rational::one();
        let mut i = 0;
        while i < self.vars.len() {
            let mut j = i;
            while j < self.vars.len() && self.vars[j] == self.vars[i] {
                j += 1;
            }
            r = r * Rational::from_bigint(factorial((j - i) as u64));
            i = j;
        }
        r
    }

    pub fn render(&self, fam: Family) -> String {
        let mut parts = vec![];
        match self.u {
            0 => {}
            1 => parts.push("u".to_string()),
            e => parts.push(format!("u^{e}")),
        }
        let mut i = 0;
        while i < self.vars.len() {
            let mut j = i;
            while j < self.vars.len() && self.vars[j] == self.vars[i] {
                j += 1;
            }
            let name = format!("{}{}", fam.var_name(), self.vars[i]);
            parts.push(if j - i == 1 { name } else { format!("{name}^{}", j - i) });
            i = j;
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct GradedPoly {
    pub family: Family,
    pub cap: i64,
    terms: BTreeMap<Mono, Rational>,
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let s: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c})*{}", m.render(self.family))).collect();
        f.write_str(&s.join(" + "))
    }
}

impl Serialize for GradedPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (m, c) in &self.terms {
            seq.serialize_element(&(m.u, m.vars.as_slice(), c))?;
        }
        seq.end()
    }
}

impl GradedPoly {
    pub fn zero(family: Family, cap: i64) -> Self {
        GradedPoly { family, cap, terms: BTreeMap::new() }
    }

    pub fn constant(family: Family, cap: i64, c: Rational) -> Self {
        let mut p = Self::zero(family, cap);
        p.add_term(Mono::one(), c);
        p
    }

    pub fn var(family: Family, cap: i64, k: u16) -> Self {
        let mut p = Self::zero(family, cap);
        p.add_term(Mono::new(0, Vars::from_slice(&[k])), Rational::one());
        p
    }

    pub fn monomial(family: Family, cap: i64, m: Mono, c: Rational) -> Self {
        let mut p = Self::zero(family, cap);
        p.add_term(m, c);
        p
    }

    /// Add `c·m`, silently dropping it if its weight exceeds the cap.
    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() || m.weight(self.family) > self.cap {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn with_cap(&self, cap: i64) -> Self {
        let mut p = Self::zero(self.family, cap);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn add_assign(&mut self, o: &GradedPoly) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &GradedPoly, s: &Rational) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c * s);
        }
    }

    pub fn add(&self, o: &GradedPoly) -> GradedPoly {
        let mut p = self.clone();
        p.cap = p.cap.min(o.cap);
        p = p.with_cap(p.cap);
        p.add_assign(o);
        p
    }

    pub fn sub(&self, o: &GradedPoly) -> GradedPoly {
        self.add(&o.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, s: &Rational) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * s);
        }
        p
    }

    /// Product, truncated at the smaller cap.
    pub fn mul(&self, o: &GradedPoly) -> GradedPoly {
        let cap = self.cap.min(o.cap);
        let mut p = Self::zero(self.family, cap);
        let fam = self.family;
        let rhs: Vec<(&Mono, &Rational, i64)> = o.terms.iter().map(|(m, c)| (m, c, m.weight(fam))).collect();
        for (ma, ca) in &self.terms {
            let wa = ma.weight(fam);
            for (mb, cb, wb) in &rhs {
                if wa + wb <= cap {
                    p.add_term(ma.mul(mb), ca * *cb);
                }
            }
        }
        p
    }

    pub fn mul_mono(&self, m: &Mono, s: &Rational) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (mm, c) in &self.terms {
            p.add_term(mm.mul(m), c * s);
        }
        p
    }

    /// `∂/∂x_k`, where `x` is `q` or `t` according to the family.
    pub fn deriv(&self, k: u16) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            if let Some((mult, rest)) = m.remove_one(k) {
                p.add_term(rest, c * &Rational::from_int(mult as i64));
            }
        }
        p
    }

    /// `u ∂/∂u`, diagonal on monomials.
    pub fn u_euler(&self) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * &Rational::from_int(m.u as i64));
        }
        p
    }

    /// Part of total weight exactly `w`.
    pub fn weight_part(&self, w: i64) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            if m.weight(self.family) == w {
                p.add_term(m.clone(), c.clone());
            }
        }
        p
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.weight(self.family)).max()
    }

    pub fn min_weight(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.weight(self.family)).min()
    }

    /// Largest weight carried by the variables in any single term.
    pub fn max_var_weight(&self) -> i64 {
        self.terms.keys().map(|m| m.var_weight(self.family)).max().unwrap_or(0)
    }

    pub fn max_var_index(&self) -> u16 {
        self.terms.keys().filter_map(|m| m.vars.last().copied()).max().unwrap_or(0)
    }

    /// Set `u = 0`.
    pub fn at_u0(&self) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            if m.u == 0 {
                p.add_term(m.clone(), c.clone());
            }
        }
        p
    }

    /// Set `u = 1`; the result is no longer homogeneous, so the cap is lifted.
    pub fn at_u1(&self) -> GradedPoly {
        let mut p = Self::zero(self.family, UNCAPPED);
        for (m, c) in &self.terms {
            p.add_term(Mono { u: 0, vars: m.vars.clone() }, c.clone());
        }
        p
    }

    /// Multiply by `u^e`, keeping the cap.
    pub fn shift_u(&self, e: i32) -> GradedPoly {
        let mut p = Self::zero(self.family, self.cap);
        for (m, c) in &self.terms {
            p.add_term(Mono { u: m.u + e, vars: m.vars.clone() }, c.clone());
        }
        p
    }

    /// Lowest-weight term, if any: the natural counterexample to report.
    pub fn lowest_term(&self) -> Option<(Mono, Rational)> {
        self.terms
            .iter()
            .min_by_key(|(m, _)| (m.weight(self.family), (*m).clone()))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn render_term(&self, m: &Mono, c: &Rational) -> String {
        format!("({c})*{}", m.render(self.family))
    }

    /// Apply a ring map sending each variable to a polynomial.
    pub fn substitute(&self, family: Family, cap: i64, image: &dyn Fn(u16) -> GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero(family, cap);
        let mut cache: HashMap<u16, GradedPoly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut acc = GradedPoly::monomial(family, cap, Mono { u: m.u, vars: Vars::new() }, c.clone());
            for &k in &m.vars {
                let img = cache.entry(k).or_insert_with(|| image(k).with_cap(cap));
                acc = acc.mul(img);
            }
            out.add_assign(&acc);
        }
        out
    }
}

/// `phi_k(u,z) = D^k z` with `D = (u+z)^2 z d/dz`, then `z^m -> q_m`. With
/// `with_u` false, `u` is set to 1.
pub fn phi_poly(k: usize, with_u: bool) -> GradedPoly {
    // (u-exp, z-exp) -> coefficient
    let mut p: BTreeMap<(i32, u16), Rational> = BTreeMap::new();
    p.insert((0, 1), Rational::one());
    for _ in 0..k {
        let mut next: BTreeMap<(i32, u16), Rational> = BTreeMap::new();
        for ((a, e), c) in &p {
            // z d/dz then multiply by u^2 + 2uz + z^2
            let base = c * &Rational::from_int(*e as i64);
            for (du, dz, m) in [(2, 0, 1), (1, 1, 2), (0, 2, 1)] {
                *next.entry((a + du, e + dz)).or_default() += &base * &Rational::from_int(m);
            }
        }
        p = next;
    }
    let cap = 2 * k as i64 + 1;
    let mut out = GradedPoly::zero(Family::Q, if with_u { cap } else { i64::MAX / 4 });
    for ((a, e), c) in p {
        out.add_term(Mono::new(if with_u { a } else { 0 }, Vars::from_slice(&[e])), c);
    }
    out
}

/// Replace each `t_k` by `phi_poly(k)`; weights are preserved.
pub fn substitute_t_to_q(f: &GenFunction) -> Result<GenFunction> {
    if f.body.family != Family::T {
        return Err(Error::Domain("substitute_t_to_q needs a t-family function".into()));
    }
    let body = f.body.substitute(Family::Q, f.cap, &|k| phi_poly(k as usize, true));
    let kind = match f.kind {
        GenKind::FKt => GenKind::FKq,
        GenKind::FHt => GenKind::FHq,
        k => k,
    };
    Ok(GenFunction { kind, body, cap: f.cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GenKind {
    #[serde(rename = "F_K(t)")]
    FKt,
    #[serde(rename = "F_K(q)")]
    FKq,
    #[serde(rename = "F_H(u,t)")]
    FHt,
    #[serde(rename = "F_H(u,q)")]
    FHq,
    #[serde(rename = "H")]
    Hurwitz,
}

impl std::str::FromStr for GenKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "FKt" | "F_K(t)" => GenKind::FKt,
            "FKq" | "F_K(q)" => GenKind::FKq,
            "FHt" | "F_H(u,t)" => GenKind::FHt,
            "FHq" | "F_H(u,q)" => GenKind::FHq,
            "H" | "hurwitz" => GenKind::Hurwitz,
            _ => return Err(Error::Parse(format!("unknown generating function {s:?}; try FKt, FKq, FHt, FHq"))),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenFunction {
    pub kind: GenKind,
    pub cap: i64,
    pub body: GradedPoly,
}

/// Assemble a generating function from raw brackets, with the `1/Π k_i!`
/// symmetry factors applied here.
pub fn build_gen_function(which: GenKind, cap: i64, table: &BracketTable) -> Result<GenFunction> {
    let hodge = matches!(which, GenKind::FHt | GenKind::FHq);
    let mut body = GradedPoly::zero(Family::T, cap);
    // every key in range must be present in the table
    for (g, n) in table::stable_range(cap) {
        for d in table::multisets(n, 3 * g + n - 3) {
            let sum: i64 = d.iter().map(|&x| x as i64).sum();
            let j = 3 * g as i64 - 3 + n as i64 - sum;
            if j < 0 || j > g as i64 || (!hodge && j != 0) {
                continue;
            }
            let v = table.get(g, j as u32, &d).ok_or_else(|| {
                Error::MissingBracket(format!("g={g} j={j} d={d:?} needed for {which:?} at cap {cap}"))
            })?;
            if v.is_zero() {
                continue;
            }
            let m = Mono::new(2 * j as i32, d.iter().copied().collect());
            let c = Rational::sign_pow(j) * v / m.aut();
            body.add_term(m, c);
        }
    }
    let t = GenFunction { kind: if hodge { GenKind::FHt } else { GenKind::FKt }, cap, body };
    match which {
        GenKind::FKt | GenKind::FHt => Ok(t),
        GenKind::FHq => substitute_t_to_q(&t),
        GenKind::FKq => {
            let body = t.body.substitute(Family::Q, cap, &|k| {
                GradedPoly::var(Family::Q, cap, 2 * k + 1).scale(&double_factorial_odd(2 * k as i64 - 1).unwrap())
            });
            Ok(GenFunction { kind: GenKind::FKq, cap, body })
        }
        GenKind::Hurwitz => Err(Error::Domain("the Hurwitz series is built by tables::hurwitz_series".into())),
    }
}

/// Enumeration helpers shared with the tables module.
pub mod table {
    /// `(g, n)` with `2g - 2 + n > 0` and `3(2g-2+n) <= cap`.
    pub fn stable_range(cap: i64) -> Vec<(u32, u32)> {
        let mut out = vec![];
        for g in 0..=(cap / 6 + 1) as u32 {
            for n in 0..=(cap / 3 + 2) as u32 {
                let chi = 2 * g as i64 - 2 + n as i64;
                if chi > 0 && 3 * chi <= cap {
                    out.push((g, n));
                }
            }
        }
        out
    }

    /// Sorted multisets of `n` non-negative integers with sum at most `max_sum`.
    pub fn multisets(n: u32, max_sum: u32) -> Vec<Vec<u16>> {
        fn go(n: u32, lo: u16, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if n == 0 {
                out.push(cur.clone());
                return;
            }
            let mut d = lo;
            while (d as u32) * n <= left {
                cur.push(d);
                go(n - 1, d, left - d as u32, cur, out);
                cur.pop();
                d += 1;
            }
        }
        let mut out = vec![];
        go(n, 0, max_sum, &mut vec![], &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn m(u: i32, v: &[u16]) -> Mono {
        Mono::new(u, Vars::from_slice(v))
    }

    #[test]
    fn phi_small() {
        assert_eq!(phi_poly(0, true), GradedPoly::var(Family::Q, 1, 1));
        let p1 = phi_poly(1, true);
        assert_eq!(p1.coeff(&m(2, &[1])), r(1, 1));
        assert_eq!(p1.coeff(&m(1, &[2])), r(2, 1));
        assert_eq!(p1.coeff(&m(0, &[3])), r(1, 1));
        let p2 = phi_poly(2, true).at_u0();
        assert_eq!(p2.len(), 1);
        assert_eq!(p2.coeff(&m(0, &[5])), r(3, 1));
        for k in 0..6 {
            let p = phi_poly(k, true);
            assert!(p.terms().all(|(mm, _)| mm.weight(Family::Q) == 2 * k as i64 + 1));
        }
    }

    #[test]
    fn truncation_is_respected() {
        let x = GradedPoly::var(Family::Q, 5, 2);
        let y = x.mul(&x).mul(&x);
        assert!(y.is_zero());
        let z = x.mul(&GradedPoly::var(Family::Q, 5, 3));
        assert_eq!(z.coeff(&m(0, &[2, 3])), r(1, 1));
    }

    #[test]
    fn derivative_counts_multiplicity() {
        let mut p = GradedPoly::zero(Family::Q, 20);
        p.add_term(m(1, &[1, 1, 1, 4]), r(1, 6));
        let d = p.deriv(1);
        assert_eq!(d.coeff(&m(1, &[1, 1, 4])), r(1, 2));
        assert_eq!(p.u_euler().coeff(&m(1, &[1, 1, 1, 4])), r(1, 6));
    }

    #[test]
    fn multisets_enumerate() {
        assert_eq!(table::multisets(2, 2).len(), 4);
        assert!(table::stable_range(9).contains(&(2, 1)));
        assert!(!table::stable_range(9).contains(&(0, 2)));
    }
}
