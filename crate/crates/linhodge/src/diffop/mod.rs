//! Differential operators on the graded rings of [`crate::qring`].
//!
//! A term is `c · u^e · (product of variables) · ∂_a ∂_b` with at most two
//! partials, or `c · u^e · (product) · u∂_u`. Infinite families are
//! materialised up to a partial weight `M` and carry `complete_through = M`:
//! every term whose partials have total weight `<= M` is present. Every
//! operator also carries `shift_floor`, a lower bound for the weight shift of
//! all its terms including the ones never materialised.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use smallvec::SmallVec;

use crate::exactnum::Rational;
use crate::exec::{self, Mode};
use crate::qring::{Family, GradedPoly, Mono, Vars, UNCAPPED};
use crate::{Error, Result};

mod action;
pub mod named;

pub use action::{basis, fingerprint, fingerprint_on, Action, Fingerprint, LazyOp};

pub type Mult = SmallVec<[u16; 4]>;
pub type Partials = SmallVec<[u16; 2]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub u: i32,
    pub mult: Mult,
    pub partials: Partials,
    /// Acts as `u ∂/∂u`; such terms carry no partials.
    pub du: bool,
}

impl Term {
    pub fn new(u: i32, mult: &[u16], partials: &[u16]) -> Self {
        let mut mult: Mult = mult.iter().copied().collect();
        mult.sort_unstable();
        let mut partials: Partials = partials.iter().copied().collect();
        partials.sort_unstable();
        assert!(partials.len() <= 2, "at most two partials");
        Term { u, mult, partials, du: false }
    }

    pub fn du(u: i32, mult: &[u16]) -> Self {
        let mut t = Term::new(u, mult, &[]);
        t.du = true;
        t
    }

    pub fn partial_weight(&self, fam: Family) -> i64 {
        self.partials.iter().map(|&k| fam.var_weight(k)).sum()
    }

    pub fn mult_weight(&self, fam: Family) -> i64 {
        self.mult.iter().map(|&k| fam.var_weight(k)).sum()
    }

    /// Change in weight caused by the term.
    pub fn shift(&self, fam: Family) -> i64 {
        self.u as i64 + self.mult_weight(fam) - self.partial_weight(fam)
    }

    /// Pure multiplication by a polynomial.
    pub fn is_multiplier(&self) -> bool {
        self.partials.is_empty() && !self.du
    }

    pub fn render(&self, fam: Family) -> String {
        let mut parts = vec![Mono::new(self.u, self.mult.iter().copied().collect()).render(fam)];
        if self.du {
            parts.push("u*d/du".into());
        }
        for p in &self.partials {
            parts.push(format!("d/d{}{}", fam.var_name(), p));
        }
        if parts.len() > 1 && parts[0] == "1" {
            parts.remove(0);
        }
        parts.join("*")
    }
}

#[derive(Clone, Default)]
struct Index {
    by_partials: HashMap<Partials, Vec<usize>>,
    plain: Vec<usize>,
    du: Vec<usize>,
}

#[derive(Clone)]
pub struct DiffOperator {
    pub family: Family,
    pub label: String,
    terms: BTreeMap<Term, Rational>,
    /// `None` for a finite operator, `Some(M)` for a materialised infinite one.
    pub complete_through: Option<i64>,
    /// Declared bound covering terms that were never materialised.
    floor_decl: Option<i64>,
    index: OnceLock<Index>,
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOperator({}, {} terms, complete_through {:?})", self.label, self.terms.len(), self.complete_through)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(t, c)| format!("({c})*{}", t.render(self.family))).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Serialisable view of one term.
#[derive(Debug, Clone, Serialize)]
pub struct TermRow {
    pub coeff: Rational,
    pub u: i32,
    pub mult: Vec<u16>,
    pub partials: Vec<u16>,
    pub du: bool,
}

/// Result of `e^{-F} · Op · e^{F}`, valid through weight `provable`.
#[derive(Debug, Clone)]
pub struct Cofactor {
    pub poly: GradedPoly,
    pub provable: i64,
}

impl DiffOperator {
    pub fn new(family: Family, label: impl Into<String>) -> Self {
        DiffOperator {
            family,
            label: label.into(),
            terms: BTreeMap::new(),
            complete_through: None,
            floor_decl: None,
            index: OnceLock::new(),
        }
    }

    pub fn zero(family: Family) -> Self {
        Self::new(family, "0")
    }

    /// Multiplication by a scalar.
    pub fn constant(family: Family, c: Rational) -> Self {
        let mut o = Self::new(family, format!("{c}"));
        o.push(c, Term::new(0, &[], &[]));
        o
    }

    pub fn with_label(mut self, l: impl Into<String>) -> Self {
        self.label = l.into();
        self
    }

    /// Declare the operator infinite and complete through partial weight `m`.
    pub fn complete(mut self, m: i64) -> Self {
        self.complete_through = Some(m);
        self
    }

    /// Lower the shift floor to account for terms not materialised.
    pub fn floor(mut self, s: i64) -> Self {
        self.floor_decl = Some(self.floor_decl.map_or(s, |d| d.min(s)));
        self
    }

    /// Lower bound for the weight shift of every term, materialised or not.
    pub fn shift_floor(&self) -> i64 {
        let seen = self.terms.keys().map(|t| t.shift(self.family)).min();
        match (seen, self.floor_decl) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0,
        }
    }

    pub fn push(&mut self, c: Rational, t: Term) {
        if c.is_zero() {
            return;
        }
        self.index = OnceLock::new();
        match self.terms.entry(t) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rows(&self) -> Vec<TermRow> {
        self.terms
            .iter()
            .map(|(t, c)| TermRow {
                coeff: c.clone(),
                u: t.u,
                mult: t.mult.to_vec(),
                partials: t.partials.to_vec(),
                du: t.du,
            })
            .collect()
    }

    pub fn has_du(&self) -> bool {
        self.terms.keys().any(|t| t.du)
    }

    /// Keep only terms satisfying `keep`; completeness is kept as is.
    pub fn filter(&self, keep: impl Fn(&Term) -> bool) -> DiffOperator {
        let mut o = DiffOperator::new(self.family, self.label.clone());
        for (t, c) in &self.terms {
            if keep(t) {
                o.push(c.clone(), t.clone());
            }
        }
        o.complete_through = self.complete_through;
        o.floor_decl = self.floor_decl;
        o
    }

    pub fn scale(&self, s: &Rational) -> DiffOperator {
        let mut o = DiffOperator::new(self.family, format!("({s})*{}", self.label));
        for (t, c) in &self.terms {
            o.push(c * s, t.clone());
        }
        o.complete_through = self.complete_through;
        o.floor_decl = self.floor_decl;
        o
    }

    /// Left multiplication by `u^e`.
    pub fn mul_u(&self, e: i32) -> DiffOperator {
        let mut o = DiffOperator::new(self.family, format!("u^{e}*{}", self.label));
        for (t, c) in &self.terms {
            let mut t = t.clone();
            t.u += e;
            o.push(c.clone(), t);
        }
        o.complete_through = self.complete_through;
        o.floor_decl = self.floor_decl.map(|d| d + e as i64);
        o
    }

    /// Left multiplication by the variable `x_k`.
    pub fn mul_var(&self, k: u16) -> DiffOperator {
        let mut o = DiffOperator::new(self.family, format!("{}{k}*{}", self.family.var_name(), self.label));
        for (t, c) in &self.terms {
            let mut t = t.clone();
            t.mult.push(k);
            t.mult.sort_unstable();
            o.push(c.clone(), t);
        }
        o.complete_through = self.complete_through;
        o.floor_decl = self.floor_decl.map(|d| d + self.family.var_weight(k));
        o
    }

    pub fn add(&self, o: &DiffOperator) -> DiffOperator {
        assert_eq!(self.family, o.family);
        let mut r = self.clone();
        r.label = format!("{} + {}", self.label, o.label);
        for (t, c) in &o.terms {
            r.push(c.clone(), t.clone());
        }
        r.complete_through = match (self.complete_through, o.complete_through) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        r.floor_decl = match (self.floor_decl, o.floor_decl) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        r
    }

    pub fn sub(&self, o: &DiffOperator) -> DiffOperator {
        self.add(&o.scale(&Rational::from_int(-1))).with_label(format!("{} - {}", self.label, o.label))
    }

    pub fn sum(family: Family, label: &str, ops: impl IntoIterator<Item = DiffOperator>) -> DiffOperator {
        let mut acc = DiffOperator::zero(family);
        let mut first = true;
        for o in ops {
            if first {
                acc = o;
                first = false;
            } else {
                acc = acc.add(&o);
            }
        }
        acc.with_label(label)
    }

    /// Fail unless every term that could act on something of variable weight
    /// `need` is materialised.
    pub fn ensure_complete(&self, need: i64) -> Result<()> {
        match self.complete_through {
            Some(m) if m < need => Err(Error::Incomplete(format!(
                "{} is materialised through partial weight {m} but weight {need} is needed",
                self.label
            ))),
            _ => Ok(()),
        }
    }

    /// The part made of pure multiplication terms, as a polynomial.
    pub fn constant_part(&self, family: Family, cap: i64) -> GradedPoly {
        let mut p = GradedPoly::zero(family, cap);
        for (t, c) in &self.terms {
            if t.is_multiplier() {
                p.add_term(Mono::new(t.u, t.mult.iter().copied().collect()), c.clone());
            }
        }
        p
    }

    fn index(&self) -> &Index {
        self.index.get_or_init(|| {
            let mut ix = Index::default();
            for (i, t) in self.terms.keys().enumerate() {
                if t.du {
                    ix.du.push(i);
                } else if t.partials.is_empty() {
                    ix.plain.push(i);
                } else {
                    ix.by_partials.entry(t.partials.clone()).or_default().push(i);
                }
            }
            ix
        })
    }

    fn term_vec(&self) -> Vec<(&Term, &Rational)> {
        self.terms.iter().collect()
    }

    /// Exact action on a polynomial (no truncation of the result).
    pub fn apply_poly(&self, p: &GradedPoly) -> Result<GradedPoly> {
        assert_eq!(self.family, p.family, "family mismatch for {}", self.label);
        self.ensure_complete(p.max_var_weight())?;
        let ix = self.index();
        let tv = self.term_vec();
        let mut out = GradedPoly::zero(p.family, UNCAPPED);
        for (m, c) in p.terms() {
            for &i in &ix.plain {
                let (t, tc) = tv[i];
                out.add_term(Mono { u: m.u + t.u, vars: merge(&m.vars, &t.mult) }, c * tc);
            }
            if m.u != 0 {
                for &i in &ix.du {
                    let (t, tc) = tv[i];
                    let k = Rational::from_int(m.u as i64);
                    out.add_term(Mono { u: m.u + t.u, vars: merge(&m.vars, &t.mult) }, c * tc * k);
                }
            }
            // partial sets hitting this monomial
            let distinct = distinct_vars(&m.vars);
            for (ai, &(a, ca)) in distinct.iter().enumerate() {
                let one: Partials = [a].into_iter().collect();
                if let Some(list) = ix.by_partials.get(&one) {
                    let rest = remove(&m.vars, a, 1);
                    let k = Rational::from_int(ca as i64);
                    for &i in list {
                        let (t, tc) = tv[i];
                        out.add_term(Mono { u: m.u + t.u, vars: merge(&rest, &t.mult) }, c * tc * &k);
                    }
                }
                for &(b, cb) in &distinct[ai..] {
                    let (k, rest) = if a == b {
                        if ca < 2 {
                            continue;
                        }
                        (ca * (ca - 1), remove(&m.vars, a, 2))
                    } else {
                        (ca * cb, remove(&remove(&m.vars, a, 1), b, 1))
                    };
                    let two: Partials = [a, b].into_iter().collect();
                    if let Some(list) = ix.by_partials.get(&two) {
                        let k = Rational::from_int(k as i64);
                        for &i in list {
                            let (t, tc) = tv[i];
                            out.add_term(Mono { u: m.u + t.u, vars: merge(&rest, &t.mult) }, c * tc * &k);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The first and second order part acting linearly on `g`:
    /// `Σ c u^e x (∂_a g | ∂_a ∂_b g | u∂_u g)`, truncated at `g.cap + shift_floor`.
    pub fn apply_linear(&self, g: &GradedPoly, mode: Mode) -> Result<GradedPoly> {
        self.ensure_complete(g.max_var_weight())?;
        let out_cap = g.cap + self.shift_floor();
        let active: Vec<(&Term, &Rational)> = self.terms.iter().filter(|(t, _)| !t.is_multiplier()).collect();
        let mut keys: Vec<(Partials, bool)> = active.iter().map(|(t, _)| (t.partials.clone(), t.du)).collect();
        keys.sort();
        keys.dedup();
        let derived = exec::map(mode, &keys, |(ps, du)| {
            if *du {
                g.u_euler()
            } else {
                ps.iter().fold(g.clone(), |acc, &k| acc.deriv(k))
            }
        });
        let lookup: HashMap<(Partials, bool), usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let fam = self.family;
        let chunks: Vec<&[(&Term, &Rational)]> = active.chunks(16).collect();
        Ok(exec::map_reduce(
            mode,
            &chunks,
            || GradedPoly::zero(fam, out_cap),
            |chunk| {
                let mut acc = GradedPoly::zero(fam, out_cap);
                for (t, c) in chunk.iter() {
                    let src = &derived[lookup[&(t.partials.clone(), t.du)]];
                    emit(&mut acc, src, t, c);
                }
                acc
            },
            |mut a, b| {
                a.add_assign(&b);
                a
            },
        ))
    }

    /// `Σ c u^e x ∂_a g1 ∂_b g2` over the two-partial terms.
    pub fn apply_quadratic(&self, g1: &GradedPoly, g2: &GradedPoly, mode: Mode) -> Result<GradedPoly> {
        let in_cap = g1.cap.min(g2.cap);
        let out_cap = in_cap + self.shift_floor();
        self.ensure_complete((g1.max_var_weight() + g2.max_var_weight()).min(in_cap))?;
        let fam = self.family;
        let active: Vec<(&Term, &Rational)> = self.terms.iter().filter(|(t, _)| t.partials.len() == 2).collect();
        // product cap needed for each pair
        let mut need: BTreeMap<(u16, u16), i64> = BTreeMap::new();
        for (t, _) in &active {
            let pc = out_cap - t.u as i64 - t.mult_weight(fam);
            let e = need.entry((t.partials[0], t.partials[1])).or_insert(pc);
            *e = (*e).max(pc);
        }
        let pairs: Vec<((u16, u16), i64)> = need.into_iter().collect();
        let prods = exec::map(mode, &pairs, |((a, b), pc)| {
            let da = g1.deriv(*a).with_cap(*pc);
            let db = g2.deriv(*b).with_cap(*pc);
            da.mul(&db)
        });
        let lookup: HashMap<(u16, u16), usize> = pairs.iter().enumerate().map(|(i, (k, _))| (*k, i)).collect();
        let chunks: Vec<&[(&Term, &Rational)]> = active.chunks(16).collect();
        Ok(exec::map_reduce(
            mode,
            &chunks,
            || GradedPoly::zero(fam, out_cap),
            |chunk| {
                let mut acc = GradedPoly::zero(fam, out_cap);
                for (t, c) in chunk.iter() {
                    let src = &prods[lookup[&(t.partials[0], t.partials[1])]];
                    emit(&mut acc, src, t, c);
                }
                acc
            },
            |mut a, b| {
                a.add_assign(&b);
                a
            },
        ))
    }

    /// `e^{-F} · Op · e^{F}` for a weight-truncated `F`. Correct through
    /// `F.cap + shift_floor`: no term lowers weight by more than the floor, so
    /// the unknown part of `F` above its cap cannot reach that weight.
    pub fn cofactor(&self, f: &GradedPoly, mode: Mode) -> Result<Cofactor> {
        let provable = f.cap + self.shift_floor();
        let mut poly = self.constant_part(f.family, provable);
        poly.add_assign(&self.apply_linear(f, mode)?);
        poly.add_assign(&self.apply_quadratic(f, f, mode)?);
        Ok(Cofactor { poly: poly.with_cap(provable), provable })
    }
}

/// Add `c · u^e · x · src` into `acc`, skipping terms above the cap.
fn emit(acc: &mut GradedPoly, src: &GradedPoly, t: &Term, c: &Rational) {
    let fam = acc.family;
    let extra = t.u as i64 + t.mult_weight(fam);
    for (m, v) in src.terms() {
        if m.weight(fam) + extra > acc.cap {
            continue;
        }
        acc.add_term(Mono { u: m.u + t.u, vars: merge(&m.vars, &t.mult) }, c * v);
    }
}

fn merge(a: &Vars, b: &[u16]) -> Vars {
    if b.is_empty() {
        return a.clone();
    }
    let mut v: Vars = Vars::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            v.push(a[i]);
            i += 1;
        } else {
            v.push(b[j]);
            j += 1;
        }
    }
    v
}

fn distinct_vars(v: &Vars) -> Vec<(u16, usize)> {
    let mut out: Vec<(u16, usize)> = vec![];
    for &k in v {
        match out.last_mut() {
            Some((x, c)) if *x == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

fn remove(v: &Vars, k: u16, times: usize) -> Vars {
    let mut out = v.clone();
    for _ in 0..times {
        let p = out.iter().position(|&x| x == k).expect("variable present");
        out.remove(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn single_partial_cofactor() {
        let mut op = DiffOperator::new(Family::Q, "d1");
        op.push(r(1, 1), Term::new(0, &[], &[1]));
        let mut f = GradedPoly::zero(Family::Q, 6);
        f.add_term(Mono::new(0, [1, 1].into_iter().collect()), r(1, 2));
        let c = op.cofactor(&f, Mode::Sequential).unwrap();
        assert_eq!(c.poly, GradedPoly::var(Family::Q, 5, 1));
        assert_eq!(c.provable, 5);
    }

    #[test]
    fn second_order_action_counts() {
        let mut op = DiffOperator::new(Family::Q, "d1d1");
        op.push(r(1, 1), Term::new(0, &[], &[1, 1]));
        let p = GradedPoly::monomial(Family::Q, 10, Mono::new(0, [1, 1, 1].into_iter().collect()), r(1, 1));
        let out = op.apply_poly(&p).unwrap();
        assert_eq!(out.coeff(&Mono::new(0, [1].into_iter().collect())), r(6, 1));
    }

    #[test]
    fn incomplete_is_an_error() {
        let op = DiffOperator::new(Family::Q, "tail").complete(3);
        let p = GradedPoly::var(Family::Q, 10, 5);
        assert!(matches!(op.apply_poly(&p), Err(Error::Incomplete(_))));
    }

    #[test]
    fn cofactor_of_exponential_matches_direct() {
        // Op = ∂_1^2 + q_2 ∂_1, F = q_1^2 / 2 + q_1 q_2
        let mut op = DiffOperator::new(Family::Q, "t");
        op.push(r(1, 1), Term::new(0, &[], &[1, 1]));
        op.push(r(1, 1), Term::new(0, &[2], &[1]));
        let mut f = GradedPoly::zero(Family::Q, 12);
        f.add_term(Mono::new(0, [1, 1].into_iter().collect()), r(1, 2));
        f.add_term(Mono::new(0, [1, 2].into_iter().collect()), r(1, 1));
        let c = op.cofactor(&f, Mode::Sequential).unwrap();
        // ∂1F = q1 + q2; ∂1²F = 1; so 1 + (q1+q2)^2 + q2(q1+q2)
        let mut want = GradedPoly::zero(Family::Q, 12);
        want.add_term(Mono::one(), r(1, 1));
        want.add_term(Mono::new(0, [1, 1].into_iter().collect()), r(1, 1));
        want.add_term(Mono::new(0, [1, 2].into_iter().collect()), r(3, 1));
        want.add_term(Mono::new(0, [2, 2].into_iter().collect()), r(2, 1));
        assert_eq!(c.poly, want.with_cap(c.provable));
    }
}
