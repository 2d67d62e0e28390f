//! Intersection numbers `<tau_{d_1}…tau_{d_n}>` and linear Hodge integrals
//! `<lambda_j tau_{d_1}…tau_{d_n}>`, by three routes: the DVV form of the
//! Witten constraints, the Mumford operator `W` acting on the Witten
//! generating function, and the polynomial recursion on symmetric polynomials.
//!
//! Brackets are stored raw (`<tau_0^3> = 1`); symmetry factors only enter when a
//! generating function is assembled.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::diffop;
use crate::exactnum::{double_factorial_odd, Rational};
use crate::exec::Mode;
use crate::qring::{self, table::multisets, table::stable_range, Family, GenFunction, GenKind, GradedPoly, Mono};
use crate::{Error, Result};

mod recursion;
mod sympoly;

pub use recursion::{build_h_polys, hodge_table_via_recursion, recursion_check};
pub use sympoly::SymPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Virasoro,
    MumfordW,
    Recursion,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Virasoro => "virasoro",
            Provenance::MumfordW => "mumford_w",
            Provenance::Recursion => "recursion",
        })
    }
}

/// Key `(g, j, d)` with `d` sorted ascending.
pub type Key = (u32, u32, Vec<u16>);

#[derive(Debug, Clone, PartialEq)]
pub struct BracketTable {
    pub entries: BTreeMap<Key, Rational>,
    pub provenance: Provenance,
}

/// One row of a table, for output.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub g: u32,
    pub j: u32,
    pub d: Vec<u16>,
    pub value: Rational,
    pub provenance: Provenance,
}

/// Does `(g, j, d)` satisfy the dimension constraint with `0 <= j <= g`?
pub fn admissible(g: u32, j: u32, d: &[u16]) -> bool {
    let n = d.len() as i64;
    let sum: i64 = d.iter().map(|&x| x as i64).sum();
    2 * g as i64 - 2 + n > 0 && j <= g && j as i64 + sum == 3 * g as i64 - 3 + n
}

impl BracketTable {
    pub fn new(provenance: Provenance) -> Self {
        BracketTable { entries: BTreeMap::new(), provenance }
    }

    /// Value of a bracket. Keys violating the dimension constraint are zero;
    /// admissible keys that were never computed are `None`.
    pub fn get(&self, g: u32, j: u32, d: &[u16]) -> Option<Rational> {
        let mut d = d.to_vec();
        d.sort_unstable();
        if !admissible(g, j, &d) {
            return Some(Rational::zero());
        }
        self.entries.get(&(g, j, d)).cloned()
    }

    pub fn insert(&mut self, g: u32, j: u32, mut d: Vec<u16>, v: Rational) {
        d.sort_unstable();
        self.entries.insert((g, j, d), v);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> Vec<Row> {
        self.entries
            .iter()
            .map(|((g, j, d), v)| Row { g: *g, j: *j, d: d.clone(), value: v.clone(), provenance: self.provenance })
            .collect()
    }

    /// Keys present in both tables whose values differ.
    pub fn disagreements(&self, o: &BracketTable) -> Vec<(Key, Rational, Rational)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| match o.entries.get(k) {
                Some(w) if w != v => Some((k.clone(), v.clone(), w.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn shared_keys(&self, o: &BracketTable) -> usize {
        self.entries.keys().filter(|k| o.entries.contains_key(*k)).count()
    }
}

/// All admissible keys with `3(2g-2+n) <= cap`; Witten keys only (`j = 0`)
/// when `hodge` is false.
pub fn keys_in_cap(cap: i64, hodge: bool) -> Vec<Key> {
    let mut out = vec![];
    for (g, n) in stable_range(cap) {
        for d in multisets(n, 3 * g + n - 3) {
            let sum: u32 = d.iter().map(|&x| x as u32).sum();
            let j = 3 * g + n - 3 - sum;
            if j <= g && (hodge || j == 0) {
                out.push((g, j, d));
            }
        }
    }
    out
}

fn df(k: i64) -> Rational {
    double_factorial_odd(k).expect("odd argument")
}

/// Memoised DVV evaluation of `<tau_d>` (genus read off from the dimension).
#[derive(Default)]
struct Dvv {
    memo: HashMap<Vec<u16>, Rational>,
}

impl Dvv {
    fn eval(&mut self, d: &[u16]) -> Rational {
        let mut d = d.to_vec();
        d.sort_unstable();
        let n = d.len() as i64;
        let sum: i64 = d.iter().map(|&x| x as i64).sum();
        // 3g - 3 + n = sum
        if n == 0 || (sum - n + 3) % 3 != 0 || sum - n + 3 < 0 {
            return Rational::zero();
        }
        let g = (sum - n + 3) / 3;
        if 2 * g - 2 + n <= 0 {
            return Rational::zero();
        }
        if let Some(v) = self.memo.get(&d) {
            return v.clone();
        }
        let v = self.compute(&d);
        self.memo.insert(d, v.clone());
        v
    }

    fn compute(&mut self, d: &[u16]) -> Rational {
        let top = *d.last().unwrap();
        if top == 0 {
            // only <tau_0^3> survives the dimension count
            return if d.len() == 3 { Rational::one() } else { Rational::zero() };
        }
        let m = top as i64 - 1;
        let s: Vec<u16> = d[..d.len() - 1].to_vec();
        let mut acc = Rational::zero();
        for i in 0..s.len() {
            let di = s[i] as i64;
            let mut rest = s.clone();
            rest.remove(i);
            rest.push((di + m) as u16);
            let coef = df(2 * di + 2 * m + 1) / df(2 * di - 1);
            acc += coef * self.eval(&rest);
        }
        if m >= 1 {
            let half = Rational::new(1, 2);
            for a in 0..m {
                let b = m - 1 - a;
                let coef = &half * &df(2 * a + 1) * df(2 * b + 1);
                let mut joined = s.clone();
                joined.push(a as u16);
                joined.push(b as u16);
                let mut inner = self.eval(&joined);
                for mask in 0u32..(1 << s.len()) {
                    let mut left = vec![a as u16];
                    let mut right = vec![b as u16];
                    for (t, &x) in s.iter().enumerate() {
                        if mask >> t & 1 == 1 {
                            left.push(x);
                        } else {
                            right.push(x);
                        }
                    }
                    let l = self.eval(&left);
                    if l.is_zero() {
                        continue;
                    }
                    inner += l * self.eval(&right);
                }
                acc += coef * inner;
            }
        }
        if m == 0 && s.is_empty() {
            acc += Rational::new(1, 8);
        }
        acc / df(2 * m + 3)
    }
}

/// Intersection numbers of psi classes for `3(2g-2+n) <= cap`, from the DVV
/// recursion: each constraint removes one `tau_{m+1}` insertion.
pub fn witten_table(cap: i64) -> Result<BracketTable> {
    if cap < 3 {
        return Err(Error::Domain(format!("witten table needs cap >= 3, got {cap}")));
    }
    let mut dvv = Dvv::default();
    let mut t = BracketTable::new(Provenance::Virasoro);
    for (g, j, d) in keys_in_cap(cap, false) {
        let v = dvv.eval(&d);
        t.insert(g, j, d, v);
    }
    Ok(t)
}

/// Largest genus with a stable component of weight `<= cap`.
pub fn gmax_for_cap(cap: i64) -> i64 {
    (cap / 3 + 1) / 2
}

/// `F_H(u,t)` from `F_K(t)` through `exp(F_H) = e^W exp(F_K)`, in cofactor form.
///
/// With `e^{G(s)} = e^{sW} e^{F_K}`, `dG/ds = e^{-G} W e^{G}`; expanding
/// `G = Σ s^r G_r` gives `(r+1) G_{r+1}` as the linear part of `W` on `G_r`
/// plus the quadratic part over `G_a, G_b` with `a + b = r`. Every term of `W`
/// raises the `u`-degree by at least 2 and the genus bounds it by `2g`, so the
/// series stops after `gmax` steps. `W` lowers the weight by at most 3 per
/// step, hence the Witten function is built `3 gmax` above the target cap.
pub fn hodge_generating_via_w(cap: i64, mode: Mode) -> Result<GradedPoly> {
    let gmax = gmax_for_cap(cap);
    let big = cap + 3 * gmax;
    let fk = qring::build_gen_function(GenKind::FKt, big, &witten_table(big)?)?.body;
    let w = diffop::named::w_operator(2 * gmax, big)?;
    let prune = |p: GradedPoly| -> GradedPoly {
        let mut out = GradedPoly::zero(p.family, p.cap);
        for (m, c) in p.terms() {
            if m.u as i64 <= 2 * gmax {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    };
    let mut gs: Vec<GradedPoly> = vec![fk];
    for r in 0..gmax as usize {
        let mut next = w.apply_linear(&gs[r], mode)?;
        for a in 0..=r {
            next.add_assign(&w.apply_quadratic(&gs[a], &gs[r - a], mode)?);
        }
        let next = prune(next).scale(&Rational::new(1, r as i64 + 1));
        gs.push(next);
    }
    let mut total = GradedPoly::zero(Family::T, cap);
    for g in &gs {
        total.add_assign(&g.with_cap(cap));
    }
    Ok(total)
}

/// Read raw brackets back out of a `t`-family generating function.
pub fn brackets_from_generating(f: &GradedPoly, cap: i64, provenance: Provenance) -> BracketTable {
    let mut t = BracketTable::new(provenance);
    for (g, j, d) in keys_in_cap(cap, true) {
        let m = Mono::new(2 * j as i32, d.iter().copied().collect());
        let c = f.coeff(&m);
        let v = c * m.aut() * Rational::sign_pow(j as i64);
        t.insert(g, j, d, v);
    }
    t
}

/// Linear Hodge integrals for `3(2g-2+n) <= cap` via the `W` operator.
pub fn hodge_table_via_w(cap: i64) -> Result<BracketTable> {
    hodge_table_via_w_mode(cap, Mode::Parallel)
}

pub fn hodge_table_via_w_mode(cap: i64, mode: Mode) -> Result<BracketTable> {
    if cap < 3 {
        return Err(Error::Domain(format!("hodge table needs cap >= 3, got {cap}")));
    }
    let f = hodge_generating_via_w(cap, mode)?;
    Ok(brackets_from_generating(&f, cap, Provenance::MumfordW))
}

/// The Hurwitz generating function `H = log(e^{beta M_0} e^{q_1})`, kept to
/// `beta`-order `beta_order` and `q`-weight `weight_cap`.
///
/// Returned as a `Q`-family polynomial in which the `u` slot carries the power
/// of `beta`; the cap applies to the `q`-weight alone.
pub fn hurwitz_series(beta_order: i64, weight_cap: i64) -> Result<GenFunction> {
    if beta_order < 0 || weight_cap < 1 {
        return Err(Error::Domain("hurwitz series needs beta_order >= 0 and weight_cap >= 1".into()));
    }
    // In cofactor form: dH/dbeta = e^{-H} M_0 e^{H}, H(0) = q_1.
    // Work with beta tracked in u and a cap on total weight large enough.
    let big = weight_cap + beta_order;
    let m0 = diffop::named::m_k(0, weight_cap)?;
    let mut hs: Vec<GradedPoly> = vec![GradedPoly::var(Family::Q, weight_cap, 1)];
    for r in 0..beta_order as usize {
        // M_0 has no pure multiplication terms, so only the linear and
        // quadratic parts contribute
        let mut next = m0.apply_linear(&hs[r], Mode::Sequential)?;
        for a in 0..=r {
            next.add_assign(&m0.apply_quadratic(&hs[a], &hs[r - a], Mode::Sequential)?);
        }
        hs.push(next.scale(&Rational::new(1, r as i64 + 1)));
    }
    let mut body = GradedPoly::zero(Family::Q, big);
    for (r, h) in hs.iter().enumerate() {
        for (m, c) in h.terms() {
            if m.var_weight(Family::Q) <= weight_cap {
                body.add_term(Mono { u: r as i32, vars: m.vars.clone() }, c.clone());
            }
        }
    }
    Ok(GenFunction { kind: GenKind::Hurwitz, cap: weight_cap, body })
}

/// `H_{0,1} = Σ_b b^{b-2}/b! beta^{b-1} q_b`, `u` standing for `beta`.
pub fn hurwitz_h01(beta_order: i64, weight_cap: i64) -> GradedPoly {
    let mut p = GradedPoly::zero(Family::Q, weight_cap + beta_order);
    for b in 1..=weight_cap.min(beta_order + 1) {
        let num = Rational::from_int(b).pow(b as i32 - 2);
        let c = num / Rational::from_bigint(crate::exactnum::factorial(b as u64));
        p.add_term(Mono::new(b as i32 - 1, [b as u16].into_iter().collect()), c);
    }
    p
}

/// `H_{0,2} = ½ Σ b1^{b1} b2^{b2} / ((b1+b2) b1! b2!) beta^{b1+b2} q_{b1} q_{b2}`.
pub fn hurwitz_h02(beta_order: i64, weight_cap: i64) -> GradedPoly {
    let mut p = GradedPoly::zero(Family::Q, weight_cap + beta_order);
    let fact = |n: i64| Rational::from_bigint(crate::exactnum::factorial(n as u64));
    for b1 in 1..=weight_cap {
        for b2 in 1..=weight_cap - b1 {
            if b1 + b2 > beta_order {
                continue;
            }
            let c = Rational::new(1, 2) * Rational::from_int(b1).pow(b1 as i32) * Rational::from_int(b2).pow(b2 as i32)
                / (Rational::from_int(b1 + b2) * fact(b1) * fact(b2));
            p.add_term(Mono::new((b1 + b2) as i32, [b1 as u16, b2 as u16].into_iter().collect()), c);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn small_witten_values() {
        let t = witten_table(12).unwrap();
        assert_eq!(t.get(0, 0, &[0, 0, 0]), Some(r(1, 1)));
        assert_eq!(t.get(1, 0, &[1]), Some(r(1, 24)));
        assert_eq!(t.get(2, 0, &[4]), Some(r(1, 1152)));
        assert_eq!(t.get(2, 0, &[2, 3]), Some(r(29, 5760)));
        assert_eq!(t.get(0, 0, &[0, 0, 0, 1]), Some(r(1, 1)));
        assert_eq!(t.get(1, 0, &[1, 1]), Some(r(1, 24)));
    }

    #[test]
    fn off_dimension_is_zero() {
        let t = witten_table(6).unwrap();
        assert_eq!(t.get(1, 0, &[0]), Some(Rational::zero()));
        assert_eq!(t.get(3, 0, &[8]), Some(Rational::zero()));
    }
}
