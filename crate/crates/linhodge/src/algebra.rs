//! A slow, independent oracle: the Lie algebra spanned by `L_n`, `α_n` and a
//! central `C`, with coefficients in `Q[u, u^{-1}]`. Conjugating by `e^U`
//! is done here by summing nested commutators, with no closed forms, so it
//! can be compared against the series-based coefficients used elsewhere.
//!
//! Relations:
//! `[L_m, L_n] = (m-n) L_{m+n} + (m^3-m)/12 δ_{m+n,0} C`,
//! `[L_m, α_n] = -n α_{m+n}`, `[α_m, α_n] = m δ_{m+n,0} C`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::diffop::{named, DiffOperator};
use crate::exactnum::Rational;
use crate::qring::Family;
use crate::series::named::{a_pos, b_coeffs};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Gen {
    C,
    L(i64),
    A(i64),
}

impl Gen {
    /// Mode number; the central element counts as 0.
    pub fn index(self) -> i64 {
        match self {
            Gen::C => 0,
            Gen::L(n) | Gen::A(n) => n,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::C => f.write_str("C"),
            Gen::L(n) => write!(f, "L{n}"),
            Gen::A(n) => write!(f, "alpha{n}"),
        }
    }
}

/// `Σ c · u^e · g`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Elem {
    terms: BTreeMap<(Gen, i32), Rational>,
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|((g, e), c)| format!("({c})*u^{e}*{g}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Bracket of two generators, as a list of `(coefficient, generator)`.
pub fn bracket_gens(a: Gen, b: Gen) -> Vec<(Rational, Gen)> {
    let q = Rational::from_int;
    match (a, b) {
        (Gen::C, _) | (_, Gen::C) => vec![],
        (Gen::L(m), Gen::L(n)) => {
            let mut v = vec![(q(m - n), Gen::L(m + n))];
            if m + n == 0 {
                v.push((Rational::new(m * m * m - m, 12), Gen::C));
            }
            v
        }
        (Gen::L(m), Gen::A(n)) => vec![(q(-n), Gen::A(m + n))],
        (Gen::A(n), Gen::L(m)) => vec![(q(n), Gen::A(m + n))],
        (Gen::A(m), Gen::A(n)) => {
            if m + n == 0 {
                vec![(q(m), Gen::C)]
            } else {
                vec![]
            }
        }
    }
    .into_iter()
    // α_0 is the zero operator in the realisation used here
    .filter(|(c, g)| !c.is_zero() && *g != Gen::A(0))
    .collect()
}

impl Elem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(g: Gen, e: i32, c: Rational) -> Self {
        let mut x = Self::zero();
        x.add_term(g, e, c);
        x
    }

    pub fn add_term(&mut self, g: Gen, e: i32, c: Rational) {
        if c.is_zero() || g == Gen::A(0) {
            return;
        }
        let slot = self.terms.entry((g, e)).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(g, e));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Gen, i32, &Rational)> {
        self.terms.iter().map(|((g, e), c)| (*g, *e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, g: Gen, e: i32) -> Rational {
        self.terms.get(&(g, e)).cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &Elem) -> Elem {
        let mut x = self.clone();
        for (g, e, c) in o.terms() {
            x.add_term(g, e, c.clone());
        }
        x
    }

    pub fn scale(&self, s: &Rational) -> Elem {
        let mut x = Self::zero();
        for (g, e, c) in self.terms() {
            x.add_term(g, e, c * s);
        }
        x
    }

    /// Drop every generator with mode number above `max_index`.
    pub fn truncate(&self, max_index: i64) -> Elem {
        let mut x = Self::zero();
        for (g, e, c) in self.terms() {
            if g.index() <= max_index {
                x.add_term(g, e, c.clone());
            }
        }
        x
    }

    pub fn bracket(&self, o: &Elem) -> Elem {
        let mut x = Self::zero();
        for (ga, ea, ca) in self.terms() {
            for (gb, eb, cb) in o.terms() {
                for (k, g) in bracket_gens(ga, gb) {
                    x.add_term(g, ea + eb, ca * cb * k);
                }
            }
        }
        x
    }

    /// The `(Gen, u-power)` pairs keyed by generator, assuming each generator
    /// occurs with a single power of `u`.
    pub fn by_gen(&self) -> Result<BTreeMap<Gen, (i32, Rational)>> {
        let mut out = BTreeMap::new();
        for (g, e, c) in self.terms() {
            if out.insert(g, (e, c.clone())).is_some() {
                return Err(Error::Structural(format!("{g} occurs with several powers of u")));
            }
        }
        Ok(out)
    }

    /// Realise as a differential operator in the `q` variables, complete
    /// through partial weight `big`; `C` acts as 1.
    pub fn realise(&self, big: i64) -> DiffOperator {
        let parts = self.terms().map(|(g, e, c)| {
            let op = match g {
                Gen::C => DiffOperator::constant(Family::Q, Rational::one()),
                Gen::L(n) => named::l(n, big),
                Gen::A(n) => named::alpha(n),
            };
            op.mul_u(e).scale(c)
        });
        let floor = self.terms().map(|(g, e, _)| e as i64 - g.index()).min().unwrap_or(0);
        DiffOperator::sum(Family::Q, "algebra element", parts).complete(big).floor(floor)
    }
}

/// `U = Σ_{m=1}^{max_index} a_m u^m L_m`.
pub fn u_element(max_index: i64) -> Elem {
    let a = a_pos(max_index.max(1));
    let mut x = Elem::zero();
    for m in 1..=max_index {
        x.add_term(Gen::L(m), m as i32, a[(m - 1) as usize].clone());
    }
    x
}

/// `e^{ad_U} x = Σ_n ad_U^n x / n!`, keeping modes `<= max_index`. `U` only
/// raises modes, so nothing dropped can come back down and the kept part is
/// exact.
pub fn exp_ad(u: &Elem, x: &Elem, max_index: i64) -> Elem {
    let mut acc = x.truncate(max_index);
    let mut term = acc.clone();
    let mut n = 1;
    loop {
        term = u.bracket(&term).truncate(max_index).scale(&Rational::new(1, n));
        if term.is_zero() {
            return acc;
        }
        acc = acc.add(&term);
        n += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConjKind {
    /// `e^U L_{2m} e^{-U}`.
    LPart,
    /// `e^U P^{(2)}_m e^{-U}` with `P^{(2)}_m = Σ_{i>=1} (-1)^i b_i u^{i-1} α_{2m+2+i}`.
    PPart,
    /// `e^U (⅛ α_{-4}) e^{-U}`; `m` is ignored.
    Q4Part,
}

/// The starting element for each kind, modes `<= order`.
pub fn conj_seed(kind: ConjKind, m: i64, order: i64) -> Elem {
    match kind {
        ConjKind::LPart => Elem::single(Gen::L(2 * m), 0, Rational::one()),
        ConjKind::PPart => {
            let b = b_coeffs(order.max(2) as usize + 1);
            let mut x = Elem::zero();
            for i in 1..=(order - 2 * m - 2) {
                x.add_term(Gen::A(2 * m + 2 + i), (i - 1) as i32, Rational::sign_pow(i) * &b[i as usize]);
            }
            x
        }
        ConjKind::Q4Part => Elem::single(Gen::A(-4), 0, Rational::new(1, 8)),
    }
}

/// Coefficients of `e^{ad_U}(seed)` by brute-force nested commutators,
/// through mode `order`.
pub fn conjugation_coeffs_bruteforce(kind: ConjKind, m: i64, order: i64) -> Elem {
    let u = u_element(order - conj_seed(kind, m, order).terms().map(|(g, _, _)| g.index()).min().unwrap_or(0));
    exp_ad(&u, &conj_seed(kind, m, order), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_small_modes() {
        let gens: Vec<Gen> = (-3..=3).flat_map(|n| [Gen::L(n), Gen::A(n)]).filter(|g| *g != Gen::A(0)).collect();
        let el = |g: Gen| Elem::single(g, 0, Rational::one());
        for &a in &gens {
            for &b in &gens {
                for &c in &gens {
                    let (x, y, z) = (el(a), el(b), el(c));
                    let j = x.bracket(&y.bracket(&z)).add(&y.bracket(&z.bracket(&x))).add(&z.bracket(&x.bracket(&y)));
                    assert!(j.is_zero(), "Jacobi fails at {a}, {b}, {c}: {j}");
                }
            }
        }
    }

    #[test]
    fn central_term_at_two() {
        let x = Elem::single(Gen::L(2), 0, Rational::one()).bracket(&Elem::single(Gen::L(-2), 0, Rational::one()));
        assert_eq!(x.coeff(Gen::L(0), 0), Rational::from_int(4));
        assert_eq!(x.coeff(Gen::C, 0), Rational::new(1, 2));
    }
}
