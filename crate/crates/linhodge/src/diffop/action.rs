//! Operators as actions on polynomials, closed under sums, products,
//! commutators and exponentials, and their fingerprints on a monomial basis.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::exactnum::Rational;
use crate::exec::{self, Mode};
use crate::qring::{Family, GradedPoly, Mono, Vars, UNCAPPED};
use crate::{Error, Result};

use super::DiffOperator;

type Builder = Arc<dyn Fn(i64) -> Result<DiffOperator> + Send + Sync>;

/// An infinite operator rebuilt on demand whenever a wider materialisation is
/// needed.
pub struct LazyOp {
    pub label: String,
    pub family: Family,
    builder: Builder,
    cache: Mutex<Arc<DiffOperator>>,
}

impl fmt::Debug for LazyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyOp({})", self.label)
    }
}

impl LazyOp {
    pub fn new(
        label: impl Into<String>,
        family: Family,
        builder: impl Fn(i64) -> Result<DiffOperator> + Send + Sync + 'static,
    ) -> Result<Arc<Self>> {
        let first = builder(8)?;
        Ok(Arc::new(LazyOp { label: label.into(), family, builder: Arc::new(builder), cache: Mutex::new(Arc::new(first)) }))
    }

    /// A finite operator; never rebuilt.
    pub fn fixed(op: DiffOperator) -> Arc<Self> {
        let label = op.label.clone();
        let family = op.family;
        let shared = Arc::new(op);
        let for_builder = shared.clone();
        Arc::new(LazyOp {
            label,
            family,
            builder: Arc::new(move |_| Ok((*for_builder).clone())),
            cache: Mutex::new(shared),
        })
    }

    /// The operator materialised through at least partial weight `need`.
    pub fn at(&self, need: i64) -> Result<Arc<DiffOperator>> {
        let mut guard = self.cache.lock().expect("operator cache poisoned");
        if let Some(have) = guard.complete_through {
            if have < need {
                let op = (self.builder)(need.max(2 * have))?;
                *guard = Arc::new(op);
            }
        }
        Ok(guard.clone())
    }
}

/// A linear map on polynomials built from [`DiffOperator`]s.
#[derive(Clone, Debug)]
pub enum Action {
    Op(Arc<LazyOp>),
    Sum(Vec<(Rational, Action)>),
    /// Applied right to left.
    Compose(Vec<Action>),
    Comm(Box<Action>, Box<Action>),
    /// `exp(sign · gen)`; the generator must be locally nilpotent.
    Exp { gen: Box<Action>, sign: i64 },
    /// `exp(sign · gen) · inner · exp(-sign · gen)`.
    Conj { gen: Box<Action>, sign: i64, inner: Box<Action> },
}

const EXP_GUARD: usize = 500;

impl Action {
    pub fn op(op: DiffOperator) -> Action {
        Action::Op(LazyOp::fixed(op))
    }

    pub fn lazy(l: Arc<LazyOp>) -> Action {
        Action::Op(l)
    }

    pub fn scaled(self, c: Rational) -> Action {
        Action::Sum(vec![(c, self)])
    }

    pub fn plus(self, o: Action) -> Action {
        Action::Sum(vec![(Rational::one(), self), (Rational::one(), o)])
    }

    pub fn minus(self, o: Action) -> Action {
        Action::Sum(vec![(Rational::one(), self), (Rational::from_int(-1), o)])
    }

    pub fn then(self, first: Action) -> Action {
        Action::Compose(vec![self, first])
    }

    pub fn comm(a: Action, b: Action) -> Action {
        Action::Comm(Box::new(a), Box::new(b))
    }

    pub fn exp(gen: Action, sign: i64) -> Action {
        Action::Exp { gen: Box::new(gen), sign }
    }

    pub fn conj(gen: Action, sign: i64, inner: Action) -> Action {
        Action::Conj { gen: Box::new(gen), sign, inner: Box::new(inner) }
    }

    pub fn has_du(&self) -> bool {
        match self {
            Action::Op(l) => l.at(0).map(|o| o.has_du()).unwrap_or(false),
            Action::Sum(v) => v.iter().any(|(_, a)| a.has_du()),
            Action::Compose(v) => v.iter().any(|a| a.has_du()),
            Action::Comm(a, b) => a.has_du() || b.has_du(),
            Action::Exp { gen, .. } => gen.has_du(),
            Action::Conj { gen, inner, .. } => gen.has_du() || inner.has_du(),
        }
    }

    /// Exact image of `p`.
    pub fn apply(&self, p: &GradedPoly) -> Result<GradedPoly> {
        if p.is_zero() {
            return Ok(p.with_cap(UNCAPPED));
        }
        match self {
            Action::Op(l) => l.at(p.max_var_weight())?.apply_poly(p),
            Action::Sum(v) => {
                let mut acc = GradedPoly::zero(p.family, UNCAPPED);
                for (c, a) in v {
                    acc.add_scaled(&a.apply(p)?, c);
                }
                Ok(acc)
            }
            Action::Compose(v) => {
                let mut cur = p.with_cap(UNCAPPED);
                for a in v.iter().rev() {
                    cur = a.apply(&cur)?;
                }
                Ok(cur)
            }
            Action::Comm(a, b) => {
                let ab = a.apply(&b.apply(p)?)?;
                let ba = b.apply(&a.apply(p)?)?;
                Ok(ab.sub(&ba))
            }
            Action::Exp { gen, sign } => exp_apply(gen, *sign, p),
            Action::Conj { gen, sign, inner } => {
                let x = exp_apply(gen, -sign, p)?;
                let y = inner.apply(&x)?;
                exp_apply(gen, *sign, &y)
            }
        }
    }
}

fn exp_apply(gen: &Action, sign: i64, p: &GradedPoly) -> Result<GradedPoly> {
    let mut acc = p.with_cap(UNCAPPED);
    let mut term = acc.clone();
    for n in 1..=EXP_GUARD {
        term = gen.apply(&term)?.scale(&Rational::new(sign, n as i64));
        if term.is_zero() {
            return Ok(acc);
        }
        acc.add_assign(&term);
    }
    Err(Error::Structural(format!("exponential series did not terminate after {EXP_GUARD} terms")))
}

/// All monomials of variable weight `<= cap` (including 1). With `with_u`,
/// each is also taken times `u`.
pub fn basis(family: Family, cap: i64, with_u: bool) -> Vec<Mono> {
    let mut out = vec![];
    let mut cur: Vec<u16> = vec![];
    fn rec(family: Family, rem: i64, max_idx: u16, cur: &mut Vec<u16>, out: &mut Vec<Vars>) {
        out.push(cur.iter().copied().collect());
        let start = match family {
            Family::Q => 1,
            Family::T => 0,
        };
        for k in start..=max_idx {
            let w = family.var_weight(k);
            if w > rem {
                break;
            }
            cur.push(k);
            rec(family, rem - w, k, cur, out);
            cur.pop();
        }
    }
    let mut vars = vec![];
    let top = cap.max(0) as u16;
    rec(family, cap, top, &mut cur, &mut vars);
    for v in vars {
        out.push(Mono::new(0, v.clone()));
        if with_u {
            out.push(Mono::new(1, v));
        }
    }
    out.sort();
    out
}

/// Action of an operator on every basis monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub family: Family,
    pub cap: i64,
    pub images: BTreeMap<Mono, GradedPoly>,
}

impl Fingerprint {
    /// First basis monomial where the two disagree, with the difference.
    pub fn first_mismatch(&self, other: &Fingerprint) -> Option<(Mono, GradedPoly)> {
        for (m, a) in &self.images {
            let b = other.images.get(m).cloned().unwrap_or_else(|| GradedPoly::zero(self.family, UNCAPPED));
            let d = a.sub(&b);
            if !d.is_zero() {
                return Some((m.clone(), d));
            }
        }
        other
            .images
            .iter()
            .find(|(m, b)| !self.images.contains_key(*m) && !b.is_zero())
            .map(|(m, b)| (m.clone(), b.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.images.values().all(|p| p.is_zero())
    }

    /// Same action on the basis, possibly with a different pre-factor.
    pub fn scale(&self, c: &Rational) -> Fingerprint {
        Fingerprint {
            family: self.family,
            cap: self.cap,
            images: self.images.iter().map(|(m, p)| (m.clone(), p.scale(c))).collect(),
        }
    }
}

pub fn fingerprint(action: &Action, family: Family, cap: i64, mode: Mode) -> Result<Fingerprint> {
    fingerprint_on(action, family, cap, &basis(family, cap, action.has_du()), mode)
}

/// Fingerprint on an explicit list of basis monomials.
pub fn fingerprint_on(action: &Action, family: Family, cap: i64, monos: &[Mono], mode: Mode) -> Result<Fingerprint> {
    let images = exec::map(mode, monos, |m| {
        let p = GradedPoly::monomial(family, UNCAPPED, m.clone(), Rational::one());
        action.apply(&p).map(|r| (m.clone(), r))
    });
    let images = images.into_iter().collect::<Result<BTreeMap<_, _>>>()?;
    Ok(Fingerprint { family, cap, images })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::Term;

    #[test]
    fn basis_counts_partitions() {
        // partitions of 0..=4: 1+1+2+3+5
        assert_eq!(basis(Family::Q, 4, false).len(), 12);
        // t-weights 1,3,5: multisets with weight <= 3: 1, t0, t0^2, t0^3, t1
        assert_eq!(basis(Family::T, 3, false).len(), 5);
    }

    #[test]
    fn exp_of_derivative_shifts() {
        let mut d = DiffOperator::new(Family::Q, "d1");
        d.push(Rational::one(), Term::new(0, &[], &[1]));
        let e = Action::exp(Action::op(d), 1);
        let p = GradedPoly::monomial(Family::Q, UNCAPPED, Mono::new(0, [1, 1].into_iter().collect()), Rational::one());
        let r = e.apply(&p).unwrap();
        // (q1 + 1)^2
        assert_eq!(r.len(), 3);
        assert_eq!(r.coeff(&Mono::one()), Rational::one());
        assert_eq!(r.coeff(&Mono::new(0, [1].into_iter().collect())), Rational::from_int(2));
    }
}
