//! Polynomials in `z_1, …, z_l` with rational coefficients. The recursion
//! produces symmetric ones; intermediate values need not be.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::exactnum::Rational;
use crate::{Error, Result};

pub type Exps = Vec<u16>;

#[derive(Clone, PartialEq, Eq)]
pub struct SymPoly {
    pub nvars: usize,
    terms: BTreeMap<Exps, Rational>,
}

impl fmt::Debug for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(i, &x)| if x == 1 { format!("z{}", i + 1) } else { format!("z{}^{x}", i + 1) })
                    .collect();
                if mono.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Serialize for SymPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            seq.serialize_element(&(e, c))?;
        }
        seq.end()
    }
}

impl SymPoly {
    pub fn zero(nvars: usize) -> Self {
        SymPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `c · z_i^e`.
    pub fn monomial(nvars: usize, i: usize, e: u16, c: Rational) -> Self {
        let mut ex = vec![0; nvars];
        ex[i] = e;
        let mut p = Self::zero(nvars);
        p.add_term(ex, c);
        p
    }

    /// A one-variable polynomial `Σ c_e z^e` placed in slot `i`.
    pub fn univariate(nvars: usize, i: usize, coeffs: &[(u16, Rational)]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in coeffs {
            let mut ex = vec![0; nvars];
            ex[i] = *e;
            p.add_term(ex, c.clone());
        }
        p
    }

    pub fn add_term(&mut self, e: Exps, c: Rational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u16]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max()
    }

    pub fn add_assign(&mut self, o: &SymPoly) {
        assert_eq!(self.nvars, o.nvars);
        for (e, c) in &o.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn add(&self, o: &SymPoly) -> SymPoly {
        let mut p = self.clone();
        p.add_assign(o);
        p
    }

    pub fn sub(&self, o: &SymPoly) -> SymPoly {
        self.add(&o.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, s: &Rational) -> SymPoly {
        let mut p = Self::zero(self.nvars);
        if s.is_zero() {
            return p;
        }
        for (e, c) in &self.terms {
            p.terms.insert(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, o: &SymPoly) -> SymPoly {
        assert_eq!(self.nvars, o.nvars);
        let mut p = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e: Exps = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    /// `z_i ∂/∂z_i`.
    pub fn euler(&self, i: usize) -> SymPoly {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * &Rational::from_int(e[i] as i64));
        }
        p
    }

    /// Multiply by `z_i^k`.
    pub fn shift(&self, i: usize, k: u16) -> SymPoly {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[i] += k;
            p.terms.insert(e, c.clone());
        }
        p
    }

    /// Multiply by `(1 + z_i)^k`.
    pub fn times_one_plus(&self, i: usize, k: u16) -> SymPoly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.add(&p.shift(i, 1));
        }
        p
    }

    /// `D_i = (1 + z_i)^2 z_i ∂/∂z_i`.
    pub fn d(&self, i: usize) -> SymPoly {
        self.euler(i).times_one_plus(i, 2)
    }

    /// Exact quotient by `z_i - z_j`; a nonzero remainder is an error.
    pub fn div_difference(&self, i: usize, j: usize) -> Result<SymPoly> {
        assert_ne!(i, j);
        // Treat as a polynomial in z_i over the other variables and run
        // synthetic division by (z_i - z_j): peel off the top z_i power.
        let mut rem = self.clone();
        let mut quo = Self::zero(self.nvars);
        loop {
            let top = rem.terms.keys().map(|e| e[i]).max().unwrap_or(0);
            if top == 0 {
                break;
            }
            let (e, c) = rem.terms.iter().find(|(e, _)| e[i] == top).map(|(e, c)| (e.clone(), c.clone())).unwrap();
            // c z_i^a R  = c z_i^{a-1} R (z_i - z_j) + c z_i^{a-1} z_j R
            let mut q = e.clone();
            q[i] -= 1;
            quo.add_term(q.clone(), c.clone());
            rem.add_term(e.clone(), -c.clone());
            let mut carry = q;
            carry[j] += 1;
            rem.add_term(carry, c);
        }
        // what is left has no z_i; it must vanish at z_i = z_j, i.e. be zero
        if !rem.is_zero() {
            return Err(Error::Structural(format!(
                "divided difference by z{} - z{} leaves remainder {rem}",
                i + 1,
                j + 1
            )));
        }
        Ok(quo)
    }

    /// Re-embed into `nvars` variables: variable `k` of `self` goes to slot `slots[k]`.
    pub fn embed(&self, nvars: usize, slots: &[usize]) -> SymPoly {
        assert_eq!(slots.len(), self.nvars);
        let mut p = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut ex = vec![0u16; nvars];
            for (k, &s) in slots.iter().enumerate() {
                ex[s] += e[k];
            }
            p.add_term(ex, c.clone());
        }
        p
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(e, c)| {
            (0..self.nvars).all(|a| {
                (a + 1..self.nvars).all(|b| {
                    let mut t = e.clone();
                    t.swap(a, b);
                    &self.coeff(&t) == c
                })
            })
        })
    }

    /// Value at a point.
    pub fn eval(&self, z: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, &x) in e.iter().enumerate() {
                t = t * z[k].pow(x as i32);
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn divided_difference() {
        // (z1^3 - z2^3)/(z1 - z2) = z1^2 + z1 z2 + z2^2
        let p = SymPoly::monomial(2, 0, 3, r(1)).sub(&SymPoly::monomial(2, 1, 3, r(1)));
        let q = p.div_difference(0, 1).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.coeff(&[1, 1]), r(1));
        assert!(SymPoly::monomial(2, 0, 1, r(1)).div_difference(0, 1).is_err());
    }

    #[test]
    fn d_operator() {
        // D z = (1+z)^2 z
        let p = SymPoly::monomial(1, 0, 1, r(1)).d(0);
        assert_eq!(p.coeff(&[1]), r(1));
        assert_eq!(p.coeff(&[2]), r(2));
        assert_eq!(p.coeff(&[3]), r(1));
    }
}
