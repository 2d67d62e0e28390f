//! The polynomial recursion for `Ĥ_{g,l}(z_1, …, z_l)`, as a checker and as
//! a solver.

use std::collections::{BTreeMap, HashMap};

use crate::exactnum::Rational;
use crate::qring::{phi_poly, table::multisets, table::stable_range};
use crate::{Error, Result};

use super::sympoly::SymPoly;
use super::{BracketTable, Provenance};

/// `φ_n(z)` at `u = 1`, as `(exponent, coefficient)` pairs.
pub fn phi_coeffs(n: usize) -> Vec<(u16, Rational)> {
    phi_poly(n, false).terms().map(|(m, c)| (m.vars[0], c.clone())).collect()
}

struct PhiCache(HashMap<usize, Vec<(u16, Rational)>>);

impl PhiCache {
    fn new() -> Self {
        PhiCache(HashMap::new())
    }

    fn get(&mut self, n: usize) -> &[(u16, Rational)] {
        self.0.entry(n).or_insert_with(|| phi_coeffs(n))
    }

    /// `Π_i φ_{n_i}(z_i)`.
    fn product(&mut self, ns: &[u16]) -> SymPoly {
        let l = ns.len();
        let mut p = SymPoly::constant(l, Rational::one());
        for (i, &n) in ns.iter().enumerate() {
            let f = SymPoly::univariate(l, i, self.get(n as usize));
            p = p.mul(&f);
        }
        p
    }

    /// Sum of `Π φ_{n_σ(i)}(z_i)` over the distinct orderings of the multiset.
    fn symmetrized(&mut self, d: &[u16]) -> SymPoly {
        let mut out = SymPoly::zero(d.len());
        for perm in distinct_perms(d) {
            out.add_assign(&self.product(&perm));
        }
        out
    }
}

fn distinct_perms(d: &[u16]) -> Vec<Vec<u16>> {
    let mut v = d.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    // next_permutation over the sorted multiset
    loop {
        let n = v.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        out.push(v.clone());
    }
    out
}

fn euler_char(g: u32, l: usize) -> i64 {
    2 * g as i64 - 2 + l as i64
}

/// `Ĥ_{g,l} = Σ_n <τ_n Λ_g^∨(1)> Π φ_{n_i}(z_i)` with `<τ_n Λ^∨(1)> = (-1)^j <λ_j τ_n>`.
/// Unstable `(g, l)` give zero.
pub fn build_h_polys(g: u32, l: usize, table: &BracketTable) -> Result<SymPoly> {
    let mut cache = PhiCache::new();
    build_with(g, l, table, &mut cache)
}

fn build_with(g: u32, l: usize, table: &BracketTable, cache: &mut PhiCache) -> Result<SymPoly> {
    if euler_char(g, l) <= 0 {
        return Ok(SymPoly::zero(l));
    }
    let dim = 3 * g + l as u32 - 3;
    let mut out = SymPoly::zero(l);
    for d in multisets(l as u32, dim) {
        let sum: u32 = d.iter().map(|&x| x as u32).sum();
        let j = dim - sum;
        if j > g {
            continue;
        }
        let v = table
            .get(g, j, &d)
            .ok_or_else(|| Error::MissingBracket(format!("<lambda_{j} tau_{d:?}> at genus {g}")))?;
        if v.is_zero() {
            continue;
        }
        let c = v * Rational::sign_pow(j as i64);
        out.add_assign(&cache.symmetrized(&d).scale(&c));
    }
    Ok(out)
}

/// Source terms carried by the two base cases.
fn source(g: u32, l: usize) -> SymPoly {
    match (g, l) {
        (0, 3) => {
            // z1 z2 z3 (4 + z1 + z2 + z3)
            let mut p = SymPoly::zero(3);
            p.add_term(vec![1, 1, 1], Rational::from_int(4));
            p.add_term(vec![2, 1, 1], Rational::one());
            p.add_term(vec![1, 2, 1], Rational::one());
            p.add_term(vec![1, 1, 2], Rational::one());
            p
        }
        (1, 1) => SymPoly::univariate(
            1,
            0,
            &[(2, Rational::new(1, 4)), (3, Rational::new(1, 3)), (4, Rational::new(1, 8))],
        ),
        _ => SymPoly::zero(l),
    }
}

/// `(2g-2+l) H + Σ_i (1+z_i) z_i ∂_i H`.
fn lhs_operator(g: u32, h: &SymPoly) -> SymPoly {
    let l = h.nvars;
    let mut out = h.scale(&Rational::from_int(euler_char(g, l)));
    for i in 0..l {
        out.add_assign(&h.euler(i).times_one_plus(i, 1));
    }
    out
}

/// Right-hand side of the recursion plus the base-case source, built from the
/// lower polynomials supplied by `lower`.
fn rhs(g: u32, l: usize, lower: &mut dyn FnMut(u32, usize) -> Result<SymPoly>) -> Result<SymPoly> {
    let mut out = source(g, l);
    let half = Rational::new(1, 2);
    // divided differences
    if l >= 2 {
        let h = lower(g, l - 1)?;
        if !h.is_zero() {
            for i in 0..l {
                for j in i + 1..l {
                    let without = |skip: usize| -> Vec<usize> { (0..l).filter(|&k| k != skip).collect() };
                    // H(z without z_j): its variables sit at the other slots in order
                    let slots_j = without(j);
                    let pos_i = slots_j.iter().position(|&s| s == i).unwrap();
                    let a = h.d(pos_i).embed(l, &slots_j).shift(j, 1).times_one_plus(i, 2);
                    let slots_i = without(i);
                    let pos_j = slots_i.iter().position(|&s| s == j).unwrap();
                    let b = h.d(pos_j).embed(l, &slots_i).shift(i, 1).times_one_plus(j, 2);
                    out.add_assign(&a.sub(&b).div_difference(i, j)?);
                }
            }
        }
    }
    // genus reduction: ½ [D_{u1} D_{u2} H_{g-1,l+1}(u1,u2,rest)]_{u1=u2=z_i}
    if g >= 1 {
        let h = lower(g - 1, l + 1)?;
        if !h.is_zero() {
            let dd = h.d(0).d(1);
            for i in 0..l {
                let mut slots = vec![i, i];
                slots.extend((0..l).filter(|&k| k != i));
                out.add_assign(&dd.embed(l, &slots).scale(&half));
            }
        }
    }
    // splittings
    for i in 0..l {
        let others: Vec<usize> = (0..l).filter(|&k| k != i).collect();
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0u32..(1 << others.len()) {
                let jset: Vec<usize> = others.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 1).map(|(_, &k)| k).collect();
                let kset: Vec<usize> = others.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 0).map(|(_, &k)| k).collect();
                if 2 * g1 as i64 - 1 + jset.len() as i64 <= 0 || 2 * g2 as i64 - 1 + kset.len() as i64 <= 0 {
                    continue;
                }
                let h1 = lower(g1, jset.len() + 1)?;
                let h2 = lower(g2, kset.len() + 1)?;
                if h1.is_zero() || h2.is_zero() {
                    continue;
                }
                let mut s1 = vec![i];
                s1.extend(&jset);
                let mut s2 = vec![i];
                s2.extend(&kset);
                let p1 = h1.d(0).embed(l, &s1);
                let p2 = h2.d(0).embed(l, &s2);
                out.add_assign(&p1.mul(&p2).scale(&half));
            }
        }
    }
    Ok(out)
}

/// LHS minus RHS (and source) of the recursion at `(g, l)`; zero when it holds.
pub fn recursion_check(g: u32, l: usize, table: &BracketTable) -> Result<SymPoly> {
    if euler_char(g, l) <= 0 {
        return Err(Error::Domain(format!("recursion needs 2g-2+l > 0, got (g,l)=({g},{l})")));
    }
    let mut cache = PhiCache::new();
    let mut memo: BTreeMap<(u32, usize), SymPoly> = BTreeMap::new();
    let h = build_with(g, l, table, &mut cache)?;
    let mut lower = |gg: u32, ll: usize| -> Result<SymPoly> {
        if let Some(p) = memo.get(&(gg, ll)) {
            return Ok(p.clone());
        }
        let p = build_with(gg, ll, table, &mut cache)?;
        memo.insert((gg, ll), p.clone());
        Ok(p)
    };
    let r = rhs(g, l, &mut lower)?;
    Ok(lhs_operator(g, &h).sub(&r))
}

/// Solve the recursion level by level for every stable `(g, l)` with
/// `3(2g-2+l) <= cap`, reading brackets off the `φ`-product basis.
pub fn hodge_table_via_recursion(cap: i64) -> Result<BracketTable> {
    let mut table = BracketTable::new(Provenance::Recursion);
    let mut polys: BTreeMap<(u32, usize), SymPoly> = BTreeMap::new();
    let mut cache = PhiCache::new();
    let mut levels: Vec<(u32, u32)> = stable_range(cap).into_iter().filter(|&(_, n)| n >= 1).collect();
    levels.sort_by_key(|&(g, n)| (euler_char(g, n as usize), g));
    for (g, n) in levels {
        let l = n as usize;
        let mut lower = |gg: u32, ll: usize| -> Result<SymPoly> {
            if euler_char(gg, ll) <= 0 {
                return Ok(SymPoly::zero(ll));
            }
            polys
                .get(&(gg, ll))
                .cloned()
                .ok_or_else(|| Error::MissingBracket(format!("H_{{{gg},{ll}}} needed before it was solved")))
        };
        let r = rhs(g, l, &mut lower)?;
        let dim = 3 * g + n - 3;
        let unknowns: Vec<(u32, Vec<u16>)> = multisets(n, dim)
            .into_iter()
            .filter_map(|d| {
                let sum: u32 = d.iter().map(|&x| x as u32).sum();
                (dim - sum <= g).then_some((dim - sum, d))
            })
            .collect();
        let columns: Vec<SymPoly> = unknowns.iter().map(|(_, d)| lhs_operator(g, &cache.symmetrized(d))).collect();
        let sol = solve_exact(&columns, &r).map_err(|e| Error::Structural(format!("(g,l)=({g},{l}): {e}")))?;
        let mut h = SymPoly::zero(l);
        for ((j, d), v) in unknowns.iter().zip(sol) {
            h.add_assign(&cache.symmetrized(d).scale(&v));
            table.insert(g, *j, d.clone(), v * Rational::sign_pow(*j as i64));
        }
        polys.insert((g, l), h);
    }
    Ok(table)
}

/// Solve `Σ x_k columns[k] = target` exactly; the solution must exist and be unique.
fn solve_exact(columns: &[SymPoly], target: &SymPoly) -> std::result::Result<Vec<Rational>, String> {
    let mut rows: BTreeMap<Vec<u16>, usize> = BTreeMap::new();
    for p in columns.iter().chain(std::iter::once(target)) {
        for (e, _) in p.terms() {
            let next = rows.len();
            rows.entry(e.clone()).or_insert(next);
        }
    }
    let n = columns.len();
    let mut m: Vec<Vec<Rational>> = vec![vec![Rational::zero(); n + 1]; rows.len()];
    for (k, p) in columns.iter().enumerate() {
        for (e, c) in p.terms() {
            m[rows[e]][k] = c.clone();
        }
    }
    for (e, c) in target.terms() {
        m[rows[e]][n] = c.clone();
    }
    let mut pivot_row = 0;
    let mut pivots = vec![];
    for col in 0..n {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            return Err(format!("unknown {col} is undetermined"));
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].recip();
        for x in m[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|row| !row[n].is_zero()) {
        return Err("right-hand side is not in the span of the phi products".into());
    }
    Ok(pivots.iter().map(|&r| m[r][n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perms_of_multiset() {
        assert_eq!(distinct_perms(&[0, 0, 1]).len(), 3);
        assert_eq!(distinct_perms(&[1, 2, 3]).len(), 6);
    }

    #[test]
    fn phi_one() {
        let c = phi_coeffs(1);
        assert_eq!(c, vec![(1, Rational::one()), (2, Rational::from_int(2)), (3, Rational::one())]);
    }
}
