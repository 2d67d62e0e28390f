//! The specific series and coefficient families: `b_i`, `C_i`, `h`, `eta`,
//! `a_m`, `a_{-m}`, `f`, `v`, `p_m`, `G_m`, `g`, `nu`, `gamma`, `c_n^{(k,m)}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use super::{TruncatedSeries, Var};
use crate::exactnum::{bernoulli, d3_count, double_factorial_odd, factorial, Rational};
use crate::{Error, Result};

pub const DEFAULT_ORDER: i64 = 30;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn poly(var: Var, c: &[i64], order: i64) -> TruncatedSeries {
    TruncatedSeries::new(var, 0, c.iter().map(|&x| q(x)).collect(), order)
}

/// `b_0 .. b_n` from `(n+1) b_n = b_{n-1} - Σ_{k=2}^{n-1} k b_k b_{n+1-k}`,
/// with `b_0 = b_1 = 1`, `b_2 = 1/3`.
pub fn b_coeffs(n: usize) -> Vec<Rational> {
    let mut b = vec![Rational::one(), Rational::one(), Rational::new(1, 3)];
    for m in 3..=n {
        let mut s = b[m - 1].clone();
        for k in 2..m {
            s -= q(k as i64) * &b[k] * &b[m + 1 - k];
        }
        b.push(s / q(m as i64 + 1));
    }
    b.truncate(n + 1);
    b
}

/// `C_i = (2i+1)!! b_{2i+1}` for `i <= n`.
pub fn c_coeffs(n: usize) -> Vec<Rational> {
    let b = b_coeffs(2 * n + 1);
    (0..=n).map(|i| double_factorial_odd(2 * i as i64 + 1).unwrap() * &b[2 * i + 1]).collect()
}

/// `C_i` as `[w^i] exp(Σ_k B_{2k}/(2k(2k-1)) w^{2k-1})`.
pub fn c_via_bernoulli(n: usize) -> Vec<Rational> {
    let n = n as i64;
    let terms: Vec<(i64, Rational)> = (1..=(n + 1) / 2 + 1)
        .map(|k| (2 * k - 1, bernoulli(2 * k as usize) / q(2 * k * (2 * k - 1))))
        .collect();
    let e = TruncatedSeries::from_terms(Var::W, &terms, n).exp().unwrap();
    (0..=n).map(|i| e.coeff(i).unwrap()).collect()
}

/// `C_i = Σ_{k=1}^{2i} (-1)^k d_3(2i+2k, k) / (2^{i+k} (i+k)!)`, with `C_0 = 1`.
pub fn c_via_d3(n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::one()];
    for i in 1..=n {
        let mut s = Rational::zero();
        for k in 1..=2 * i {
            let num = Rational::from_bigint(d3_count(2 * i + 2 * k, k));
            let den = Rational::from_bigint(BigInt::from(2).pow((i + k) as u32) * factorial((i + k) as u64));
            s += Rational::sign_pow(k as i64) * num / den;
        }
        out.push(s);
    }
    out
}

/// `h = (Σ (-1)^i b_i z^i)^{-1} - 1` through `order`.
pub fn h_series(order: i64) -> TruncatedSeries {
    let b = b_coeffs(order.max(2) as usize);
    let c = b.iter().enumerate().map(|(i, x)| x * &Rational::sign_pow(i as i64)).collect();
    let s = TruncatedSeries::new(Var::Z, 0, c, order);
    s.inverse().unwrap().sub(&TruncatedSeries::one(Var::Z, order)).unwrap()
}

/// `eta`, the compositional inverse of `h`.
pub fn eta_series(order: i64) -> TruncatedSeries {
    h_series(order).comp_inverse().unwrap()
}

/// `eta` as the positive root of `2 log(1+z) - 2z/(1+z)`.
pub fn eta_via_log(order: i64) -> TruncatedSeries {
    let n = order + 1;
    let l = poly(Var::Z, &[1, 1], n).log().unwrap().scale(&q(2));
    let frac = TruncatedSeries::var(Var::Z, n).div(&poly(Var::Z, &[1, 1], n)).unwrap().scale(&q(2));
    l.sub(&frac).unwrap().sqrt().unwrap()
}

/// `eta^k` known through `order`; negative `k` allowed.
pub fn eta_pow(k: i64, order: i64) -> TruncatedSeries {
    if k == 0 {
        return TruncatedSeries::one(Var::Z, order);
    }
    // eta^k loses (k-1) orders when k > 0 is fine; negative powers lose 2|k|
    let extra = if k < 0 { 2 * (-k) + 1 } else { 1 };
    eta_series(order + extra).pow(k).unwrap().truncate(order)
}

/// `a_1, a_2, …` with `exp(Σ a_m z^{1+m} d/dz) z = h`.
pub fn a_pos(order: i64) -> Vec<Rational> {
    // the coefficients do not depend on the order asked for; keep the longest run
    static CACHE: std::sync::Mutex<Vec<Rational>> = std::sync::Mutex::new(Vec::new());
    let n = order.max(0) as usize;
    if let Some(v) = CACHE.lock().unwrap().get(..n) {
        return v.to_vec();
    }
    let fresh = h_series(order + 1).solve_derivation_coeffs(1).unwrap();
    let mut c = CACHE.lock().unwrap();
    if fresh.len() > c.len() {
        *c = fresh.clone();
    }
    fresh.into_iter().take(n).collect()
}

/// `a_{-1}, a_{-2}, …` with `exp(-Σ a_{-m} z^{1+m} d/dz) z = z/(1+z) e^{-z/(1+z)}`.
pub fn a_neg(order: i64) -> Vec<Rational> {
    hurwitz_target(order + 1).solve_derivation_coeffs(-1).unwrap()
}

pub fn hurwitz_target(order: i64) -> TruncatedSeries {
    let v = TruncatedSeries::var(Var::Z, order).div(&poly(Var::Z, &[1, 1], order)).unwrap();
    v.mul(&v.neg().exp().unwrap()).unwrap()
}

/// `(1+z)^2/z^2 · eta^{2m+2}` through `order`; its coefficients are `nu^{(m)}`.
pub fn g_closed(m: i64, order: i64) -> TruncatedSeries {
    let e = eta_pow(2 * m + 2, order + 2);
    e.mul(&poly(Var::Z, &[1, 2, 1], order + 2)).unwrap().shift(-2).truncate(order)
}

/// `-z/(1+z) · eta^{2m+2}`; its coefficients are `gamma^{(m)}`.
pub fn gamma_closed(m: i64, order: i64) -> TruncatedSeries {
    let e = eta_pow(2 * m + 2, order);
    let w = TruncatedSeries::var(Var::Z, order).div(&poly(Var::Z, &[1, 1], order)).unwrap().neg();
    e.mul(&w).unwrap().truncate(order)
}

/// `p_m(z)` from its definition: `Σ_i (-1)^i b_i z d/dz (exp(-Σ a_k z^{1+k} d/dz) z^{2m+2+i})`.
pub fn p_m_definition(m: i64, order: i64) -> TruncatedSeries {
    let a = a_pos(order + 4);
    let b = b_coeffs(order.max(2) as usize + 4);
    let mut acc = TruncatedSeries::zero(Var::Z, order);
    for i in 1..=(order - 2 * m - 2).max(0) {
        let e = 2 * m + 2 + i;
        let start = TruncatedSeries::monomial(Var::Z, e, Rational::one(), order);
        let moved = start.exp_derivation(&a, -1, None).unwrap().euler();
        acc = acc.add(&moved.scale(&(&b[i as usize] * &Rational::sign_pow(i)))).unwrap();
    }
    acc
}

/// `z d/dz (-z/(1+z) eta^{2m+2})`.
pub fn p_m_closed(m: i64, order: i64) -> TruncatedSeries {
    gamma_closed(m, order).euler()
}

/// `G_m` from its definition: `exp(-Σ a_k z^{1+k} d/dz + Σ k a_k z^k) z^{2m}`.
pub fn g_m_definition(m: i64, order: i64) -> TruncatedSeries {
    let a = a_pos(order + 6);
    let mult: Vec<Rational> = a.iter().enumerate().map(|(i, x)| x * &q(i as i64 + 1)).collect();
    TruncatedSeries::monomial(Var::Z, 2 * m, Rational::one(), order).exp_derivation(&a, -1, Some(&mult)).unwrap()
}

/// `g(z) = 2 log(z(1+h)/h)`.
pub fn g_closed_log(order: i64) -> TruncatedSeries {
    let h = h_series(order + 2);
    let ratio = h.shift(-1).inverse().unwrap().mul(&poly(Var::Z, &[1], order + 1).add(&h).unwrap()).unwrap();
    ratio.log().unwrap().scale(&q(2)).truncate(order)
}

/// `g` as the series with `exp(-Σ a_k z^{1+k} d/dz + Σ k a_k z^k) = exp(-Σ a_k z^{1+k} d/dz) exp(g)`,
/// read off from the action on `1`.
pub fn g_from_flow(order: i64) -> TruncatedSeries {
    let a = a_pos(order + 2);
    let mult: Vec<Rational> = a.iter().enumerate().map(|(i, x)| x * &q(i as i64 + 1)).collect();
    let one = TruncatedSeries::one(Var::Z, order);
    // exp(-ad) applied to e^g gives e^{g(eta)}; undo the change of variables with h
    let moved = one.exp_derivation(&a, -1, Some(&mult)).unwrap();
    moved.compose(&h_series(order)).unwrap().log().unwrap()
}

/// `z g'(z)` from `exp(Σ a_k z^{1+k} d/dz)(-Σ d_n n z^n)`, `d_n = (-1)^n 4/((n+2)(n+1)n)`.
pub fn zg_prime_from_flow(order: i64) -> TruncatedSeries {
    let a = a_pos(order + 2);
    let terms: Vec<(i64, Rational)> =
        (1..=order).map(|n| (n, -(Rational::sign_pow(n) * Rational::new(4, (n + 2) * (n + 1) * n)) * q(n))).collect();
    TruncatedSeries::from_terms(Var::Z, &terms, order).exp_derivation(&a, 1, None).unwrap()
}

/// `f = 1/eta(1/z)`, stored in `w = 1/z`: `f = w^{-1} + 2/3 + O(w)`.
pub fn f_series(order: i64) -> TruncatedSeries {
    eta_series(order + 2).with_var(Var::W).inverse().unwrap().truncate(order)
}

/// `v = 1 + Σ b_i s^i` with `s = (2y)^{1/2}`.
pub fn v_series(order: i64) -> TruncatedSeries {
    TruncatedSeries::new(Var::S, 0, b_coeffs(order.max(2) as usize), order)
}

/// `c_n^{(k,m)} = Σ_{i=0}^n (-1)^i (2k-2i+1)!!/(2k-2m-2i-1)!! C_i C_{n-i}`.
pub fn c_nkm(n: i64, k: i64, m: i64) -> Rational {
    if n < 0 {
        return Rational::zero();
    }
    let c = c_coeffs(n as usize);
    let mut s = Rational::zero();
    for i in 0..=n {
        let top = double_factorial_odd(2 * k - 2 * i + 1).unwrap();
        let bot = double_factorial_odd(2 * k - 2 * m - 2 * i - 1).unwrap();
        s += Rational::sign_pow(i) * top / bot * &c[i as usize] * &c[(n - i) as usize];
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "m")]
pub enum CoeffKind {
    B,
    C,
    APos,
    ANeg,
    Nu(i64),
    Gamma(i64),
}

impl std::str::FromStr for CoeffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "b" => CoeffKind::B,
            "C" | "c" => CoeffKind::C,
            "a" | "a_pos" => CoeffKind::APos,
            "a_neg" => CoeffKind::ANeg,
            _ => {
                let num = |p: &str| s.strip_prefix(p).map(|r| r.trim_matches(|c| c == '(' || c == ')')).and_then(|r| r.parse::<i64>().ok());
                if let Some(m) = num("nu") {
                    return Ok(CoeffKind::Nu(m));
                }
                if let Some(m) = num("gamma") {
                    return Ok(CoeffKind::Gamma(m));
                }
                return Err(Error::Parse(format!("unknown coefficient family {s:?}; try b, C, a, a_neg, nu<m>, gamma<m>")));
            }
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffFamily {
    pub kind: CoeffKind,
    pub values: BTreeMap<i64, Rational>,
    pub order: i64,
}

/// Coefficients of a family through index `order`.
pub fn named_coeffs(kind: CoeffKind, order: i64) -> Result<CoeffFamily> {
    if order < 0 {
        return Err(Error::Domain(format!("order {order} < 0")));
    }
    let n = order as usize;
    let values: BTreeMap<i64, Rational> = match kind {
        CoeffKind::B => b_coeffs(n).into_iter().enumerate().map(|(i, v)| (i as i64, v)).collect(),
        CoeffKind::C => c_coeffs(n).into_iter().enumerate().map(|(i, v)| (i as i64, v)).collect(),
        CoeffKind::APos => a_pos(order + 1).into_iter().take(n).enumerate().map(|(i, v)| (i as i64 + 1, v)).collect(),
        CoeffKind::ANeg => a_neg(order + 1).into_iter().take(n).enumerate().map(|(i, v)| (i as i64 + 1, v)).collect(),
        CoeffKind::Nu(m) => {
            if m < -1 {
                return Err(Error::Domain(format!("nu needs m >= -1, got {m}")));
            }
            let s = g_closed(m, order);
            (2 * m..=order).map(|i| (i, s.coeff(i).unwrap())).collect()
        }
        CoeffKind::Gamma(m) => {
            if m < -1 {
                return Err(Error::Domain(format!("gamma needs m >= -1, got {m}")));
            }
            let s = gamma_closed(m, order);
            ((2 * m + 2).max(0)..=order).map(|j| (j, s.coeff(j).unwrap())).collect()
        }
    };
    Ok(CoeffFamily { kind, values, order })
}

/// A named series by name, for the command line.
pub fn named_series(name: &str, order: i64) -> Result<TruncatedSeries> {
    Ok(match name {
        "h" => h_series(order),
        "eta" => eta_series(order),
        "f" => f_series(order),
        "v" => v_series(order),
        "g" => g_closed_log(order),
        _ => {
            if let Some(m) = name.strip_prefix("G").and_then(|s| s.parse::<i64>().ok()) {
                g_closed(m, order)
            } else if let Some(m) = name.strip_prefix("p").and_then(|s| s.parse::<i64>().ok()) {
                p_m_closed(m, order)
            } else {
                return Err(Error::Parse(format!(
                    "unknown series {name:?}; try h, eta, f, v, g, G<m>, p<m>"
                )));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn first_values() {
        let b = b_coeffs(5);
        assert_eq!(b, vec![r(1, 1), r(1, 1), r(1, 3), r(1, 36), r(-1, 270), r(1, 4320)]);
        let c = c_coeffs(5);
        assert_eq!(&c[..4], &[r(1, 1), r(1, 12), r(1, 288), r(-139, 51840)]);
        let h = h_series(4);
        assert_eq!(h.coeff(2).unwrap(), r(2, 3));
        assert_eq!(h.coeff(3).unwrap(), r(13, 36));
        let e = eta_series(5);
        assert_eq!(e.coeff(5).unwrap(), r(5123, 12960));
    }

    #[test]
    fn c_three_ways() {
        let a = c_coeffs(8);
        assert_eq!(a, c_via_bernoulli(8));
        assert_eq!(a, c_via_d3(8));
    }

    #[test]
    fn eta_two_ways() {
        assert!(eta_series(20).eq_through(&eta_via_log(20), 20).unwrap());
    }

    #[test]
    fn nu_and_gamma_small_m() {
        let nu = named_coeffs(CoeffKind::Nu(-1), 6).unwrap();
        let expect: Vec<Rational> = vec![r(1, 1), r(2, 1), r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1)];
        assert_eq!(nu.values.values().cloned().collect::<Vec<_>>(), expect);
        let g = named_coeffs(CoeffKind::Gamma(-1), 8).unwrap();
        for (j, v) in &g.values {
            if *j >= 1 {
                assert_eq!(*v, Rational::sign_pow(*j));
            }
        }
    }

    #[test]
    fn f_leading_terms() {
        let f = f_series(3);
        assert_eq!(f.coeff(-1).unwrap(), r(1, 1));
        assert_eq!(f.coeff(0).unwrap(), r(2, 3));
    }

    #[test]
    fn a_neg_round_trip() {
        let a = a_neg(10);
        let t = TruncatedSeries::var(Var::Z, 10).exp_derivation(&a, -1, None).unwrap();
        assert!(t.agrees_with(&hurwitz_target(10)));
    }
}
