//! Constructors for the concrete operators. Every constructor taking `big`
//! materialises all terms whose partials have total weight `<= big`.

use crate::exactnum::{bernoulli, binomial, double_factorial_odd, Rational};
use crate::qring::Family;
use crate::series::named::{a_pos, b_coeffs, c_nkm, eta_pow, eta_series, g_closed, gamma_closed};
use crate::series::{TruncatedSeries, Var};
use crate::{Error, Result};

use super::{DiffOperator, Term};

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn idx(k: i64) -> u16 {
    u16::try_from(k).expect("variable index out of range")
}

fn need_m(m: i64, lo: i64, what: &str) -> Result<()> {
    if m < lo {
        Err(Error::Domain(format!("{what} needs m >= {lo}, got {m}")))
    } else {
        Ok(())
    }
}

/// `[z^i] s` for `lo <= i <= hi`.
fn coeffs(s: &TruncatedSeries, lo: i64, hi: i64) -> Vec<(i64, Rational)> {
    (lo..=hi).map(|i| (i, s.coeff(i).expect("series known through hi"))).filter(|(_, c)| !c.is_zero()).collect()
}

fn poly(c: &[i64], order: i64) -> TruncatedSeries {
    TruncatedSeries::new(Var::Z, 0, c.iter().map(|&x| q(x)).collect(), order)
}

/// Multiplication by `c · u^e · Π vars`.
pub fn mult(family: Family, c: Rational, e: i32, vars: &[u16]) -> DiffOperator {
    let mut o = DiffOperator::new(family, format!("mult({c})"));
    o.push(c, Term::new(e, vars, &[]));
    o
}

/// `c · u^e · ∂_k`.
pub fn partial(family: Family, c: Rational, e: i32, k: u16) -> DiffOperator {
    let mut o = DiffOperator::new(family, format!("d{k}"));
    o.push(c, Term::new(e, &[], &[k]));
    o
}

/// `u ∂/∂u`.
pub fn u_du(family: Family) -> DiffOperator {
    let mut o = DiffOperator::new(family, "u*d/du");
    o.push(Rational::one(), Term::du(0, &[]));
    o
}

/// `Σ c_i · u^{e_i} · ∂_{q_i}` from a list, as a finite first order operator.
fn first_order(label: &str, items: impl IntoIterator<Item = (Rational, i32, i64)>, big: i64, floor: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, label);
    for (c, e, k) in items {
        if k >= 1 && k <= big {
            o.push(c, Term::new(e, &[], &[idx(k)]));
        }
    }
    o.complete(big).floor(floor)
}

/// The Virasoro operator `L_m` in the `q` variables.
pub fn l(m: i64, big: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, format!("L{m}"));
    for k in 1.max(1 - m)..=(big - m) {
        o.push(q(k + m), Term::new(0, &[idx(k)], &[idx(k + m)]));
    }
    for a in 1..m {
        o.push(Rational::new(a * (m - a), 2), Term::new(0, &[], &[idx(a), idx(m - a)]));
    }
    for i in 1..-m {
        o.push(Rational::new(1, 2), Term::new(0, &[idx(i), idx(-m - i)], &[]));
    }
    o.complete(big).floor(-m)
}

/// `X_i = Σ_{k>0} (k+i) q_k ∂_{k+i}`.
pub fn x_op(i: i64, big: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, format!("X{i}"));
    for k in 1.max(1 - i)..=(big - i) {
        o.push(q(k + i), Term::new(0, &[idx(k)], &[idx(k + i)]));
    }
    o.complete(big).floor(-i)
}

/// `Y_i = Σ_{a+b=i} ab ∂_a ∂_b`.
pub fn y_op(i: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, format!("Y{i}"));
    for a in 1..i {
        o.push(q(a * (i - a)), Term::new(0, &[], &[idx(a), idx(i - a)]));
    }
    o.floor(-i)
}

/// `α_n`: `q_{-n}` for `n < 0`, `0` for `n = 0`, `n ∂_n` for `n > 0`.
pub fn alpha(n: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, format!("alpha{n}"));
    if n < 0 {
        o.push(Rational::one(), Term::new(0, &[idx(-n)], &[]));
    } else if n > 0 {
        o.push(q(n), Term::new(0, &[], &[idx(n)]));
    }
    o.floor(-n)
}

/// The cut-and-join operator `M_k`, `k <= 0`.
pub fn m_k(k: i64, big: i64) -> Result<DiffOperator> {
    if k > 0 {
        return Err(Error::Domain(format!("M_k is defined for k <= 0, got {k}")));
    }
    let mut o = DiffOperator::new(Family::Q, format!("M{k}"));
    // ½ Σ (i+j+k) q_i q_j ∂_{i+j+k}
    for s in 1..=big {
        for i in 1..(s - k) {
            let j = s - k - i;
            o.push(Rational::new(s, 2), Term::new(0, &[idx(i), idx(j)], &[idx(s)]));
        }
    }
    // ½ Σ ij q_{i+j-k} ∂_i ∂_j
    for t in 2..=big {
        for i in 1..t {
            let j = t - i;
            o.push(Rational::new(i * j, 2), Term::new(0, &[idx(t - k)], &[idx(i), idx(j)]));
        }
    }
    // 1/6 Σ q_i q_j q_l, i+j+l = -k
    for i in 1..=-k {
        for j in 1..=(-k - i) {
            let l = -k - i - j;
            if l >= 1 {
                o.push(Rational::new(1, 6), Term::new(0, &[idx(i), idx(j), idx(l)], &[]));
            }
        }
    }
    Ok(o.complete(big).floor(-k))
}

/// `L^odd_{-k2} = Σ_{j odd} j q_{k2+j} ∂_j + ½ Σ_{i+j=k2, j odd} ij ∂_i ∂_j`, as written.
pub fn lodd(k2: i64, big: i64) -> DiffOperator {
    let mut o = DiffOperator::new(Family::Q, format!("Lodd{}", -k2));
    for j in (1..=big).step_by(2) {
        o.push(q(j), Term::new(0, &[idx(k2 + j)], &[idx(j)]));
    }
    for j in (1..k2).step_by(2) {
        let i = k2 - j;
        o.push(Rational::new(i * j, 2), Term::new(0, &[], &[idx(i), idx(j)]));
    }
    o.complete(big).floor(-k2)
}

/// `E^{(m)} = Σ_j [z^j](η^{2m}) j u^{j-2m} ∂_j`, `m >= 1`.
pub fn e_op(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, 1, "E")?;
    let s = eta_pow(2 * m, big.max(2 * m));
    let items = coeffs(&s, 2 * m, big).into_iter().map(|(j, c)| (c * q(j), (j - 2 * m) as i32, j));
    Ok(first_order(&format!("E({m})"), items, big, -2 * m))
}

/// `ν^{(m)}_i` for `2m <= i <= hi`.
pub fn nu(m: i64, hi: i64) -> Vec<(i64, Rational)> {
    coeffs(&g_closed(m, hi.max(2 * m)), 2 * m, hi)
}

/// `γ^{(m)}_j` for `j <= hi`.
pub fn gamma(m: i64, hi: i64) -> Vec<(i64, Rational)> {
    coeffs(&gamma_closed(m, hi.max(0)), (2 * m + 3).max(1), hi)
}

/// `Σ_i ν_i^{(m)} u^{i-2m} L_i`, with the central `-u²/24` at `m = -1`.
pub fn l_h(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "L^(H)")?;
    let mut parts = vec![];
    for (i, c) in nu(m, big) {
        parts.push(l(i, big).mul_u((i - 2 * m) as i32).scale(&c));
    }
    if m == -1 {
        parts.push(mult(Family::Q, Rational::new(-1, 24), 2, &[]));
    }
    Ok(DiffOperator::sum(Family::Q, &format!("L_H({m})"), parts).complete(big).floor(-2 * m))
}

/// `P^{(H)}_m = Σ_j γ_j^{(m)} j u^{j-2m-3} ∂_j`.
pub fn p_h(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "P^(H)")?;
    let items = gamma(m, big).into_iter().map(|(j, c)| (c * q(j), (j - 2 * m - 3) as i32, j));
    Ok(first_order(&format!("P_H({m})"), items, big, -2 * m - 3))
}

/// `V^{(H)}_m = L^{(H)}_m + P^{(H)}_m + ⅛ δ_{m,0}`.
pub fn v_h(m: i64, big: i64) -> Result<DiffOperator> {
    let mut o = l_h(m, big)?.add(&p_h(m, big)?);
    if m == 0 {
        o = o.add(&mult(Family::Q, Rational::new(1, 8), 0, &[]));
    }
    Ok(o.with_label(format!("V_H({m})")).complete(big).floor(-2 * m - 3))
}

/// `V^{(K)}_{2m} = L_{2m} - (2m+3) ∂_{2m+3} + ⅛ δ_{m,0}`.
pub fn v_k(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "V^(K)")?;
    let mut o = l(2 * m, big);
    if 2 * m + 3 <= big {
        o = o.add(&partial(Family::Q, q(-(2 * m + 3)), 0, idx(2 * m + 3)));
    }
    if m == 0 {
        o = o.add(&mult(Family::Q, Rational::new(1, 8), 0, &[]));
    }
    Ok(o.with_label(format!("V_K({m})")).complete(big).floor(-2 * m - 3))
}

/// `P^{(2)}_m = Σ_{i>=1} (2m+2+i) (-1)^i b_i u^{i-1} ∂_{2m+2+i}`.
pub fn p2(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "P^(2)")?;
    let b = b_coeffs(big.max(2) as usize);
    let items = (1..=big - 2 * m - 2).map(|i| {
        let k = 2 * m + 2 + i;
        (q(k) * Rational::sign_pow(i) * &b[i as usize], (i - 1) as i32, k)
    });
    Ok(first_order(&format!("P2({m})"), items, big, -2 * m - 3))
}

/// `P = -Σ_{k>=1} b_{2k+1} u^{2k} ∂_{2k+3}`.
pub fn p_op(big: i64) -> DiffOperator {
    let b = b_coeffs(big.max(3) as usize);
    let items = (1..).take_while(|k| 2 * k + 3 <= big).map(|k| (-b[(2 * k + 1) as usize].clone(), (2 * k) as i32, 2 * k + 3));
    first_order("P", items, big, -3)
}

/// `U = Σ_{m>0} a_m u^m L_m`.
pub fn u_op(big: i64) -> DiffOperator {
    let a = a_pos(big.max(1));
    let parts = (1..=big).map(|m| l(m, big).mul_u(m as i32).scale(&a[(m - 1) as usize]));
    DiffOperator::sum(Family::Q, "U", parts).complete(big).floor(0)
}

/// `-z^3/(1+z)^3 + z^2 η/(1+z)^2`.
pub fn p_tilde_series(order: i64) -> TruncatedSeries {
    let inv = poly(&[1, 1], order).inverse().expect("invertible");
    let inv2 = inv.mul(&inv).unwrap();
    let inv3 = inv2.mul(&inv).unwrap();
    let a = inv3.shift(3).neg();
    let b = inv2.shift(2).mul(&eta_series(order)).unwrap();
    a.add(&b).unwrap().truncate(order)
}

/// `P̃ = Σ_{i>=3} [z^i](-z^3/(1+z)^3 + z^2 η/(1+z)^2) u^{i-3} ∂_i`.
pub fn p_tilde(big: i64) -> DiffOperator {
    let s = p_tilde_series(big.max(3));
    let items = coeffs(&s, 3, big).into_iter().map(|(i, c)| (c, (i - 3) as i32, i));
    first_order("Ptilde", items, big, -3)
}

/// `Σ_{i>=2} (-1)^i b_i u^{i-1} ∂_{i+2}`: the conjugate of `P̃` by `e^U`.
pub fn p_tilde_prime(big: i64) -> DiffOperator {
    let b = b_coeffs(big.max(2) as usize);
    let items = (2..=big - 2).map(|i| (Rational::sign_pow(i) * &b[i as usize], (i - 1) as i32, i + 2));
    first_order("Ptilde'", items, big, -3)
}

/// `Σ_{k>=0} (-1)^k C(k+2,k) u^{k+s} ∂_{k+3}`.
pub fn binomial_tail(s: i32, big: i64) -> DiffOperator {
    let items = (0..=big - 3).map(|k| (Rational::sign_pow(k) * binomial(k + 2, k), k as i32 + s, k + 3));
    first_order(&format!("tail(u^{s})"), items, big, s as i64 - 3)
}

/// `𝔇^{(H)} = L_0 + u∂_u - 3 Σ_k (-1)^k C(k+2,k) u^k ∂_{k+3} + ⅛`.
pub fn dilaton(big: i64) -> DiffOperator {
    l(0, big)
        .add(&u_du(Family::Q))
        .add(&binomial_tail(0, big).scale(&q(-3)))
        .add(&mult(Family::Q, Rational::new(1, 8), 0, &[]))
        .with_label("D_H")
        .complete(big)
        .floor(-3)
}

/// `Z = Σ_{i>=2} [z^i] z^2/(1+z)^3 u^{i-2} ∂_i`.
pub fn z_op(big: i64) -> DiffOperator {
    let inv = poly(&[1, 1], big.max(2)).inverse().unwrap();
    let s = inv.mul(&inv).unwrap().mul(&inv).unwrap().shift(2).truncate(big.max(2));
    let items = coeffs(&s, 2, big).into_iter().map(|(i, c)| (c, (i - 2) as i32, i));
    first_order("Z", items, big, -2)
}

/// `Σ_i [z^i] s · u^{i+e} α_i` over `lo <= i <= big`.
pub fn alpha_series(label: &str, s: &TruncatedSeries, lo: i64, e: i64, big: i64) -> DiffOperator {
    let mut parts = vec![];
    for (i, c) in coeffs(s, lo, big) {
        if i != 0 {
            parts.push(alpha(i).mul_u((i + e) as i32).scale(&c));
        }
    }
    DiffOperator::sum(Family::Q, label, parts).complete(big).floor(e)
}

/// `⅛ Σ_{i>=-4} [z^i] η^{-4} u^{i+4} α_i`, the closed form of `e^U (⅛ q_4) e^{-U}`.
pub fn q4_conj(big: i64) -> DiffOperator {
    let s = eta_pow(-4, big.max(0)).scale(&Rational::new(1, 8));
    alpha_series("q4conj", &s, -4, 4, big)
}

/// `Σ_{i>=-1} [z^i]((1+z)^2 η / z^2) u^{i+1} L_i`: the closed form of `e^U L_{-1} e^{-U}`.
pub fn l_minus1_conj(big: i64) -> DiffOperator {
    let s = poly(&[1, 2, 1], big + 2).mul(&eta_series(big + 2)).unwrap().shift(-2).truncate(big);
    let parts = coeffs(&s, -1, big).into_iter().map(|(i, c)| l(i, big).mul_u((i + 1) as i32).scale(&c));
    DiffOperator::sum(Family::Q, "e^U L-1 e^-U", parts).complete(big).floor(1)
}

/// Kazarian's `M̃` (no `∂_u` term).
pub fn m_tilde(big: i64) -> Result<DiffOperator> {
    let mut parts = vec![];
    for (k, c, e) in [(0, 1, 0), (-1, 4, -1), (-2, 6, -2), (-3, 4, -3), (-4, 1, -4)] {
        parts.push(m_k(k, big)?.mul_u(e).scale(&q(c)));
    }
    parts.push(l(0, big).mul_u(-3).scale(&Rational::new(-4, 3)));
    parts.push(l(-1, big).mul_u(-4).scale(&q(-1)));
    parts.push(mult(Family::Q, Rational::new(1, 4), -2, &[2]));
    parts.push(mult(Family::Q, Rational::new(1, 3), -3, &[3]));
    parts.push(mult(Family::Q, Rational::new(1, 8), -4, &[4]));
    Ok(DiffOperator::sum(Family::Q, "Mtilde", parts).complete(big).floor(-3))
}

/// `u^4 M̃ - ⅓ u^2 ∂_u`.
pub fn kazarian(big: i64) -> Result<DiffOperator> {
    Ok(m_tilde(big)?
        .mul_u(4)
        .add(&u_du(Family::Q).mul_u(1).scale(&Rational::new(-1, 3)))
        .with_label("Kazarian")
        .complete(big)
        .floor(1))
}

/// `u^{-1} (u^4 M_0 + 4u^3 M_{-1} + 6u^2 M_{-2} + 4u M_{-3} + M_{-4})`, cubic
/// polynomial parts included.
pub fn a3m(big: i64) -> Result<DiffOperator> {
    let mut parts = vec![];
    for (k, c, e) in [(0, 1, 3), (-1, 4, 2), (-2, 6, 1), (-3, 4, 0), (-4, 1, -1)] {
        parts.push(m_k(k, big)?.mul_u(e).scale(&q(c)));
    }
    Ok(DiffOperator::sum(Family::Q, "A3M", parts).complete(big).floor(-1))
}

pub fn a1(big: i64) -> DiffOperator {
    u_du(Family::Q).add(&l(0, big)).scale(&Rational::new(1, 3)).with_label("A1").complete(big)
}

pub fn a2(big: i64) -> DiffOperator {
    l(-1, big).mul_u(-1).add(&l(0, big)).with_label("A2").complete(big)
}

fn a4_cubics() -> DiffOperator {
    mult(Family::Q, Rational::new(2, 3), 0, &[1, 1, 1]).add(&mult(Family::Q, Rational::new(1, 2), -1, &[1, 1, 2]))
}

/// `A_3`: the M-part without its cubic multiplication terms.
pub fn a3(big: i64) -> Result<DiffOperator> {
    Ok(a3m(big)?.sub(&a4_cubics()).with_label("A3"))
}

pub fn a4() -> DiffOperator {
    a4_cubics()
        .add(&mult(Family::Q, Rational::new(1, 4), 1, &[2]))
        .add(&mult(Family::Q, Rational::new(1, 3), 0, &[3]))
        .add(&mult(Family::Q, Rational::new(1, 8), -1, &[4]))
        .with_label("A4")
}

// t-variable operators

fn dfo(k: i64) -> Rational {
    double_factorial_odd(k).expect("odd argument")
}

/// `L̂_m`, the Virasoro constraint of `exp(F_K(t))`.
pub fn l_hat(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "L hat")?;
    let mut o = DiffOperator::new(Family::T, format!("Lhat({m})"));
    for k in m.max(0).max(m)..=(big - 1) / 2 {
        if k - m < 0 {
            continue;
        }
        o.push(dfo(2 * k + 1) / dfo(2 * k - 2 * m - 1), Term::new(0, &[idx(k - m)], &[idx(k)]));
    }
    for k in 0..m {
        let l = m - 1 - k;
        o.push(dfo(2 * k + 1) * dfo(2 * l + 1) / q(2), Term::new(0, &[], &[idx(k), idx(l)]));
    }
    o.push(-dfo(2 * m + 3), Term::new(0, &[], &[idx(m + 1)]));
    if m == -1 {
        o.push(Rational::new(1, 2), Term::new(0, &[0, 0], &[]));
    }
    if m == 0 {
        o.push(Rational::new(1, 8), Term::new(0, &[], &[]));
    }
    Ok(o.complete(big).floor(-2 * m - 3))
}

/// Mumford's `W`, keeping only the terms with `u`-power at most `umax`.
pub fn w_operator(umax: i64, big: i64) -> Result<DiffOperator> {
    let mut o = DiffOperator::new(Family::T, "W");
    let mut k = 1;
    while 4 * k - 2 <= umax {
        let c = -bernoulli(2 * k as usize) / q(2 * k * (2 * k - 1));
        let e = (4 * k - 2) as i32;
        o.push(c.clone(), Term::new(e, &[], &[idx(2 * k)]));
        let mut i = 0;
        while 2 * (i + 2 * k - 1) + 1 <= big {
            o.push(-c.clone(), Term::new(e, &[idx(i)], &[idx(i + 2 * k - 1)]));
            i += 1;
        }
        for i in 0..=(2 * k - 2) {
            let j = 2 * k - 2 - i;
            o.push(&c * &Rational::sign_pow(i) / q(2), Term::new(e, &[], &[idx(i), idx(j)]));
        }
        k += 1;
    }
    Ok(o.complete(big).floor(-3))
}

/// The t-variable constraint `V̂_m` in the form that annihilates `exp(F_H(u,t))`.
pub fn v_hat(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "V hat")?;
    let kmax = (big - 1) / 2;
    let mut o = DiffOperator::new(Family::T, format!("Vhat({m})"));
    for k in m.max(0)..=kmax {
        for i in 0..=(k - m) {
            o.push(c_nkm(i, k, m), Term::new((2 * i) as i32, &[idx(k - m - i)], &[idx(k)]));
        }
    }
    for n in 0..=(kmax + 1 - m).max(0) + kmax {
        for k in 0..(n + m) {
            let l = n + m - 1 - k;
            if 2 * k + 1 + 2 * l + 1 > big {
                continue;
            }
            let c = Rational::sign_pow(n + m - k) * c_nkm(n, k, m) / q(2);
            o.push(c, Term::new((2 * n) as i32, &[], &[idx(k), idx(l)]));
        }
    }
    for k in (m + 1).max(0)..=kmax {
        o.push(-c_nkm(k - m - 1, k, m), Term::new((2 * (k - m - 1)) as i32, &[], &[idx(k)]));
    }
    if m == -1 {
        o.push(Rational::new(-1, 24), Term::new(2, &[], &[]));
        o.push(Rational::new(1, 2), Term::new(0, &[0, 0], &[]));
    }
    if m == 0 {
        o.push(Rational::new(1, 8), Term::new(0, &[], &[]));
    }
    Ok(o.complete(big).floor(-2 * m - 3))
}

/// `V̂_m` exactly as printed: `u^{2(m+i)}` in the first sum, `½(-u^2)^{m+n-1}`
/// on the second order part, no `t_0^2/2`.
pub fn v_hat_literal(m: i64, big: i64) -> Result<DiffOperator> {
    need_m(m, -1, "V hat")?;
    let kmax = (big - 1) / 2;
    let mut o = DiffOperator::new(Family::T, format!("Vhat_literal({m})"));
    for k in m.max(0)..=kmax {
        for i in 0..=(k - m) {
            o.push(c_nkm(i, k, m), Term::new((2 * (m + i)) as i32, &[idx(k - m - i)], &[idx(k)]));
        }
    }
    for n in 0..=(kmax + 1 - m).max(0) + kmax {
        for k in 0..(n + m) {
            let l = n + m - 1 - k;
            if 2 * k + 1 + 2 * l + 1 > big {
                continue;
            }
            let c = Rational::sign_pow(m + n - 1) * c_nkm(n, k, m) / q(2);
            o.push(c, Term::new((2 * (m + n - 1)) as i32, &[], &[idx(k), idx(l)]));
        }
    }
    for k in (m + 1).max(0)..=kmax {
        o.push(-c_nkm(k - m - 1, k, m), Term::new((2 * (k - m - 1)) as i32, &[], &[idx(k)]));
    }
    if m == -1 {
        o.push(Rational::new(-1, 24), Term::new(2, &[], &[]));
    }
    if m == 0 {
        o.push(Rational::new(1, 8), Term::new(0, &[], &[]));
    }
    Ok(o.complete(big).floor(-2 * m - 3))
}

/// Operator names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "L", "M", "X", "Y", "alpha", "Lodd", "E", "L_H", "P_H", "V_H", "V_K", "P2", "P", "U", "Ptilde", "Ptilde_prime",
    "D_H", "Z", "q4conj", "Mtilde", "Kazarian", "A1", "A2", "A3", "A3M", "A4", "Lhat", "W", "Vhat", "Vhat_literal",
];

/// Look an operator up by name, with one integer parameter where needed.
pub fn by_name(name: &str, m: Option<i64>, big: i64) -> Result<DiffOperator> {
    let need = || m.ok_or_else(|| Error::Parse(format!("operator {name} needs --m")));
    Ok(match name {
        "L" => l(need()?, big),
        "M" => m_k(need()?, big)?,
        "X" => x_op(need()?, big),
        "Y" => y_op(need()?),
        "alpha" => alpha(need()?),
        "Lodd" => lodd(-need()?, big),
        "E" => e_op(need()?, big)?,
        "L_H" => l_h(need()?, big)?,
        "P_H" => p_h(need()?, big)?,
        "V_H" => v_h(need()?, big)?,
        "V_K" => v_k(need()?, big)?,
        "P2" => p2(need()?, big)?,
        "P" => p_op(big),
        "U" => u_op(big),
        "Ptilde" => p_tilde(big),
        "Ptilde_prime" => p_tilde_prime(big),
        "D_H" => dilaton(big),
        "Z" => z_op(big),
        "q4conj" => q4_conj(big),
        "Mtilde" => m_tilde(big)?,
        "Kazarian" => kazarian(big)?,
        "A1" => a1(big),
        "A2" => a2(big),
        "A3" => a3(big)?,
        "A3M" => a3m(big)?,
        "A4" => a4(),
        "Lhat" => l_hat(need()?, big)?,
        "W" => w_operator(need().unwrap_or(4 * big), big)?,
        "Vhat" => v_hat(need()?, big)?,
        "Vhat_literal" => v_hat_literal(need()?, big)?,
        _ => return Err(Error::Parse(format!("unknown operator {name:?}; known: {}", NAMES.join(", ")))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qring::Mono;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn e1_first_coefficients() {
        let e = e_op(1, 6).unwrap();
        let get = |j: u16| e.terms().find(|(t, _)| t.partials.as_slice() == [j]).map(|(_, c)| c.clone()).unwrap();
        assert_eq!(get(2), r(2, 1));
        assert_eq!(get(3), r(-4, 1));
        assert_eq!(get(4), r(6, 1));
    }

    #[test]
    fn v_h_minus_one_shape() {
        // L_{-2} + 2u L_{-1} + u^2 L_0 - u^2/24 - Σ (-u)^{j-1} j ∂_j
        let v = v_h(-1, 6).unwrap();
        let want = l(-2, 6)
            .add(&l(-1, 6).mul_u(1).scale(&q(2)))
            .add(&l(0, 6).mul_u(2))
            .add(&mult(Family::Q, r(-1, 24), 2, &[]))
            .add(&first_order("", (1..=6).map(|j| (-Rational::sign_pow(j - 1) * q(j), (j - 1) as i32, j)), 6, -1));
        assert_eq!(v.rows().len(), want.rows().len());
        for (a, b) in v.terms().zip(want.terms()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn constants() {
        let v = v_hat(0, 9).unwrap();
        assert_eq!(v.constant_part(Family::T, 10).coeff(&Mono::one()), r(1, 8));
    }
}
