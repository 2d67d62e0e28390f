//! Worked values that are known independently of this crate's own machinery.

use linhodge::diffop::named;
use linhodge::exec::Mode;
use linhodge::qring::{build_gen_function, phi_poly, Family, GenKind, Mono};
use linhodge::series::named::{b_coeffs, c_coeffs, eta_series};
use linhodge::tables::{build_h_polys, hodge_table_via_recursion, hodge_table_via_w, hurwitz_h01, hurwitz_series, witten_table};
use linhodge::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn mono(u: i32, vars: &[u16]) -> Mono {
    Mono::new(u, vars.iter().copied().collect())
}

#[test]
fn first_coefficients() {
    assert_eq!(b_coeffs(4), vec![r(1, 1), r(1, 1), r(1, 3), r(1, 36), r(-1, 270)]);
    assert_eq!(c_coeffs(3), vec![r(1, 1), r(1, 12), r(1, 288), r(-139, 51840)]);
    let eta = eta_series(3);
    assert_eq!(eta.coeff(1).unwrap(), r(1, 1));
    assert_eq!(eta.coeff(2).unwrap(), r(-2, 3));
}

#[test]
fn phi_polys() {
    let p1 = phi_poly(1, true);
    assert_eq!(p1.coeff(&mono(2, &[1])), r(1, 1));
    assert_eq!(p1.coeff(&mono(1, &[2])), r(2, 1));
    assert_eq!(p1.coeff(&mono(0, &[3])), r(1, 1));
    assert_eq!(p1.terms().count(), 3);
    assert_eq!(phi_poly(2, true).at_u0().coeff(&mono(0, &[5])), r(3, 1));
}

#[test]
fn known_intersection_numbers() {
    let w = witten_table(12).unwrap();
    assert_eq!(w.get(0, 0, &[0, 0, 0]), Some(r(1, 1)));
    assert_eq!(w.get(1, 0, &[1]), Some(r(1, 24)));
    assert_eq!(w.get(2, 0, &[4]), Some(r(1, 1152)));
    // weight 15, past cap 12
    assert_eq!(w.get(3, 0, &[7]), None);
    assert_eq!(witten_table(15).unwrap().get(3, 0, &[7]), Some(r(1, 82944)));
    let h = hodge_table_via_w(9).unwrap();
    assert_eq!(h.get(1, 1, &[0]), Some(r(1, 24)));
    assert_eq!(h.get(2, 1, &[3]), Some(r(1, 480)));
    assert_eq!(h.get(2, 2, &[2]), Some(r(7, 5760)));
    // lambda classes vanish in genus 0
    assert!(h.entries.iter().all(|((g, j, _), v)| *g > 0 || *j == 0 || v.is_zero()));
}

#[test]
fn generating_functions_at_cap_3() {
    let w = witten_table(3).unwrap();
    let fk = build_gen_function(GenKind::FKq, 3, &w).unwrap().body;
    assert_eq!(fk.coeff(&mono(0, &[1, 1, 1])), r(1, 6));
    assert_eq!(fk.coeff(&mono(0, &[3])), r(1, 24));
    let h = hodge_table_via_w(3).unwrap();
    let ft = build_gen_function(GenKind::FHt, 3, &h).unwrap().body;
    assert_eq!(ft.coeff(&mono(0, &[1])), r(1, 24));
    assert_eq!(ft.coeff(&mono(2, &[0])), r(-1, 24));
}

#[test]
fn operator_shapes() {
    let e = named::e_op(1, 6).unwrap();
    let coef = |j: u16| e.terms().find(|(t, _)| t.partials.as_slice() == [j]).map(|(_, c)| c.clone()).unwrap();
    // j [z^j] eta^2: 2*1, 3*(-4/3), 4*(3/2)
    assert_eq!((coef(2), coef(3), coef(4)), (r(2, 1), r(-4, 1), r(6, 1)));
    let v = named::v_hat(0, 5).unwrap();
    let constant: Rational = v.terms().filter(|(t, _)| t.mult.is_empty() && t.partials.is_empty() && t.u == 0 && !t.du).map(|(_, c)| c.clone()).sum();
    assert_eq!(constant, r(1, 8));
}

#[test]
fn annihilation_at_cap_9() {
    let h = hodge_table_via_w(9).unwrap();
    let f = build_gen_function(GenKind::FHq, 9, &h).unwrap().body;
    let c = named::v_h(-1, 14).unwrap().cofactor(&f, Mode::Sequential).unwrap();
    assert!(c.poly.is_zero());
    assert!(c.provable >= 8);
    let fk = build_gen_function(GenKind::FKq, 9, &witten_table(9).unwrap()).unwrap().body;
    assert!(named::v_k(0, 14).unwrap().cofactor(&fk, Mode::Sequential).unwrap().poly.is_zero());
    assert_eq!(f.family, Family::Q);
}

#[test]
fn h_polys_small() {
    let t = hodge_table_via_w(9).unwrap();
    let h03 = build_h_polys(0, 3, &t).unwrap();
    assert_eq!(h03.to_string(), "(1)*z1*z2*z3");
    // (1/24)(z + 2z^2 + z^3) - (1/24) z
    let h11 = build_h_polys(1, 1, &t).unwrap();
    assert_eq!(h11.to_string(), "(1/12)*z1^2 + (1/24)*z1^3");
}

#[test]
fn recursion_reproduces_initial_data() {
    let t = hodge_table_via_recursion(6).unwrap();
    assert_eq!(t.get(1, 0, &[1]), Some(r(1, 24)));
    assert_eq!(t.get(1, 1, &[0]), Some(r(1, 24)));
    assert_eq!(t.get(0, 0, &[0, 0, 0, 1]), Some(r(1, 1)));
}

#[test]
fn hurwitz_genus_zero_part() {
    // the beta^(b-1) q_b coefficients of H agree with b^(b-2)/b!
    let h = hurwitz_series(3, 4).unwrap().body;
    let h01 = hurwitz_h01(3, 4);
    for (m, c) in h01.terms() {
        assert_eq!(&h.coeff(m), c, "{}", m.render(Family::Q));
    }
    assert_eq!(h.coeff(&mono(0, &[1])), r(1, 1));
    assert_eq!(h.coeff(&mono(2, &[3])), r(1, 2));
}
