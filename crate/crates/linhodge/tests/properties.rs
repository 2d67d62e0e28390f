//! Round trips on random truncated series.

use linhodge::series::{TruncatedSeries, Var};
use linhodge::Rational;
use proptest::prelude::*;

const N: i64 = 10;

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..10, 1i64..7), (N - 1) as usize)
}

/// `z + c_2 z^2 + ...`
fn tangent(cs: &[(i64, i64)]) -> TruncatedSeries {
    let mut terms = vec![(1, Rational::from_int(1))];
    terms.extend(cs.iter().enumerate().map(|(i, &(p, q))| (i as i64 + 2, Rational::new(p, q))));
    TruncatedSeries::from_terms(Var::Z, &terms, N)
}

proptest! {
    #[test]
    fn reversion_composes_to_identity(cs in coeffs()) {
        let f = tangent(&cs);
        let g = f.comp_inverse().unwrap();
        prop_assert!(f.compose(&g).unwrap().agrees_with(&TruncatedSeries::var(Var::Z, N)));
    }

    #[test]
    fn exp_undoes_log(cs in coeffs()) {
        let f = tangent(&cs).derivative();
        prop_assert!(f.log().unwrap().exp().unwrap().agrees_with(&f));
    }

    #[test]
    fn derivation_coefficients_round_trip(cs in coeffs(), sign in prop::sample::select(vec![-1i64, 1])) {
        let f = tangent(&cs);
        let a = f.solve_derivation_coeffs(sign).unwrap();
        let back = TruncatedSeries::var(Var::Z, N).exp_derivation(&a, sign, None).unwrap();
        prop_assert!(back.agrees_with(&f));
    }
}
