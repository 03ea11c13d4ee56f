use std::sync::Arc;

use proptest::prelude::*;

use newton_arcs::algebra::Algebra;
use newton_arcs::modq::ModQ;
use newton_arcs::mpoly::{MPoly, Monomial};
use newton_arcs::parse::{parse_poly, parse_ring};
use newton_arcs::scalar::{Scalar, ScalarRing};
use newton_arcs::series::TruncSeries;
use newton_arcs::system::SystemF;
use newton_arcs::upoly::UPoly;
use newton_arcs::weierstrass::weierstrass_divide;
use newton_arcs::zr::{check_membership, forget, lift_independence_check, newton_inverse, ZrPoint};

fn ring(text: &str) -> ScalarRing {
    parse_ring(text).unwrap()
}

/// Scalar with the given coordinates in the monomial basis of `k`.
fn scalar(k: &ScalarRing, cs: &[i64]) -> Scalar {
    let mut s = k.zero();
    for (exps, c) in k.basis().iter().zip(cs) {
        let mut m = k.from_i64(*c);
        for (i, e) in exps.iter().enumerate() {
            m = m.mul_ref(&k.generator(i).pow(*e));
        }
        s = s.add_ref(&m);
    }
    s
}

fn up(text: &str, k: &ScalarRing) -> UPoly {
    UPoly::from_mpoly(&parse_poly(text, &["t"], k).unwrap()).unwrap()
}

fn upoly(k: &ScalarRing, cs: &[Vec<i64>]) -> UPoly {
    UPoly::from_coeffs(k, cs.iter().map(|c| scalar(k, c)).collect())
}

fn coords(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

const TEST_RINGS: [&str; 4] = ["QQ[e]/(e^3)", "GF(5)[e1,e2]/(e1^2,e2^2)", "QQ[e1,e2]/(e1^2,e1*e2,e2^3)", "GF(2)[e]/(e^2)"];

fn ring_axioms<T: Algebra>(a: &T, b: &T, c: &T) {
    assert_eq!(a.add_ref(b), b.add_ref(a));
    assert_eq!(a.mul_ref(b), b.mul_ref(a));
    assert_eq!(a.add_ref(b).add_ref(c), a.add_ref(&b.add_ref(c)));
    assert_eq!(a.mul_ref(b).mul_ref(c), a.mul_ref(&b.mul_ref(c)));
    assert_eq!(a.mul_ref(&b.add_ref(c)), a.mul_ref(b).add_ref(&a.mul_ref(c)));
    assert_eq!(a.mul_ref(&a.one_like()), *a);
    assert!(a.sub_ref(a).is_zero());
    assert!(a.add_ref(&a.neg_ref()).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_ring_axioms(i in 0..TEST_RINGS.len(), a in coords(8), b in coords(8), c in coords(8)) {
        let k = ring(TEST_RINGS[i]);
        let (a, b, c) = (scalar(&k, &a), scalar(&k, &b), scalar(&k, &c));
        ring_axioms(&a, &b, &c);
        if a.is_unit() {
            prop_assert!(a.mul_ref(&a.inverse().unwrap()).is_one());
        } else {
            prop_assert!(a.inverse().is_none());
            prop_assert!(a.pow(k.nilpotency()).is_zero());
        }
    }

    #[test]
    fn mpoly_ring_axioms(terms in prop::collection::vec((0u32..3, 0u32..3, coords(3)), 0..5)) {
        let k = ring("QQ[e]/(e^3)");
        let vars = Arc::new(vec!["x".to_string(), "y".to_string()]);
        let p = MPoly::from_terms(&k, &vars, terms.iter().map(|(i, j, c)| (Monomial(vec![*i, *j]), scalar(&k, c))));
        let x = MPoly::var(&k, &vars, 0);
        let y = MPoly::var(&k, &vars, 1).add_ref(&MPoly::constant(&k, &vars, k.generator(0)));
        ring_axioms(&p, &x, &y);
        let text = p.to_string();
        prop_assert_eq!(parse_poly(&text, &["x", "y"], &k).unwrap(), p.clone());
        let dx = p.mul_ref(&x).derivative(0);
        prop_assert_eq!(dx, p.derivative(0).mul_ref(&x).add_ref(&p));
    }

    #[test]
    fn modq_ring_axioms(a in prop::collection::vec(coords(3), 0..7), b in prop::collection::vec(coords(3), 0..7), r in 1u32..4) {
        let k = ring("QQ[e]/(e^3)");
        let q = up("t^2 + e*t + e^2", &k);
        let (pa, pb) = (upoly(&k, &a), upoly(&k, &b));
        let ma = ModQ::new(&q, r, &pa).unwrap();
        let mb = ModQ::new(&q, r, &pb).unwrap();
        ring_axioms(&ma, &mb, &ma.add_ref(&mb.one_like()));
        prop_assert_eq!(ma.mul_ref(&mb), ModQ::new(&q, r, &pa.mul_ref(&pb)).unwrap());
        let shifted = ma.reduce_to(r - 1).mul_by_q();
        prop_assert_eq!(shifted.div_by_q().unwrap(), ma.reduce_to(r - 1));
        if ma.is_unit() {
            prop_assert!(ma.mul_ref(&ma.inverse().unwrap()).is_one());
        }
    }

    #[test]
    fn weierstrass_factors_reproduce_the_series(d in 0usize..4, a in prop::collection::vec(coords(3), 8), u0 in 1i64..4) {
        let k = ring("QQ[e]/(e^3)");
        let precision = 3 * d + 2;
        // residue of order d: maximal-ideal coefficients below t^d, a unit at t^d
        let mut cs: Vec<Scalar> = a.iter().take(precision).map(|c| scalar(&k, &[0, c[1], c[2]])).collect();
        cs.resize(precision, k.zero());
        cs[d] = cs[d].add_ref(&k.from_i64(u0));
        for (i, c) in a.iter().enumerate().take(precision).skip(d + 1) {
            cs[i] = cs[i].add_ref(&k.from_i64(c[0]));
        }
        let f = TruncSeries::new(&k, cs, precision);
        let w = weierstrass_divide(&f).unwrap();
        prop_assert_eq!(w.d, d);
        prop_assert!(w.q.is_monic());
        prop_assert_eq!(w.q.residue(), UPoly::monomial(k.residue_field().one(), d));
        prop_assert_eq!(w.u.mul_upoly(&w.q), f);
    }
}

fn systems() -> Vec<Arc<SystemF>> {
    let q = ScalarRing::rationals();
    let e = ring("QQ[e]/(e^2)");
    vec![
        SystemF::parse(&q, 1, 1, &["y^2 - x"]).unwrap(),
        SystemF::parse(&q, 1, 1, &["y^3 - x^2*y + x"]).unwrap(),
        SystemF::parse(&q, 2, 2, &["y1^2 - x1*y2", "y2^2 + y1*y2 - x2"]).unwrap(),
        SystemF::parse(&q, 1, 3, &["y1*y2 - x", "y2^2 - y3", "y3*y1 + x*y2"]).unwrap(),
        SystemF::parse(&e, 1, 2, &["y1^2 - e*y2 - x", "y2^2 - x*y1"]).unwrap(),
    ]
}

#[test]
fn adjugate_times_jacobian_is_q() {
    for s in systems() {
        let c = s.c();
        let id = newton_arcs::matrix::SquareMatrix::identity_like(s.q(), c.size());
        let expected = id.scale(s.q());
        assert_eq!(s.c_hat().mul(c), expected, "{s:?}");
        assert_eq!(c.mul(s.c_hat()), expected, "{s:?}");
    }
}

#[test]
fn parabola_jacobian_values() {
    let s = &systems()[0];
    assert_eq!(s.q().to_string(), "2*y");
    assert_eq!(s.df_dx()[0][0].to_string(), "-1");
}

fn parabola_point(r: u32, q: &str, x: &str, y: &str) -> ZrPoint {
    let k = ScalarRing::rationals();
    let s = SystemF::parse(&k, 1, 1, &["y^2 - x"]).unwrap();
    ZrPoint::new(&s, r, up(q, &k), &[up(x, &k)], &[up(y, &k)]).unwrap()
}

#[test]
fn membership_is_stable_under_reduction() {
    // y = q·w and x = y^2, so every level is a point
    let cases = [("t", "t + t^2"), ("t^2 + 1", "(t^2 + 1)*(1 + t)"), ("t - 1", "(t - 1)*(2 - t^3)"), ("t^3 - 2*t", "(t^3 - 2*t)*3")];
    for (q, y) in cases {
        let x = format!("({y})^2");
        let p = parabola_point(5, q, &x, y);
        assert!(check_membership(&p).pass, "{q}");
        for level in 2..5 {
            let low = p.reduce_to_level(level).unwrap();
            assert_eq!(low.r(), level);
            assert!(check_membership(&low).pass, "{q}: level {level}");
        }
    }
}

#[test]
fn membership_failures_are_named() {
    let zero_y = check_membership(&parabola_point(3, "t", "t^2", "0"));
    let names: Vec<_> = zero_y.failed.iter().map(|c| c.name()).collect();
    assert!(names.contains(&"quotient-invertible"), "{names:?}");
    assert!(!zero_y.pass);
    let shifted = check_membership(&parabola_point(3, "t", "t^2 + t", "t"));
    assert!(shifted.failed.iter().any(|c| c.name() == "equations-vanish"));
}

#[test]
fn lift_independence() {
    let k = ScalarRing::rationals();
    let p = parabola_point(3, "t", "t^2", "t");
    assert!(lift_independence_check(&p, &[up("t", &k)], &[up("t - 5*t^2 + t^7", &k)]).unwrap());
    let p = parabola_point(3, "t - 1", "(t - 1)^2", "t - 1");
    assert!(lift_independence_check(&p, &[up("t - 1", &k)], &[up("t - 1 + (t - 1)^2*t^3", &k)]).unwrap());
}

#[test]
fn forget_examples() {
    let k = ScalarRing::rationals();
    let p = parabola_point(4, "t", "t^2 + t^3", "t + 1/2*t^2");
    let e = forget(&p).unwrap();
    assert_eq!(e.r(), 3);
    assert_eq!(e.xbar_reps(), vec![up("t^2 + t^3", &k)]);
    assert_eq!(e.ybar_reps(), vec![up("t", &k)]);
    assert_eq!(newton_inverse(&e).unwrap(), p);
}

#[test]
fn division_examples() {
    let k = ring("QQ[e]/(e^2)");
    let (h, rem) = newton_arcs::weierstrass::divide_with_remainder(&up("t^3 + e*t + 1", &k), &up("t^2 + e", &k)).unwrap();
    assert_eq!(h, up("t", &k));
    assert_eq!(rem, up("1", &k));
    assert!(newton_arcs::weierstrass::divide_with_remainder(&up("t^3", &k), &up("2*t^2", &k)).is_err());

    let x = TruncSeries::from_upoly(&up("t + e + e*t^2", &k), 5);
    let (alpha, u) = newton_arcs::weierstrass::factor_arc(&x).unwrap();
    assert_eq!(alpha, scalar(&k, &[0, -1]));
    assert_eq!(u.mul_upoly(&UPoly::from_coeffs(&k, vec![alpha.neg_ref(), k.one()])), x);
    assert!(newton_arcs::weierstrass::factor_arc(&TruncSeries::from_upoly(&up("t^2", &k), 5)).is_err());
}
