//! Weierstrass division of truncated power series over test rings.
//!
//! A series `F ∈ A[[t]]` whose residue modulo the maximal ideal `m` has order
//! `d` factors uniquely as `F = q·u` with `q` monic of degree `d`,
//! `q ≡ t^d (mod m)` and `u` a unit. The monic factor is found by induction
//! along `m ⊃ m² ⊃ … ⊃ m^a = 0`: each stage corrects `q` by an element of
//! `m^j`, read off from the remainder of `F` modulo the current `q`.
//!
//! Precision: the truncated input is read as a polynomial. If `T ≥ a·d`
//! then `t^T` is divisible by `q` in `A[[t]]`, so the tail beyond `t^T` does
//! not affect `q`. Operations require the documented, slightly more
//! conservative `T ≥ a·d + 1` and fail with `insufficient-truncation` below it.

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::TruncSeries;
use crate::upoly::UPoly;

/// `F = q·u` with `q` a Weierstrass polynomial of degree `d` and `u` a unit.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassFactorization {
    pub q: UPoly,
    pub u: TruncSeries,
    pub d: usize,
}

/// Minimum truncation order accepted for a series of residue order `d` over a
/// ring of nilpotency order `a`.
pub fn required_precision(a: u32, d: usize) -> usize {
    a as usize * d + 1
}

pub fn weierstrass_divide(f: &TruncSeries) -> Result<WeierstrassFactorization> {
    let ring = f.ring();
    let a = ring.nilpotency();
    let d = f.residue_order().ok_or(Error::ResidueIsZero)?;
    let needed = required_precision(a, d);
    if f.precision() < needed {
        return Err(Error::InsufficientTruncation { needed, available: f.precision() });
    }
    let fp = f.to_upoly();
    let mut q = UPoly::monomial(ring.one(), d);
    // After stage j the remainder lies in m^j, so a stages suffice.
    for _ in 0..=a {
        let (h, rem) = fp.div_rem(&q)?;
        if rem.is_zero() {
            debug_assert!(q.residue() == UPoly::monomial(ring.residue_field().one(), d));
            return Ok(WeierstrassFactorization { q, u: TruncSeries::from_upoly(&h, f.precision()), d });
        }
        if d == 0 {
            unreachable!("division by 1 leaves no remainder");
        }
        let h_inv = TruncSeries::from_upoly(&h, d).inverse()?;
        let correction = TruncSeries::from_upoly(&rem, d).mul_ref(&h_inv);
        q = q.add_ref(&correction.to_upoly());
    }
    unreachable!("Weierstrass correction did not terminate within the nilpotency order")
}

/// Long division `g = q·h + rem`, `deg rem < deg q`, of a polynomial by a
/// monic polynomial.
pub fn divide_with_remainder(g: &UPoly, q: &UPoly) -> Result<(UPoly, UPoly)> {
    if !q.is_monic() {
        return Err(Error::PreconditionViolated(format!("divisor {q} is not monic")));
    }
    g.div_rem(q)
}

/// Division of a truncated series by a Weierstrass polynomial `q`
/// (monic, `q ≡ t^d mod m`). The remainder is exact; the quotient is known
/// modulo `t^(T - a·d)`.
pub fn divide_series_with_remainder(g: &TruncSeries, q: &UPoly) -> Result<(TruncSeries, UPoly)> {
    let d = q.degree().unwrap_or(0);
    if !q.is_monic() {
        return Err(Error::PreconditionViolated(format!("divisor {q} is not monic")));
    }
    let k = q.ring().residue_field();
    if q.residue() != UPoly::monomial(k.one(), d) {
        return Err(Error::PreconditionViolated(format!("{q} is not congruent to t^{d} modulo m")));
    }
    let a = g.ring().nilpotency() as usize;
    let needed = a * d + 1;
    if g.precision() < needed {
        return Err(Error::InsufficientTruncation { needed, available: g.precision() });
    }
    let (h, rem) = g.to_upoly().div_rem(q)?;
    Ok((TruncSeries::from_upoly(&h, g.precision() - a * d), rem))
}

/// Factorization `x = (t - α)·u` of a deformation of `t`:
/// `α ∈ m`, `u ∈ 1 + m[[t]]`.
pub fn factor_arc(x: &TruncSeries) -> Result<(Scalar, TruncSeries)> {
    let residue_is_t = x
        .coeffs()
        .iter()
        .enumerate()
        .all(|(i, c)| if i == 1 { c.residue().is_one() } else { c.in_maximal_ideal() });
    if !residue_is_t || x.precision() < 2 {
        return Err(Error::WrongResidue(format!("{x} does not reduce to t modulo m")));
    }
    let w = weierstrass_divide(x)?;
    debug_assert_eq!(w.d, 1);
    Ok((w.q.coeff(0).neg_ref(), w.u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, parse_ring};
    use crate::scalar::ScalarRing;

    fn series(text: &str, ring: &ScalarRing, precision: usize) -> TruncSeries {
        let p = UPoly::from_mpoly(&parse_poly(text, &["t"], ring).unwrap()).unwrap();
        TruncSeries::from_upoly(&p, precision)
    }

    fn up(text: &str, ring: &ScalarRing) -> UPoly {
        UPoly::from_mpoly(&parse_poly(text, &["t"], ring).unwrap()).unwrap()
    }

    #[test]
    fn field_case_is_monomial() {
        let q = ScalarRing::rationals();
        let w = weierstrass_divide(&series("t^2", &q, 4)).unwrap();
        assert_eq!(w.q, up("t^2", &q));
        assert!(w.u.is_one());
        assert_eq!(w.d, 2);
    }

    #[test]
    fn dual_number_example() {
        // (t^2 + e)(1 + e t) = t^2 + e t^3 + e, checked by hand with e^2 = 0.
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let w = weierstrass_divide(&series("t^2 + e*t^3 + e", &r, 6)).unwrap();
        assert_eq!(w.q, up("t^2 + e", &r));
        assert_eq!(w.u, series("1 + e*t", &r, 6));
    }

    #[test]
    fn residue_zero_rejected() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        assert_eq!(weierstrass_divide(&series("e + e*t", &r, 4)), Err(Error::ResidueIsZero));
    }

    #[test]
    fn insufficient_truncation() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let err = weierstrass_divide(&series("t^2 + e", &r, 4)).unwrap_err();
        assert_eq!(err, Error::InsufficientTruncation { needed: 5, available: 4 });
    }

    #[test]
    fn polynomial_long_division() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let (h, rem) = divide_with_remainder(&up("t^2 + 1", &r), &up("t + e", &r)).unwrap();
        assert_eq!((h, rem), (up("t - e", &r), up("1", &r)));
        let (h, rem) = divide_with_remainder(&up("t^3", &r), &up("t^2", &r)).unwrap();
        assert_eq!((h, rem), (up("t", &r), UPoly::zero(&r)));
        assert!(divide_with_remainder(&up("t^3", &r), &up("2*t", &r)).is_err());
    }

    #[test]
    fn series_division_precision() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let (h, rem) = divide_series_with_remainder(&series("t^3 + t", &r, 6), &up("t + e", &r)).unwrap();
        assert_eq!(h.precision(), 4);
        assert_eq!(rem, up("-e", &r));
        assert!(divide_series_with_remainder(&series("t", &r, 2), &up("t + e", &r)).is_err());
        assert!(divide_series_with_remainder(&series("t", &r, 6), &up("t + 1", &r)).is_err());
    }

    #[test]
    fn arc_factorizations() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let e = r.generator(0);
        let (alpha, u) = factor_arc(&series("t + e", &r, 5)).unwrap();
        assert_eq!(alpha, e.neg_ref());
        assert!(u.is_one());
        let (alpha, u) = factor_arc(&series("t", &r, 5)).unwrap();
        assert!(alpha.is_zero() && u.is_one());
        let (alpha, u) = factor_arc(&series("t + e*t^2", &r, 5)).unwrap();
        assert!(alpha.is_zero());
        assert_eq!(u, series("1 + e*t", &r, 5));
        assert!(matches!(factor_arc(&series("2*t", &r, 5)), Err(Error::WrongResidue(_))));
        assert!(matches!(factor_arc(&series("t^2", &r, 5)), Err(Error::WrongResidue(_))));
    }
}
