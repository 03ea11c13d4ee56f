use std::fmt;
use std::sync::Arc;

use crate::algebra::{forward_ops, Algebra};
use crate::error::{Error, Result};
use crate::mpoly::{MPoly, Monomial};
use crate::scalar::{Scalar, ScalarRing};

/// Dense univariate polynomial in `t` over a [`ScalarRing`]; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UPoly {
    ring: ScalarRing,
    coeffs: Vec<Scalar>,
}

impl UPoly {
    pub fn zero(ring: &ScalarRing) -> Self {
        UPoly { ring: ring.clone(), coeffs: Vec::new() }
    }

    pub fn one(ring: &ScalarRing) -> Self {
        Self::constant(ring.one())
    }

    pub fn constant(c: Scalar) -> Self {
        let ring = c.ring().clone();
        Self::from_coeffs(&ring, vec![c])
    }

    /// `c * t^k`.
    pub fn monomial(c: Scalar, k: usize) -> Self {
        let ring = c.ring().clone();
        let mut coeffs = vec![ring.zero(); k];
        coeffs.push(c);
        Self::from_coeffs(&ring, coeffs)
    }

    /// The polynomial `t`.
    pub fn t(ring: &ScalarRing) -> Self {
        Self::monomial(ring.one(), 1)
    }

    pub fn from_coeffs(ring: &ScalarRing, mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { ring: ring.clone(), coeffs }
    }

    pub fn from_ints(ring: &ScalarRing, coeffs: &[i64]) -> Self {
        Self::from_coeffs(ring, coeffs.iter().map(|&c| ring.from_i64(c)).collect())
    }

    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    /// Coefficients, constant term first.
    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(self.ring.zero(), |acc, c| acc.mul_ref(x).add_ref(c))
    }

    /// Coefficientwise image in the residue field.
    pub fn residue(&self) -> UPoly {
        let k = self.ring.residue_field();
        UPoly::from_coeffs(&k, self.coeffs.iter().map(Scalar::residue).collect())
    }

    pub fn change_ring(&self, ring: &ScalarRing) -> Result<UPoly> {
        let coeffs = self.coeffs.iter().map(|c| c.coerce_into(ring)).collect::<Result<_>>()?;
        Ok(UPoly::from_coeffs(ring, coeffs))
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: usize) -> UPoly {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = vec![self.ring.zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UPoly { ring: self.ring.clone(), coeffs }
    }

    /// Drop all terms of degree `>= n`.
    pub fn truncate(&self, n: usize) -> UPoly {
        UPoly::from_coeffs(&self.ring, self.coeffs.iter().take(n).cloned().collect())
    }

    pub fn scale_by(&self, c: &Scalar) -> UPoly {
        UPoly::from_coeffs(&self.ring, self.coeffs.iter().map(|a| a.mul_ref(c)).collect())
    }

    /// Division with remainder by a divisor whose leading coefficient is a unit.
    pub fn div_rem(&self, d: &UPoly) -> Result<(UPoly, UPoly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = d.coeffs[dd]
            .inverse()
            .ok_or_else(|| Error::NotAUnit(format!("leading coefficient of {d}")))?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((UPoly::zero(&self.ring), self.clone()));
        }
        let mut quot = vec![self.ring.zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i].mul_ref(&lc_inv);
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[i - dd + j] = rem[i - dd + j].sub_ref(&c.mul_ref(dc));
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        Ok((UPoly::from_coeffs(&self.ring, quot), UPoly::from_coeffs(&self.ring, rem)))
    }

    /// Quotient of an exact division; fails with `not-divisible` otherwise.
    pub fn exact_div(&self, d: &UPoly) -> Result<UPoly> {
        let (q, r) = self.div_rem(d)?;
        if !r.is_zero() {
            return Err(Error::NotDivisible(format!("{self} by {d}")));
        }
        Ok(q)
    }

    /// Extended Euclid over a field: `(g, s)` with `s*self ≡ g (mod other)`,
    /// `g` monic gcd.
    pub fn ext_gcd_field(&self, other: &UPoly) -> Result<(UPoly, UPoly)> {
        if !self.ring.is_field() {
            return Err(Error::InvalidInput("extended gcd needs a field".into()));
        }
        let (mut r0, mut r1) = (other.clone(), self.clone());
        let (mut s0, mut s1) = (UPoly::zero(&self.ring), UPoly::one(&self.ring));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let s = s0.sub_ref(&q.mul_ref(&s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        if r0.is_zero() {
            return Ok((r0, s0));
        }
        let lc = r0.coeffs.last().expect("nonzero").inverse().expect("field");
        Ok((r0.scale_by(&lc), s0.scale_by(&lc)))
    }

    pub fn to_mpoly(&self, var: &str) -> MPoly {
        let vars = Arc::new(vec![var.to_string()]);
        MPoly::from_terms(
            &self.ring,
            &vars,
            self.coeffs.iter().enumerate().map(|(i, c)| (Monomial(vec![i as u32]), c.clone())).collect::<Vec<_>>(),
        )
    }

    /// Inverse of [`UPoly::to_mpoly`]; the polynomial must have exactly one variable.
    pub fn from_mpoly(p: &MPoly) -> Result<UPoly> {
        if p.nvars() != 1 {
            return Err(Error::VariableMismatch(format!("expected a univariate polynomial, got {}", p)));
        }
        let deg = p.degree_in(0) as usize;
        let mut coeffs = vec![p.ring().zero(); deg + 1];
        for (m, c) in p.terms() {
            coeffs[m.0[0] as usize] = c.clone();
        }
        Ok(UPoly::from_coeffs(p.ring(), coeffs))
    }
}

impl Algebra for UPoly {
    fn zero_like(&self) -> Self {
        UPoly::zero(&self.ring)
    }

    fn one_like(&self) -> Self {
        UPoly::one(&self.ring)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "univariate polynomial rings differ");
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add_ref(&other.coeff(i))).collect();
        UPoly::from_coeffs(&self.ring, coeffs)
    }

    fn sub_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "univariate polynomial rings differ");
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub_ref(&other.coeff(i))).collect();
        UPoly::from_coeffs(&self.ring, coeffs)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "univariate polynomial rings differ");
        if self.is_zero() || other.is_zero() {
            return self.zero_like();
        }
        let mut coeffs = vec![self.ring.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        UPoly::from_coeffs(&self.ring, coeffs)
    }

    fn neg_ref(&self) -> Self {
        UPoly { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(Scalar::neg_ref).collect() }
    }

    fn from_scalar_like(&self, c: &Scalar) -> Self {
        UPoly::constant(c.coerce_into(&self.ring).expect("scalar coercion"))
    }

    fn compatible(&self, other: &Self) -> bool {
        self.ring == other.ring
    }
}

forward_ops!(UPoly);

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_mpoly("t"))
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, parse_ring};

    fn up(text: &str, ring: &ScalarRing) -> UPoly {
        UPoly::from_mpoly(&parse_poly(text, &["t"], ring).unwrap()).unwrap()
    }

    #[test]
    fn long_division_over_dual_numbers() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let (h, rem) = up("t^2 + 1", &r).div_rem(&up("t + e", &r)).unwrap();
        assert_eq!(h, up("t - e", &r));
        assert_eq!(rem, up("1", &r));
    }

    #[test]
    fn division_identities() {
        let q = ScalarRing::rationals();
        let (h, rem) = up("t^3", &q).div_rem(&up("t^2", &q)).unwrap();
        assert_eq!((h, rem), (up("t", &q), UPoly::zero(&q)));
        let g = up("t^2 + 3*t - 1", &q);
        let (h, rem) = g.div_rem(&g).unwrap();
        assert!(h.is_one() && rem.is_zero());
    }

    #[test]
    fn ext_gcd_gives_inverse() {
        let f7 = ScalarRing::prime_field(7).unwrap();
        let a = up("t + 3", &f7);
        let m = up("t^3 + 1", &f7);
        let (g, s) = a.ext_gcd_field(&m).unwrap();
        assert!(g.is_one());
        let (_, rem) = (&s * &a).div_rem(&m).unwrap();
        assert!(rem.is_one());
    }
}
