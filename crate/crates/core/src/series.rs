use std::fmt;

use crate::algebra::{forward_ops, Algebra};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarRing};
use crate::upoly::UPoly;

/// Power series in `t` known modulo `t^T`.
///
/// Binary operations truncate to the smaller of the two precisions; nothing
/// ever extends precision implicitly.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    ring: ScalarRing,
    coeffs: Vec<Scalar>,
}

impl TruncSeries {
    /// Series with the given leading coefficients, zero-padded or cut to `precision`.
    pub fn new(ring: &ScalarRing, mut coeffs: Vec<Scalar>, precision: usize) -> Self {
        assert!(precision > 0, "truncation order must be positive");
        coeffs.truncate(precision);
        coeffs.resize(precision, ring.zero());
        TruncSeries { ring: ring.clone(), coeffs }
    }

    pub fn zero(ring: &ScalarRing, precision: usize) -> Self {
        Self::new(ring, Vec::new(), precision)
    }

    pub fn from_upoly(p: &UPoly, precision: usize) -> Self {
        Self::new(p.ring(), p.coeffs().to_vec(), precision)
    }

    pub fn from_ints(ring: &ScalarRing, coeffs: &[i64], precision: usize) -> Self {
        Self::new(ring, coeffs.iter().map(|&c| ring.from_i64(c)).collect(), precision)
    }

    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    /// The known coefficients read as a polynomial (zero tail).
    pub fn to_upoly(&self) -> UPoly {
        UPoly::from_coeffs(&self.ring, self.coeffs.clone())
    }

    pub fn with_precision(&self, precision: usize) -> Result<Self> {
        if precision > self.precision() {
            return Err(Error::InsufficientTruncation { needed: precision, available: self.precision() });
        }
        Ok(Self::new(&self.ring, self.coeffs.clone(), precision))
    }

    /// Order of vanishing modulo the maximal ideal; `None` if every known
    /// coefficient lies in the maximal ideal.
    pub fn residue_order(&self) -> Option<usize> {
        self.coeffs.iter().position(Scalar::is_unit)
    }

    pub fn residue(&self) -> TruncSeries {
        let k = self.ring.residue_field();
        TruncSeries { ring: k, coeffs: self.coeffs.iter().map(Scalar::residue).collect() }
    }

    pub fn change_ring(&self, ring: &ScalarRing) -> Result<TruncSeries> {
        let coeffs = self.coeffs.iter().map(|c| c.coerce_into(ring)).collect::<Result<_>>()?;
        Ok(TruncSeries { ring: ring.clone(), coeffs })
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inverse(&self) -> Result<TruncSeries> {
        let c0inv = self.coeffs[0].try_inverse()?;
        let n = self.precision();
        let mut out: Vec<Scalar> = Vec::with_capacity(n);
        out.push(c0inv.clone());
        for k in 1..n {
            let mut acc = self.ring.zero();
            for j in 1..=k {
                acc = acc.add_ref(&self.coeffs[j].mul_ref(&out[k - j]));
            }
            out.push(acc.mul_ref(&c0inv).neg_ref());
        }
        Ok(TruncSeries { ring: self.ring.clone(), coeffs: out })
    }

    /// Substitute a nilpotent scalar for `t`. Exact once the precision reaches
    /// the nilpotency order, since higher powers of `alpha` vanish.
    pub fn eval_nilpotent(&self, alpha: &Scalar) -> Result<Scalar> {
        if alpha.is_unit() {
            return Err(Error::PreconditionViolated(format!("{alpha} is not in the maximal ideal")));
        }
        let a = self.ring.nilpotency() as usize;
        if self.precision() < a && !alpha.pow(self.precision() as u32).is_zero() {
            return Err(Error::InsufficientTruncation { needed: a, available: self.precision() });
        }
        Ok(self.coeffs.iter().rev().fold(self.ring.zero(), |acc, c| acc.mul_ref(alpha).add_ref(c)))
    }

    pub fn mul_upoly(&self, p: &UPoly) -> TruncSeries {
        self.mul_ref(&TruncSeries::from_upoly(p, self.precision()))
    }

    /// Formal derivative; precision drops by one.
    pub fn derivative(&self) -> Result<TruncSeries> {
        if self.precision() < 2 {
            return Err(Error::InsufficientTruncation { needed: 2, available: self.precision() });
        }
        let coeffs = (1..self.precision())
            .map(|k| self.coeffs[k].mul_ref(&self.ring.from_i64(k as i64)))
            .collect();
        Ok(TruncSeries { ring: self.ring.clone(), coeffs })
    }
}

impl Algebra for TruncSeries {
    fn zero_like(&self) -> Self {
        Self::zero(&self.ring, self.precision())
    }

    fn one_like(&self) -> Self {
        Self::new(&self.ring, vec![self.ring.one()], self.precision())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "series rings differ");
        let n = self.precision().min(other.precision());
        let coeffs = (0..n).map(|i| self.coeffs[i].add_ref(&other.coeffs[i])).collect();
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    fn sub_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "series rings differ");
        let n = self.precision().min(other.precision());
        let coeffs = (0..n).map(|i| self.coeffs[i].sub_ref(&other.coeffs[i])).collect();
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "series rings differ");
        let n = self.precision().min(other.precision());
        let mut coeffs = vec![self.ring.zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        TruncSeries { ring: self.ring.clone(), coeffs }
    }

    fn neg_ref(&self) -> Self {
        TruncSeries { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(Scalar::neg_ref).collect() }
    }

    fn from_scalar_like(&self, c: &Scalar) -> Self {
        Self::new(&self.ring, vec![c.coerce_into(&self.ring).expect("scalar coercion")], self.precision())
    }

    fn compatible(&self, other: &Self) -> bool {
        self.ring == other.ring
    }
}

forward_ops!(TruncSeries);

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(t^{})", self.to_upoly(), self.precision())
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::MPoly;
    use crate::parse::{parse_poly, parse_ring};
    use std::collections::HashMap;

    #[test]
    fn precision_is_min_of_operands() {
        let q = ScalarRing::rationals();
        let a = TruncSeries::from_ints(&q, &[1, 1], 5);
        let b = TruncSeries::from_ints(&q, &[1, 2, 3], 3);
        assert_eq!((&a * &b).precision(), 3);
        assert_eq!((&a + &b).precision(), 3);
    }

    #[test]
    fn inverse_of_unit() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let e = r.generator(0);
        let s = TruncSeries::new(&r, vec![r.one(), e.clone()], 6);
        let inv = s.inverse().unwrap();
        assert!((&inv * &s).is_one());
        assert!(TruncSeries::new(&r, vec![e], 4).inverse().is_err());
    }

    #[test]
    fn identity_substitution() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let x: MPoly = parse_poly("x", &["x"], &r).unwrap();
        let arc = TruncSeries::new(&r, vec![r.generator(0), r.one()], 4);
        let mut point = HashMap::new();
        point.insert("x".to_string(), arc.clone());
        assert_eq!(x.eval_map(&point).unwrap(), arc);
    }

    #[test]
    fn nilpotent_evaluation() {
        let r = parse_ring("QQ[e]/(e^3)").unwrap();
        let e = r.generator(0);
        let s = TruncSeries::from_ints(&r, &[1, 2, 3, 4], 4);
        // 1 + 2e + 3e^2
        assert_eq!(s.eval_nilpotent(&e).unwrap().to_string(), "1 + 2*e + 3*e^2");
        assert!(s.eval_nilpotent(&r.one()).is_err());
    }
}
