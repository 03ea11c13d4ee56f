use std::fmt;

use crate::scalar::Scalar;

/// A commutative unital ring whose elements carry their own context
/// (scalar ring, variable list, modulus, truncation order).
///
/// Polynomial evaluation, determinants and adjugates are written against this
/// trait so that the same code runs over scalars, polynomials, truncated
/// series and residues modulo `q^m`.
pub trait Algebra: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Image of a scalar under the structure map into this carrier.
    fn from_scalar_like(&self, c: &Scalar) -> Self;
    /// Whether `self` and `other` live in the same ring (same modulus, same
    /// variables, ...). Binary operations on incompatible operands panic.
    fn compatible(&self, other: &Self) -> bool;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    fn scale(&self, c: &Scalar) -> Self {
        self.mul_ref(&self.from_scalar_like(c))
    }
}

/// Forwards `+ - * neg` on owned values and references to the [`Algebra`] methods.
macro_rules! forward_ops {
    ($t:ty) => {
        impl std::ops::Add<&$t> for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                $crate::algebra::Algebra::add_ref(self, rhs)
            }
        }
        impl std::ops::Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                $crate::algebra::Algebra::add_ref(&self, &rhs)
            }
        }
        impl std::ops::Sub<&$t> for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                $crate::algebra::Algebra::sub_ref(self, rhs)
            }
        }
        impl std::ops::Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                $crate::algebra::Algebra::sub_ref(&self, &rhs)
            }
        }
        impl std::ops::Mul<&$t> for &$t {
            type Output = $t;
            fn mul(self, rhs: &$t) -> $t {
                $crate::algebra::Algebra::mul_ref(self, rhs)
            }
        }
        impl std::ops::Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                $crate::algebra::Algebra::mul_ref(&self, &rhs)
            }
        }
        impl std::ops::Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                $crate::algebra::Algebra::neg_ref(self)
            }
        }
        impl std::ops::Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $crate::algebra::Algebra::neg_ref(&self)
            }
        }
    };
}

pub(crate) use forward_ops;
