use std::fmt;
use std::sync::Arc;

use crate::algebra::{forward_ops, Algebra};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::upoly::UPoly;

/// The residue ring `R[t]/(q^m)` for a monic `q` of positive degree.
#[derive(PartialEq, Eq, Hash)]
pub struct ModQRing {
    q: UPoly,
    power: u32,
    modulus: UPoly,
}

impl ModQRing {
    pub fn new(q: &UPoly, power: u32) -> Result<Arc<ModQRing>> {
        if !q.is_monic() || q.degree().unwrap_or(0) == 0 {
            return Err(Error::InvalidInput(format!("q = {q} must be monic of positive degree")));
        }
        Ok(Arc::new(ModQRing { q: q.clone(), power, modulus: q.pow(power) }))
    }

    pub fn q(&self) -> &UPoly {
        &self.q
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `q^m`.
    pub fn modulus(&self) -> &UPoly {
        &self.modulus
    }

    /// Reduce a polynomial modulo `q^m`.
    pub fn reduce(self: &Arc<Self>, p: &UPoly) -> ModQ {
        let rep = p.div_rem(&self.modulus).expect("monic modulus").1;
        ModQ { ctx: self.clone(), rep }
    }

    pub fn zero(self: &Arc<Self>) -> ModQ {
        ModQ { ctx: self.clone(), rep: UPoly::zero(self.q.ring()) }
    }

    pub fn one(self: &Arc<Self>) -> ModQ {
        self.reduce(&UPoly::one(self.q.ring()))
    }

    /// Whether this is the zero ring `R[t]/(q^0)`.
    pub fn is_zero_ring(&self) -> bool {
        self.power == 0
    }
}

impl fmt::Debug for ModQRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R[t]/({})^{}", self.q, self.power)
    }
}

/// An element of `R[t]/(q^m)`, stored as its unique representative of degree `< N·m`.
#[derive(Clone, PartialEq, Eq)]
pub struct ModQ {
    ctx: Arc<ModQRing>,
    rep: UPoly,
}

impl ModQ {
    pub fn new(q: &UPoly, power: u32, p: &UPoly) -> Result<ModQ> {
        Ok(ModQRing::new(q, power)?.reduce(p))
    }

    pub fn ctx(&self) -> &Arc<ModQRing> {
        &self.ctx
    }

    pub fn rep(&self) -> &UPoly {
        &self.rep
    }

    pub fn power(&self) -> u32 {
        self.ctx.power
    }

    /// Image in `R[t]/(q^k)` for `k <= m`.
    pub fn reduce_to(&self, k: u32) -> ModQ {
        assert!(k <= self.ctx.power, "cannot reduce to a finer modulus");
        ModQRing::new(&self.ctx.q, k).expect("valid q").reduce(&self.rep)
    }

    /// The canonical representative, read in `R[t]/(q^k)` for `k >= m`.
    pub fn lift_to(&self, k: u32) -> ModQ {
        assert!(k >= self.ctx.power, "lift_to expects a coarser modulus");
        ModQRing::new(&self.ctx.q, k).expect("valid q").reduce(&self.rep)
    }

    /// Exact division by `q`: `self ∈ q·R[t]/(q^m)` maps to `R[t]/(q^{m-1})`.
    pub fn div_by_q(&self) -> Result<ModQ> {
        if self.ctx.power == 0 {
            return Err(Error::PreconditionViolated("cannot divide by q in the zero ring".into()));
        }
        let quot = self.rep.exact_div(&self.ctx.q)?;
        Ok(ModQRing::new(&self.ctx.q, self.ctx.power - 1).expect("valid q").reduce(&quot))
    }

    /// Multiply by `q`, landing in `R[t]/(q^{m+1})`.
    pub fn mul_by_q(&self) -> ModQ {
        let next = ModQRing::new(&self.ctx.q, self.ctx.power + 1).expect("valid q");
        next.reduce(&self.rep.mul_ref(&self.ctx.q))
    }

    /// Unit test: the residue modulo the nilpotent ideal must be coprime to `q^m`.
    pub fn is_unit(&self) -> bool {
        self.inverse().is_ok()
    }

    pub fn inverse(&self) -> Result<ModQ> {
        if self.ctx.power == 0 {
            return Ok(self.clone());
        }
        let ring = self.rep.ring();
        let (g, s) = self.rep.residue().ext_gcd_field(&self.ctx.modulus.residue())?;
        if !g.is_one() {
            return Err(Error::NotAUnit(format!("{} modulo ({})^{}", self.rep, self.ctx.q, self.ctx.power)));
        }
        // s inverts self modulo the maximal ideal; 1 - self*s is nilpotent.
        let y0 = self.ctx.reduce(&s.change_ring(ring)?);
        let err = self.one_like().sub_ref(&self.mul_ref(&y0));
        let mut series = self.one_like();
        let mut pw = self.one_like();
        for _ in 1..ring.nilpotency() {
            pw = pw.mul_ref(&err);
            series = series.add_ref(&pw);
        }
        let inv = y0.mul_ref(&series);
        debug_assert!(inv.mul_ref(self).is_one());
        Ok(inv)
    }
}

impl Algebra for ModQ {
    fn zero_like(&self) -> Self {
        self.ctx.zero()
    }

    fn one_like(&self) -> Self {
        self.ctx.one()
    }

    fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "moduli differ");
        ModQ { ctx: self.ctx.clone(), rep: self.rep.add_ref(&other.rep) }
    }

    fn sub_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "moduli differ");
        ModQ { ctx: self.ctx.clone(), rep: self.rep.sub_ref(&other.rep) }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "moduli differ");
        self.ctx.reduce(&self.rep.mul_ref(&other.rep))
    }

    fn neg_ref(&self) -> Self {
        ModQ { ctx: self.ctx.clone(), rep: self.rep.neg_ref() }
    }

    fn from_scalar_like(&self, c: &Scalar) -> Self {
        let c = c.coerce_into(self.rep.ring()).expect("scalar coercion");
        self.ctx.reduce(&UPoly::constant(c))
    }

    fn compatible(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx
    }
}

forward_ops!(ModQ);

impl fmt::Display for ModQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod ({})^{}", self.rep, self.ctx.q, self.ctx.power)
    }
}

impl fmt::Debug for ModQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
