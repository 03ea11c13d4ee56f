//! Exact scalar rings: the rationals, prime fields, and test rings
//! `k[e_1..e_s] / I` where `I` is a monomial ideal containing every monomial
//! of degree `a` (so the maximal ideal is nilpotent).
//!
//! A test ring is finite dimensional over its residue field `k`; elements are
//! stored as coordinate vectors over the basis of standard monomials (those
//! outside `I`), which makes the normal form unique by construction.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{forward_ops, Algebra};
use crate::error::{Error, Result};

/// Residue field of a scalar ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseField {
    Rationals,
    Prime(u64),
}

/// An element of a [`BaseField`]. Prime-field residues are kept in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coef {
    Rat(BigRational),
    Mod(u64),
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl BaseField {
    pub fn characteristic(&self) -> u64 {
        match self {
            BaseField::Rationals => 0,
            BaseField::Prime(p) => *p,
        }
    }

    pub fn zero(&self) -> Coef {
        match self {
            BaseField::Rationals => Coef::Rat(BigRational::zero()),
            BaseField::Prime(_) => Coef::Mod(0),
        }
    }

    pub fn one(&self) -> Coef {
        match self {
            BaseField::Rationals => Coef::Rat(BigRational::one()),
            BaseField::Prime(_) => Coef::Mod(1),
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> Coef {
        match self {
            BaseField::Rationals => Coef::Rat(BigRational::from_integer(n.clone())),
            BaseField::Prime(p) => {
                let r = n.mod_floor(&BigInt::from(*p));
                Coef::Mod(r.to_u64().expect("residue fits in u64"))
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Coef {
        self.from_bigint(&BigInt::from(n))
    }

    /// `num / den`; fails when `den` vanishes in this field.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Coef> {
        let d = self.from_bigint(den);
        let inv = self.inv(&d).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(&self.from_bigint(num), &inv))
    }

    pub fn is_zero(&self, a: &Coef) -> bool {
        match a {
            Coef::Rat(q) => q.is_zero(),
            Coef::Mod(v) => *v == 0,
        }
    }

    pub fn add(&self, a: &Coef, b: &Coef) -> Coef {
        match (self, a, b) {
            (BaseField::Rationals, Coef::Rat(x), Coef::Rat(y)) => Coef::Rat(x + y),
            (BaseField::Prime(p), Coef::Mod(x), Coef::Mod(y)) => {
                Coef::Mod(((*x as u128 + *y as u128) % *p as u128) as u64)
            }
            _ => panic!("coefficient does not belong to {self:?}"),
        }
    }

    pub fn neg(&self, a: &Coef) -> Coef {
        match (self, a) {
            (BaseField::Rationals, Coef::Rat(x)) => Coef::Rat(-x),
            (BaseField::Prime(p), Coef::Mod(x)) => Coef::Mod(if *x == 0 { 0 } else { p - x }),
            _ => panic!("coefficient does not belong to {self:?}"),
        }
    }

    pub fn sub(&self, a: &Coef, b: &Coef) -> Coef {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Coef, b: &Coef) -> Coef {
        match (self, a, b) {
            (BaseField::Rationals, Coef::Rat(x), Coef::Rat(y)) => Coef::Rat(x * y),
            (BaseField::Prime(p), Coef::Mod(x), Coef::Mod(y)) => Coef::Mod(mulmod(*x, *y, *p)),
            _ => panic!("coefficient does not belong to {self:?}"),
        }
    }

    pub fn inv(&self, a: &Coef) -> Option<Coef> {
        if self.is_zero(a) {
            return None;
        }
        match (self, a) {
            (BaseField::Rationals, Coef::Rat(x)) => Some(Coef::Rat(x.recip())),
            (BaseField::Prime(p), Coef::Mod(x)) => Some(Coef::Mod(powmod(*x, p - 2, *p))),
            _ => panic!("coefficient does not belong to {self:?}"),
        }
    }

    /// Sign used when printing: prime-field residues are always "positive".
    fn is_negative(&self, a: &Coef) -> bool {
        match a {
            Coef::Rat(q) => q.is_negative(),
            Coef::Mod(_) => false,
        }
    }

    fn fmt_coef(&self, a: &Coef) -> String {
        match a {
            Coef::Rat(q) => {
                if q.denom().is_one() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            Coef::Mod(v) => v.to_string(),
        }
    }
}

impl fmt::Display for BaseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseField::Rationals => write!(f, "QQ"),
            BaseField::Prime(p) => write!(f, "GF({p})"),
        }
    }
}

struct RingData {
    base: BaseField,
    generators: Vec<String>,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    mul_table: Vec<Vec<Option<usize>>>,
    nilpotency: u32,
}

/// A scalar ring: a field, or a test ring over a field.
#[derive(Clone)]
pub struct ScalarRing(Arc<RingData>);

impl PartialEq for ScalarRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.base == other.0.base
                && self.0.generators == other.0.generators
                && self.0.basis == other.0.basis)
    }
}

impl Eq for ScalarRing {}

impl Hash for ScalarRing {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.base.hash(state);
        self.0.generators.hash(state);
        self.0.basis.hash(state);
    }
}

impl fmt::Debug for ScalarRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn monomial_str(names: &[String], exps: &[u32]) -> String {
    let parts: Vec<String> = names
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .map(|(n, &e)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect();
    parts.join("*")
}

fn divides(small: &[u32], big: &[u32]) -> bool {
    small.iter().zip(big).all(|(a, b)| a <= b)
}

/// All exponent vectors of length `vars` and total degree exactly `deg`,
/// in decreasing lexicographic order.
pub(crate) fn monomials_of_degree(vars: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(vars: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(vars, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(vars, deg, &mut Vec::new(), &mut out);
    out
}

impl ScalarRing {
    fn build(base: BaseField, generators: Vec<String>, relations: &[Vec<u32>], order: u32) -> Self {
        let s = generators.len();
        let in_ideal = |m: &[u32]| {
            m.iter().sum::<u32>() >= order || relations.iter().any(|r| divides(r, m))
        };
        let mut basis = Vec::new();
        for deg in 0..order.max(1) {
            for m in monomials_of_degree(s, deg) {
                if !in_ideal(&m) {
                    basis.push(m);
                }
            }
        }
        let index: HashMap<Vec<u32>, usize> =
            basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mul_table = basis
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| {
                        let prod: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        index.get(&prod).copied()
                    })
                    .collect()
            })
            .collect();
        let nilpotency = basis.iter().map(|m| m.iter().sum::<u32>()).max().unwrap_or(0) + 1;
        ScalarRing(Arc::new(RingData { base, generators, basis, index, mul_table, nilpotency }))
    }

    pub fn rationals() -> Self {
        Self::build(BaseField::Rationals, Vec::new(), &[], 1)
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if p >= 1 << 62 {
            return Err(Error::InvalidRing(format!("prime {p} is too large")));
        }
        Ok(Self::build(BaseField::Prime(p), Vec::new(), &[], 1))
    }

    pub fn field(base: BaseField) -> Result<Self> {
        match base {
            BaseField::Rationals => Ok(Self::rationals()),
            BaseField::Prime(p) => Self::prime_field(p),
        }
    }

    /// `k[generators] / (relations + all monomials of degree order)`.
    pub fn test_ring(
        base: BaseField,
        generators: Vec<String>,
        relations: Vec<Vec<u32>>,
        order: u32,
    ) -> Result<Self> {
        if let BaseField::Prime(p) = base {
            Self::prime_field(p)?;
        }
        if order == 0 {
            return Err(Error::InvalidRing("nilpotency order must be positive".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if !is_identifier(g) {
                return Err(Error::InvalidRing(format!("bad generator name `{g}`")));
            }
            if generators[..i].contains(g) {
                return Err(Error::InvalidRing(format!("duplicate generator `{g}`")));
            }
        }
        for r in &relations {
            if r.len() != generators.len() {
                return Err(Error::InvalidRing("relation has wrong number of exponents".into()));
            }
            if r.iter().all(|&e| e == 0) {
                return Err(Error::InvalidRing("relation 1 makes the ring zero".into()));
            }
        }
        Ok(Self::build(base, generators, &relations, order))
    }

    /// Test ring given only by its monomial relations; the nilpotency order is
    /// the least `a` with every degree-`a` monomial in the ideal.
    pub fn test_ring_from_relations(
        base: BaseField,
        generators: Vec<String>,
        relations: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let s = generators.len();
        for i in 0..s {
            if !relations
                .iter()
                .any(|r| r.len() == s && r.iter().enumerate().all(|(j, &e)| j == i || e == 0))
            {
                return Err(Error::InvalidRing(format!(
                    "generator `{}` is not nilpotent modulo the given relations",
                    generators[i]
                )));
            }
        }
        let mut order = 1;
        loop {
            let all_in = monomials_of_degree(s, order)
                .iter()
                .all(|m| relations.iter().any(|r| r.len() == s && divides(r, m)));
            if all_in {
                break;
            }
            order += 1;
        }
        Self::test_ring(base, generators, relations, order)
    }

    /// `k[e] / (e^a)`.
    pub fn dual_numbers(base: BaseField, name: &str, order: u32) -> Result<Self> {
        Self::test_ring(base, vec![name.to_string()], Vec::new(), order)
    }

    pub fn base(&self) -> &BaseField {
        &self.0.base
    }

    pub fn characteristic(&self) -> u64 {
        self.0.base.characteristic()
    }

    pub fn generators(&self) -> &[String] {
        &self.0.generators
    }

    pub fn is_field(&self) -> bool {
        self.0.basis.len() == 1
    }

    /// Least `a` with `m^a = 0` (1 for a field).
    pub fn nilpotency(&self) -> u32 {
        self.0.nilpotency
    }

    pub fn dimension(&self) -> usize {
        self.0.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.0.basis
    }

    /// The residue field `k` as a ring in its own right.
    pub fn residue_field(&self) -> ScalarRing {
        if self.0.generators.is_empty() {
            return self.clone();
        }
        Self::build(self.0.base.clone(), Vec::new(), &[], 1)
    }

    /// Minimal monomial generators of the defining ideal.
    pub fn relations(&self) -> Vec<Vec<u32>> {
        let s = self.0.generators.len();
        let mut out: Vec<Vec<u32>> = Vec::new();
        for b in &self.0.basis {
            for i in 0..s {
                let mut m = b.clone();
                m[i] += 1;
                if self.0.index.contains_key(&m) || out.contains(&m) {
                    continue;
                }
                let minimal = (0..s).all(|j| {
                    if m[j] == 0 {
                        return true;
                    }
                    let mut d = m.clone();
                    d[j] -= 1;
                    self.0.index.contains_key(&d)
                });
                if minimal {
                    out.push(m);
                }
            }
        }
        out.sort_by(|a, b| {
            a.iter().sum::<u32>().cmp(&b.iter().sum::<u32>()).then_with(|| b.cmp(a))
        });
        out
    }

    fn coords_zero(&self) -> Vec<Coef> {
        vec![self.0.base.zero(); self.0.basis.len()]
    }

    pub fn zero(&self) -> Scalar {
        Scalar { ring: self.clone(), coords: self.coords_zero() }
    }

    pub fn one(&self) -> Scalar {
        self.from_coef(self.0.base.one())
    }

    pub fn from_coef(&self, c: Coef) -> Scalar {
        let mut coords = self.coords_zero();
        coords[0] = c;
        Scalar { ring: self.clone(), coords }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        self.from_coef(self.0.base.from_i64(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        self.from_coef(self.0.base.from_bigint(n))
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Result<Scalar> {
        Ok(self.from_coef(self.0.base.from_ratio(&BigInt::from(num), &BigInt::from(den))?))
    }

    /// The `i`-th nilpotent generator (zero if it is itself in the ideal).
    pub fn generator(&self, i: usize) -> Scalar {
        let mut m = vec![0; self.0.generators.len()];
        m[i] = 1;
        self.monomial(&m, self.0.base.one())
    }

    pub fn generator_by_name(&self, name: &str) -> Option<Scalar> {
        self.0.generators.iter().position(|g| g == name).map(|i| self.generator(i))
    }

    /// `c * e^exps`, reduced to normal form.
    pub fn monomial(&self, exps: &[u32], c: Coef) -> Scalar {
        let mut coords = self.coords_zero();
        if let Some(&i) = self.0.index.get(exps) {
            coords[i] = c;
        }
        Scalar { ring: self.clone(), coords }
    }

    pub fn from_coords(&self, coords: Vec<Coef>) -> Result<Scalar> {
        if coords.len() != self.0.basis.len() {
            return Err(Error::InvalidInput("wrong number of coordinates".into()));
        }
        Ok(Scalar { ring: self.clone(), coords })
    }
}

impl fmt::Display for ScalarRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.base)?;
        if !self.0.generators.is_empty() {
            let rels: Vec<String> = self
                .relations()
                .iter()
                .map(|m| monomial_str(&self.0.generators, m))
                .collect();
            write!(f, "[{}]/({})", self.0.generators.join(","), rels.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An element of a [`ScalarRing`] in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    ring: ScalarRing,
    coords: Vec<Coef>,
}

impl Scalar {
    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    pub fn coords(&self) -> &[Coef] {
        &self.coords
    }

    /// Image in the residue field, as an element of this ring.
    pub fn residue_coef(&self) -> &Coef {
        &self.coords[0]
    }

    /// Image in the residue field, as an element of [`ScalarRing::residue_field`].
    pub fn residue(&self) -> Scalar {
        self.ring.residue_field().from_coef(self.coords[0].clone())
    }

    pub fn is_unit(&self) -> bool {
        !self.ring.0.base.is_zero(&self.coords[0])
    }

    /// Element of the maximal ideal (zero residue).
    pub fn in_maximal_ideal(&self) -> bool {
        !self.is_unit()
    }

    /// Whether only the constant coordinate may be nonzero.
    pub fn is_constant(&self) -> bool {
        self.coords[1..].iter().all(|c| self.ring.0.base.is_zero(c))
    }

    pub fn inverse(&self) -> Option<Scalar> {
        let base = &self.ring.0.base;
        let c0inv = base.inv(&self.coords[0])?;
        // self = c0 (1 + n) with n nilpotent, so 1/self = c0^{-1} sum (-n)^k.
        let unit_part = self.scale_coef(&c0inv);
        let n = unit_part.sub_ref(&self.ring.one());
        let minus_n = n.neg_ref();
        let mut acc = self.ring.one();
        let mut pw = self.ring.one();
        for _ in 1..self.ring.nilpotency() {
            pw = pw.mul_ref(&minus_n);
            acc = acc.add_ref(&pw);
        }
        Some(acc.scale_coef(&c0inv))
    }

    pub fn try_inverse(&self) -> Result<Scalar> {
        self.inverse().ok_or_else(|| Error::NotAUnit(self.to_string()))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul_ref(&other.try_inverse()?))
    }

    pub fn scale_coef(&self, c: &Coef) -> Scalar {
        let base = &self.ring.0.base;
        Scalar {
            ring: self.ring.clone(),
            coords: self.coords.iter().map(|x| base.mul(x, c)).collect(),
        }
    }

    /// Carry this scalar into `target`: identity when the rings agree, and the
    /// structure map `k -> A` when `self` lives in the residue field of `target`.
    pub fn coerce_into(&self, target: &ScalarRing) -> Result<Scalar> {
        if self.ring == *target {
            return Ok(self.clone());
        }
        if self.ring.0.base == target.0.base && self.is_constant() {
            return Ok(target.from_coef(self.coords[0].clone()));
        }
        Err(Error::MixedCarrier(format!("cannot map {} from {} into {}", self, self.ring, target)))
    }

    /// The part of `self` of exact degree `deg` in the nilpotent generators.
    pub fn homogeneous_part(&self, deg: u32) -> Scalar {
        let base = &self.ring.0.base;
        let coords = self
            .coords
            .iter()
            .zip(&self.ring.0.basis)
            .map(|(c, m)| if m.iter().sum::<u32>() == deg { c.clone() } else { base.zero() })
            .collect();
        Scalar { ring: self.ring.clone(), coords }
    }

    /// Smallest `j` with `self ∈ m^j` (the nilpotency order if zero).
    pub fn order(&self) -> u32 {
        let base = &self.ring.0.base;
        self.coords
            .iter()
            .zip(&self.ring.0.basis)
            .filter(|(c, _)| !base.is_zero(c))
            .map(|(_, m)| m.iter().sum::<u32>())
            .min()
            .unwrap_or(self.ring.nilpotency())
    }

    /// Rational value, when this is a constant over the rationals.
    pub fn to_rational(&self) -> Option<BigRational> {
        match (&self.coords[0], self.is_constant()) {
            (Coef::Rat(q), true) => Some(q.clone()),
            _ => None,
        }
    }

    fn is_negative_lead(&self) -> bool {
        let base = &self.ring.0.base;
        self.coords
            .iter()
            .find(|c| !base.is_zero(c))
            .map(|c| base.is_negative(c))
            .unwrap_or(false)
    }

    /// Whether printing needs parentheses when used as a coefficient.
    pub(crate) fn is_compound(&self) -> bool {
        let base = &self.ring.0.base;
        self.coords.iter().filter(|c| !base.is_zero(c)).count() > 1
    }

    /// Formats as a coefficient of a monomial: `None` means "1", `Some("-")` means "-1".
    pub(crate) fn fmt_as_coefficient(&self) -> (bool, Option<String>) {
        let one = self.ring.one();
        if *self == one {
            return (false, None);
        }
        if self.neg_ref() == one {
            return (true, None);
        }
        if self.is_compound() {
            return (false, Some(format!("({self})")));
        }
        if self.is_negative_lead() {
            return (true, Some(self.neg_ref().to_string()));
        }
        (false, Some(self.to_string()))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = &self.ring.0.base;
        let mut first = true;
        for (c, m) in self.coords.iter().zip(&self.ring.0.basis) {
            if base.is_zero(c) {
                continue;
            }
            let neg = base.is_negative(c);
            let abs = if neg { base.neg(c) } else { c.clone() };
            let mono = monomial_str(&self.ring.0.generators, m);
            let body = if mono.is_empty() {
                base.fmt_coef(&abs)
            } else if abs == base.one() {
                mono
            } else {
                format!("{}*{}", base.fmt_coef(&abs), mono)
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Algebra for Scalar {
    fn zero_like(&self) -> Self {
        self.ring.zero()
    }

    fn one_like(&self) -> Self {
        self.ring.one()
    }

    fn is_zero(&self) -> bool {
        let base = &self.ring.0.base;
        self.coords.iter().all(|c| base.is_zero(c))
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert!(self.ring == other.ring, "scalar ring mismatch: {} vs {}", self.ring, other.ring);
        let base = &self.ring.0.base;
        Scalar {
            ring: self.ring.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| base.add(a, b)).collect(),
        }
    }

    fn sub_ref(&self, other: &Self) -> Self {
        assert!(self.ring == other.ring, "scalar ring mismatch: {} vs {}", self.ring, other.ring);
        let base = &self.ring.0.base;
        Scalar {
            ring: self.ring.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| base.sub(a, b)).collect(),
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert!(self.ring == other.ring, "scalar ring mismatch: {} vs {}", self.ring, other.ring);
        let base = &self.ring.0.base;
        if self.coords.len() == 1 {
            return Scalar {
                ring: self.ring.clone(),
                coords: vec![base.mul(&self.coords[0], &other.coords[0])],
            };
        }
        let mut coords = self.ring.coords_zero();
        for (i, a) in self.coords.iter().enumerate() {
            if base.is_zero(a) {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if base.is_zero(b) {
                    continue;
                }
                if let Some(k) = self.ring.0.mul_table[i][j] {
                    coords[k] = base.add(&coords[k], &base.mul(a, b));
                }
            }
        }
        Scalar { ring: self.ring.clone(), coords }
    }

    fn neg_ref(&self) -> Self {
        let base = &self.ring.0.base;
        Scalar { ring: self.ring.clone(), coords: self.coords.iter().map(|a| base.neg(a)).collect() }
    }

    fn from_scalar_like(&self, c: &Scalar) -> Self {
        c.coerce_into(&self.ring).expect("scalar coercion")
    }

    fn compatible(&self, other: &Self) -> bool {
        self.ring == other.ring
    }
}

forward_ops!(Scalar);

#[cfg(test)]
mod tests {
    use super::*;

    fn eps_ring(order: u32) -> ScalarRing {
        ScalarRing::dual_numbers(BaseField::Rationals, "e", order).unwrap()
    }

    #[test]
    fn prime_field_requires_prime() {
        assert!(ScalarRing::prime_field(7).is_ok());
        assert!(matches!(ScalarRing::prime_field(9), Err(Error::InvalidRing(_))));
        assert!(ScalarRing::prime_field(1).is_err());
    }

    #[test]
    fn fp_arithmetic_wraps() {
        let f7 = ScalarRing::prime_field(7).unwrap();
        let x = f7.from_i64(3);
        let y = f7.from_i64(5);
        assert_eq!(&x * &y, f7.from_i64(1));
        assert_eq!(&x - &y, f7.from_i64(5));
        assert_eq!(f7.from_ratio(3, 2).unwrap(), f7.from_i64(5));
        assert!(f7.from_ratio(1, 7).is_err());
    }

    #[test]
    fn nilpotent_generator_powers_vanish() {
        let r = eps_ring(3);
        let e = r.generator(0);
        assert!(!e.pow(2).is_zero());
        assert!(e.pow(3).is_zero());
        assert_eq!(r.nilpotency(), 3);
    }

    #[test]
    fn local_inverse() {
        let r = eps_ring(2);
        let e = r.generator(0);
        let x = &r.from_i64(2) + &e;
        let inv = x.inverse().unwrap();
        // 1/(2+e) = 1/2 - e/4
        let expected = &r.from_ratio(1, 2).unwrap() - &(&e * &r.from_ratio(1, 4).unwrap());
        assert_eq!(inv, expected);
        assert!(e.inverse().is_none());
    }

    #[test]
    fn relations_are_minimal_generators() {
        let r = ScalarRing::test_ring_from_relations(
            BaseField::Rationals,
            vec!["a".into(), "b".into()],
            vec![vec![2, 0], vec![0, 2], vec![1, 1]],
        )
        .unwrap();
        assert_eq!(r.nilpotency(), 2);
        assert_eq!(r.dimension(), 3);
        assert_eq!(r.to_string(), "QQ[a,b]/(a^2, a*b, b^2)");
    }

    #[test]
    fn non_nilpotent_relations_rejected() {
        let r = ScalarRing::test_ring_from_relations(
            BaseField::Rationals,
            vec!["a".into(), "b".into()],
            vec![vec![2, 0]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn display_normal_form() {
        let r = eps_ring(3);
        let e = r.generator(0);
        let x = &(&r.from_i64(1) - &e) + &(&e * &e).scale_coef(&Coef::Rat(BigRational::new(3.into(), 2.into())));
        assert_eq!(x.to_string(), "1 - e + 3/2*e^2");
        assert_eq!(r.zero().to_string(), "0");
    }

    #[test]
    fn coercion_from_residue_field() {
        let r = eps_ring(2);
        let q = ScalarRing::rationals();
        let c = q.from_i64(5);
        assert_eq!(c.coerce_into(&r).unwrap(), r.from_i64(5));
        let f7 = ScalarRing::prime_field(7).unwrap();
        assert!(f7.from_i64(1).coerce_into(&r).is_err());
    }
}
