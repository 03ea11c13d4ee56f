use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{forward_ops, Algebra};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarRing};

/// Exponent vector, ordered graded-lexicographically (total degree first,
/// then lexicographic with the first variable most significant).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over a [`ScalarRing`].
///
/// Zero coefficients are never stored, so structural equality is equality of
/// polynomials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    ring: ScalarRing,
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl MPoly {
    pub fn zero(ring: &ScalarRing, vars: &Arc<Vec<String>>) -> Self {
        MPoly { ring: ring.clone(), vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &ScalarRing, vars: &Arc<Vec<String>>, c: Scalar) -> Self {
        Self::from_terms(ring, vars, [(Monomial::one(vars.len()), c)])
    }

    pub fn var(ring: &ScalarRing, vars: &Arc<Vec<String>>, i: usize) -> Self {
        let mut m = vec![0; vars.len()];
        m[i] = 1;
        Self::from_terms(ring, vars, [(Monomial(m), ring.one())])
    }

    pub fn var_by_name(ring: &ScalarRing, vars: &Arc<Vec<String>>, name: &str) -> Result<Self> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(Self::var(ring, vars, i))
    }

    pub fn from_terms(
        ring: &ScalarRing,
        vars: &Arc<Vec<String>>,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Self {
        let mut map: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "exponent vector length");
            match map.get_mut(&m) {
                Some(existing) => *existing = existing.add_ref(&c),
                None => {
                    map.insert(m, c);
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        MPoly { ring: ring.clone(), vars: vars.clone(), terms: map }
    }

    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in decreasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Value of a constant polynomial.
    pub fn constant_value(&self) -> Option<Scalar> {
        if !self.is_constant() {
            return None;
        }
        Some(self.coefficient(&Monomial::one(self.nvars())))
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn partial_derivative(&self, var: &str) -> Result<MPoly> {
        Ok(self.derivative(self.var_index(var)?))
    }

    /// Formal derivative with respect to the `i`-th variable.
    pub fn derivative(&self, i: usize) -> MPoly {
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, c)| {
            let mut e = m.0.clone();
            let k = e[i];
            e[i] -= 1;
            (Monomial(e), c.mul_ref(&self.ring.from_i64(k as i64)))
        });
        MPoly::from_terms(&self.ring, &self.vars, terms.collect::<Vec<_>>())
    }

    /// Evaluate at one value per variable. `template` supplies zero and one
    /// for the target carrier, which matters for polynomials in no variables.
    pub fn eval_in<T: Algebra>(&self, values: &[T], template: &T) -> Result<T> {
        if values.len() != self.nvars() {
            return Err(Error::ArityMismatch(format!(
                "{} values for {} variables",
                values.len(),
                self.nvars()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.compatible(template)) {
            return Err(Error::MixedCarrier(format!(
                "value for `{}` lives in a different carrier",
                self.vars[bad]
            )));
        }
        // Powers are computed once per variable and reused across terms.
        let mut powers: Vec<Vec<T>> = values.iter().map(|v| vec![v.one_like(), v.clone()]).collect();
        for (i, pw) in powers.iter_mut().enumerate() {
            let top = self.degree_in(i) as usize;
            while pw.len() <= top {
                let next = pw[pw.len() - 1].mul_ref(&values[i]);
                pw.push(next);
            }
        }
        let mut acc = template.zero_like();
        for (m, c) in &self.terms {
            let mut term = template.from_scalar_like(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul_ref(&powers[i][e as usize]);
                }
            }
            acc = acc.add_ref(&term);
        }
        Ok(acc)
    }

    pub fn eval<T: Algebra>(&self, values: &[T]) -> Result<T> {
        let template = values
            .first()
            .ok_or_else(|| Error::ArityMismatch("no values to evaluate at".into()))?
            .clone();
        self.eval_in(values, &template)
    }

    /// Evaluate with values looked up by variable name.
    pub fn eval_map<T: Algebra>(&self, point: &HashMap<String, T>) -> Result<T> {
        let values: Vec<T> = self
            .vars
            .iter()
            .map(|v| point.get(v).cloned().ok_or_else(|| Error::MissingVariable(v.clone())))
            .collect::<Result<_>>()?;
        match values.first() {
            Some(t) => {
                let t = t.clone();
                self.eval_in(&values, &t)
            }
            None => {
                let t = point
                    .values()
                    .next()
                    .ok_or_else(|| Error::InvalidInput("empty evaluation point".into()))?
                    .clone();
                self.eval_in(&values, &t)
            }
        }
    }

    /// Substitute polynomials (all in one common variable set) for the variables.
    pub fn substitute(&self, values: &[MPoly]) -> Result<MPoly> {
        self.eval(values)
    }

    /// Rewrite over a larger (or permuted) variable list, matching by name.
    pub fn with_vars(&self, vars: &Arc<Vec<String>>) -> Result<MPoly> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::VariableMismatch(format!("`{v}` missing from target variables")))
            })
            .collect::<Result<_>>()?;
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0; vars.len()];
            for (i, &k) in m.0.iter().enumerate() {
                e[map[i]] += k;
            }
            (Monomial(e), c.clone())
        });
        Ok(MPoly::from_terms(&self.ring, vars, terms.collect::<Vec<_>>()))
    }

    /// Carry the coefficients into `ring` (see [`Scalar::coerce_into`]).
    pub fn change_ring(&self, ring: &ScalarRing) -> Result<MPoly> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), c.coerce_into(ring)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MPoly::from_terms(ring, &self.vars, terms))
    }

    /// Multiply every coefficient by `c`.
    pub fn scale_by(&self, c: &Scalar) -> MPoly {
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a.mul_ref(c)));
        MPoly::from_terms(&self.ring, &self.vars, terms.collect::<Vec<_>>())
    }

    fn mul_term(&self, m: &Monomial, c: &Scalar) -> MPoly {
        let terms = self.terms.iter().map(|(k, a)| (k.mul(m), a.mul_ref(c)));
        MPoly::from_terms(&self.ring, &self.vars, terms.collect::<Vec<_>>())
    }

    /// Exact quotient `self / den`; fails unless `den` divides `self`.
    ///
    /// Leading-term cancellation in graded-lex order; the leading coefficient
    /// of `den` must be a unit so that leading terms never cancel by zero
    /// divisors.
    pub fn exact_divide(&self, den: &MPoly) -> Result<MPoly> {
        assert!(self.compatible(den), "exact_divide: incompatible operands");
        let (lm, lc) = match den.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let lc_inv = lc.inverse().ok_or_else(|| {
            Error::NotDivisible(format!("leading coefficient {lc} of the divisor is not a unit"))
        })?;
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Scalar)> = Vec::new();
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return Err(Error::NotDivisible(format!("{self} by {den}")));
            }
            let qm = m.div(&lm);
            let qc = c.mul_ref(&lc_inv);
            rem = rem.sub_ref(&den.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Ok(MPoly::from_terms(&self.ring, &self.vars, quot))
    }
}

impl Algebra for MPoly {
    fn zero_like(&self) -> Self {
        MPoly::zero(&self.ring, &self.vars)
    }

    fn one_like(&self) -> Self {
        MPoly::constant(&self.ring, &self.vars, self.ring.one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "polynomial carriers differ");
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(a) => {
                    let s = a.add_ref(c);
                    if s.is_zero() {
                        terms.remove(m);
                    } else {
                        *a = s;
                    }
                }
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        MPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "polynomial carriers differ");
        let mut terms: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.mul_ref(cb);
                match terms.get_mut(&m) {
                    Some(e) => *e = e.add_ref(&c),
                    None => {
                        terms.insert(m, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    fn neg_ref(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect();
        MPoly { ring: self.ring.clone(), vars: self.vars.clone(), terms }
    }

    fn from_scalar_like(&self, c: &Scalar) -> Self {
        MPoly::constant(&self.ring, &self.vars, c.coerce_into(&self.ring).expect("scalar coercion"))
    }

    fn compatible(&self, other: &Self) -> bool {
        self.ring == other.ring && self.vars == other.vars
    }
}

forward_ops!(MPoly);

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let mono: Vec<String> = self
                .vars
                .iter()
                .zip(&m.0)
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            let mono = mono.join("*");
            let (neg, coef) = c.fmt_as_coefficient();
            let body = match (coef, mono.is_empty()) {
                (None, true) => "1".to_string(),
                (None, false) => mono,
                (Some(c), true) => c,
                (Some(c), false) => format!("{c}*{mono}"),
            };
            match (i == 0, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Shared variable list helper.
pub fn vars(names: &[&str]) -> Arc<Vec<String>> {
    Arc::new(names.iter().map(|s| s.to_string()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn q() -> ScalarRing {
        ScalarRing::rationals()
    }

    #[test]
    fn eval_on_parabola() {
        let p = parse_poly("y^2 - x", &["x", "y"], &q()).unwrap();
        let r = q();
        assert!(p.eval(&[r.from_i64(4), r.from_i64(2)]).unwrap().is_zero());
        let f7 = ScalarRing::prime_field(7).unwrap();
        let p7 = parse_poly("y^2 - x", &["x", "y"], &f7).unwrap();
        assert_eq!(p7.eval(&[f7.from_i64(1), f7.from_i64(3)]).unwrap(), f7.from_i64(1));
    }

    #[test]
    fn eval_map_missing_variable() {
        let p = parse_poly("y^2 - x", &["x", "y"], &q()).unwrap();
        let mut point = HashMap::new();
        point.insert("x".to_string(), q().from_i64(1));
        assert_eq!(p.eval_map(&point), Err(Error::MissingVariable("y".into())));
    }

    #[test]
    fn partial_derivatives() {
        let p = parse_poly("y^2 - x^3", &["x", "y"], &q()).unwrap();
        assert_eq!(p.partial_derivative("y").unwrap().to_string(), "2*y");
        assert_eq!(p.partial_derivative("x").unwrap().to_string(), "-3*x^2");
        assert!(matches!(p.partial_derivative("z"), Err(Error::UnknownVariable(_))));
        let f2 = ScalarRing::prime_field(2).unwrap();
        let p2 = parse_poly("y^2 + x*y - x", &["x", "y"], &f2).unwrap();
        assert_eq!(p2.partial_derivative("y").unwrap().to_string(), "x");
    }

    #[test]
    fn exact_division() {
        let v = ["x"];
        let num = parse_poly("x^2 - 1", &v, &q()).unwrap();
        let den = parse_poly("x - 1", &v, &q()).unwrap();
        assert_eq!(num.exact_divide(&den).unwrap().to_string(), "x + 1");
        let bad = parse_poly("x^2 + 1", &v, &q()).unwrap();
        assert!(matches!(bad.exact_divide(&den), Err(Error::NotDivisible(_))));
        assert_eq!(num.exact_divide(&num.zero_like()), Err(Error::DivisionByZero));
    }

    #[test]
    fn exact_division_by_power_of_q() {
        // (Q^2 * eta^2) / Q^2 with Q = 2y
        let v = ["x", "y", "eta"];
        let qq = parse_poly("2*y", &v, &q()).unwrap();
        let eta = parse_poly("eta", &v, &q()).unwrap();
        let num = &qq.pow(2) * &eta.pow(2);
        assert_eq!(num.exact_divide(&qq.pow(2)).unwrap(), eta.pow(2));
    }

    #[test]
    fn grlex_order() {
        let p = parse_poly("y^2 - x^3 + x*y + 1", &["x", "y"], &q()).unwrap();
        assert_eq!(p.to_string(), "-x^3 + x*y + y^2 + 1");
    }

    #[test]
    fn with_vars_embeds() {
        let p = parse_poly("y^2 - x", &["x", "y"], &q()).unwrap();
        let big = vars(&["x", "y", "xi", "eta"]);
        let e = p.with_vars(&big).unwrap();
        assert_eq!(e.to_string(), "y^2 - x");
        assert!(e.with_vars(&vars(&["x"])).is_err());
    }
}
