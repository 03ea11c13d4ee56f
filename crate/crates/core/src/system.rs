//! Complete-intersection data `f: A^{n+l} -> A^l` with its Jacobian apparatus
//! and the chart polynomials `u`, `v` of the Newton groupoid.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::mpoly::MPoly;
use crate::parse::parse_poly_in;
use crate::scalar::ScalarRing;

/// Names `x` (when `count == 1`) or `x1..xcount`.
pub fn indexed_names(stem: &str, count: usize) -> Vec<String> {
    if count == 1 {
        vec![stem.to_string()]
    } else {
        (1..=count).map(|i| format!("{stem}{i}")).collect()
    }
}

/// `f = (f_1, .., f_l)` in variables `x_1..x_n, y_1..y_l`, with
/// `C = ∂f/∂y`, `Q = det C` and the adjugate `Ĉ`.
pub struct SystemF {
    n: usize,
    l: usize,
    ring: ScalarRing,
    vars: Arc<Vec<String>>,
    f: Vec<MPoly>,
    c: SquareMatrix<MPoly>,
    q: MPoly,
    c_hat: SquareMatrix<MPoly>,
    /// `∂f_j/∂x_i`, indexed `[j][i]`.
    df_dx: Vec<Vec<MPoly>>,
    charts: Mutex<BTreeMap<u32, Arc<ChartPolys>>>,
}

impl SystemF {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    /// `x_1..x_n, y_1..y_l`.
    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn x_names(&self) -> &[String] {
        &self.vars[..self.n]
    }

    pub fn y_names(&self) -> &[String] {
        &self.vars[self.n..]
    }

    pub fn f(&self) -> &[MPoly] {
        &self.f
    }

    pub fn c(&self) -> &SquareMatrix<MPoly> {
        &self.c
    }

    pub fn q(&self) -> &MPoly {
        &self.q
    }

    pub fn c_hat(&self) -> &SquareMatrix<MPoly> {
        &self.c_hat
    }

    pub fn df_dx(&self) -> &[Vec<MPoly>] {
        &self.df_dx
    }

    /// Parse the equations over `ring`.
    pub fn parse(ring: &ScalarRing, n: usize, l: usize, equations: &[&str]) -> Result<Arc<SystemF>> {
        if n == 0 || l == 0 {
            return Err(Error::InvalidInput("n and l must be positive".into()));
        }
        let mut names = indexed_names("x", n);
        names.extend(indexed_names("y", l));
        let vars = Arc::new(names);
        let polys = equations.iter().map(|e| parse_poly_in(e, &vars, ring)).collect::<Result<Vec<_>>>()?;
        build_system(&polys, n, l)
    }

    fn point_values<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n || y.len() != self.l {
            return Err(Error::ArityMismatch(format!(
                "point has {} x- and {} y-coordinates, system has n = {}, l = {}",
                x.len(),
                y.len(),
                self.n,
                self.l
            )));
        }
        Ok(x.iter().chain(y).cloned().collect())
    }

    fn template<T: Algebra>(x: &[T], y: &[T]) -> T {
        x.first().or(y.first()).expect("nonempty point").clone()
    }

    pub fn eval_f<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        let vals = self.point_values(x, y)?;
        let t = Self::template(x, y);
        self.f.iter().map(|p| p.eval_in(&vals, &t)).collect()
    }

    pub fn eval_q<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<T> {
        let vals = self.point_values(x, y)?;
        self.q.eval_in(&vals, &Self::template(x, y))
    }

    pub fn eval_c<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<SquareMatrix<T>> {
        let vals = self.point_values(x, y)?;
        let t = Self::template(x, y);
        self.c.try_map(|p| p.eval_in(&vals, &t))
    }

    pub fn eval_c_hat<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<SquareMatrix<T>> {
        let vals = self.point_values(x, y)?;
        let t = Self::template(x, y);
        self.c_hat.try_map(|p| p.eval_in(&vals, &t))
    }

    /// `∂f/∂x` at a point, as `l` rows of length `n`.
    pub fn eval_df_dx<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<Vec<Vec<T>>> {
        let vals = self.point_values(x, y)?;
        let t = Self::template(x, y);
        self.df_dx.iter().map(|row| row.iter().map(|p| p.eval_in(&vals, &t)).collect()).collect()
    }

    /// `Ĉ·f` at a point.
    pub fn eval_c_hat_f<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        let fx = self.eval_f(x, y)?;
        Ok(self.eval_c_hat(x, y)?.mul_vec(&fx))
    }

    pub fn is_on_x<T: Algebra>(&self, x: &[T], y: &[T]) -> Result<bool> {
        Ok(self.eval_f(x, y)?.iter().all(Algebra::is_zero))
    }

    /// The same equations read over `ring`, which must share the base field
    /// (for instance a test ring over it).
    pub fn change_ring(&self, ring: &ScalarRing) -> Result<Arc<SystemF>> {
        if ring == &self.ring {
            let polys = self.f.clone();
            return build_system(&polys, self.n, self.l);
        }
        let polys = self.f.iter().map(|p| p.change_ring(ring)).collect::<Result<Vec<_>>>()?;
        build_system(&polys, self.n, self.l)
    }

    /// Chart polynomials at level `r`, computed once and cached.
    pub fn chart_polys(&self, r: u32) -> Result<Arc<ChartPolys>> {
        if r < 2 {
            return Err(Error::PreconditionViolated(format!("level r = {r} must be at least 2")));
        }
        if let Some(c) = self.charts.lock().expect("chart cache").get(&r) {
            return Ok(c.clone());
        }
        let chart = Arc::new(compute_chart(self, r)?);
        self.charts.lock().expect("chart cache").insert(r, chart.clone());
        Ok(chart)
    }
}

impl fmt::Debug for SystemF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eqs: Vec<String> = self.f.iter().map(|p| p.to_string()).collect();
        write!(f, "SystemF(n={}, l={}, f=[{}] over {})", self.n, self.l, eqs.join(", "), self.ring)
    }
}

impl PartialEq for SystemF {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.l == other.l && self.f == other.f
    }
}

/// Build `C`, `Q` and `Ĉ` for polynomials in (a subset of) the standard
/// variables `x_1..x_n, y_1..y_l`.
pub fn build_system(polys: &[MPoly], n: usize, l: usize) -> Result<Arc<SystemF>> {
    if n == 0 || l == 0 {
        return Err(Error::InvalidInput("n and l must be positive".into()));
    }
    if polys.len() != l {
        return Err(Error::ArityMismatch(format!("{} equations for l = {l}", polys.len())));
    }
    let ring = polys[0].ring().clone();
    if polys.iter().any(|p| p.ring() != &ring) {
        return Err(Error::MixedCarrier("equations over different rings".into()));
    }
    let mut names = indexed_names("x", n);
    names.extend(indexed_names("y", l));
    let vars = Arc::new(names);
    let f: Vec<MPoly> = polys
        .iter()
        .map(|p| {
            p.with_vars(&vars).map_err(|_| {
                Error::VariableMismatch(format!("{p} uses variables outside {}", vars.join(", ")))
            })
        })
        .collect::<Result<_>>()?;
    let c_rows: Vec<Vec<MPoly>> = f.iter().map(|fj| (0..l).map(|k| fj.derivative(n + k)).collect()).collect();
    let c = SquareMatrix::new(c_rows)?;
    let (q, c_hat) = c.det_and_adjugate();
    let df_dx = f.iter().map(|fj| (0..n).map(|i| fj.derivative(i)).collect()).collect();
    Ok(Arc::new(SystemF { n, l, ring, vars, f, c, q, c_hat, df_dx, charts: Mutex::new(BTreeMap::new()) }))
}

/// `u`, `v` in variables `x, y, ξ, η` with
/// `Q^r·u = f(x+Q^rξ, y+Q^{r-1}η) - f(x,y) - Q^{r-1}Cη` and
/// `Q·v = Q(x+Q^rξ, y+Q^{r-1}η)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPolys {
    pub r: u32,
    pub vars: Arc<Vec<String>>,
    pub u: Vec<MPoly>,
    pub v: MPoly,
}

impl ChartPolys {
    /// Evaluate `(u, v)` at `(x, y, ξ, η)`.
    pub fn eval<T: Algebra>(&self, x: &[T], y: &[T], xi: &[T], eta: &[T]) -> Result<(Vec<T>, T)> {
        let vals: Vec<T> = x.iter().chain(y).chain(xi).chain(eta).cloned().collect();
        if vals.len() != self.vars.len() {
            return Err(Error::ArityMismatch(format!("{} chart values for {} variables", vals.len(), self.vars.len())));
        }
        let t = vals[0].clone();
        let u = self.u.iter().map(|p| p.eval_in(&vals, &t)).collect::<Result<Vec<_>>>()?;
        Ok((u, self.v.eval_in(&vals, &t)?))
    }
}

/// Variables `x.., y.., xi.., eta..` of the chart.
pub fn chart_vars(n: usize, l: usize) -> Arc<Vec<String>> {
    let mut names = indexed_names("x", n);
    names.extend(indexed_names("y", l));
    names.extend(indexed_names("xi", n));
    names.extend(indexed_names("eta", l));
    Arc::new(names)
}

/// Both sides of the two defining identities, for independent checking.
pub struct ChartIdentitySides {
    pub u_numerators: Vec<MPoly>,
    pub v_numerator: MPoly,
    pub q_big: MPoly,
}

pub fn chart_identity_sides(s: &SystemF, r: u32) -> Result<ChartIdentitySides> {
    let (n, l) = (s.n, s.l);
    let vars = chart_vars(n, l);
    let lift = |p: &MPoly| p.with_vars(&vars);
    let q = lift(&s.q)?;
    let qr = q.pow(r);
    let qr1 = q.pow(r - 1);
    let var = |i: usize| MPoly::var(&s.ring, &vars, i);
    let shifted: Vec<MPoly> = (0..n)
        .map(|i| var(i).add_ref(&qr.mul_ref(&var(n + l + i))))
        .chain((0..l).map(|j| var(n + j).add_ref(&qr1.mul_ref(&var(2 * n + l + j)))))
        .collect();
    let eta: Vec<MPoly> = (0..l).map(|j| qr1.mul_ref(&var(2 * n + l + j))).collect();
    let c = s.c.try_map(lift)?;
    let c_eta = c.mul_vec(&eta);
    let mut u_numerators = Vec::with_capacity(l);
    for (j, fj) in s.f.iter().enumerate() {
        let moved = fj.substitute(&shifted)?;
        u_numerators.push(moved.sub_ref(&lift(fj)?).sub_ref(&c_eta[j]));
    }
    let v_numerator = s.q.substitute(&shifted)?;
    Ok(ChartIdentitySides { u_numerators, v_numerator, q_big: q })
}

fn compute_chart(s: &SystemF, r: u32) -> Result<ChartPolys> {
    let sides = chart_identity_sides(s, r)?;
    let vars = chart_vars(s.n, s.l);
    let qr = sides.q_big.pow(r);
    let assertion = |e: Error| match e {
        Error::NotDivisible(m) => Error::NotDivisible(format!("chart polynomial is not polynomial: {m}")),
        other => other,
    };
    let u = sides
        .u_numerators
        .iter()
        .map(|num| num.exact_divide(&qr).map_err(assertion))
        .collect::<Result<Vec<_>>>()?;
    let v = sides.v_numerator.exact_divide(&sides.q_big).map_err(assertion)?;
    Ok(ChartPolys { r, vars, u, v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart_poly(text: &str) -> MPoly {
        parse_poly_in(text, &chart_vars(1, 1), &ScalarRing::rationals()).unwrap()
    }

    #[test]
    fn parabola_jacobian() {
        let s = SystemF::parse(&ScalarRing::rationals(), 1, 1, &["y^2 - x"]).unwrap();
        assert_eq!(s.q().to_string(), "2*y");
        assert!(s.c_hat().get(0, 0).is_one());
    }

    #[test]
    fn triangular_pair() {
        let s = SystemF::parse(&ScalarRing::rationals(), 1, 2, &["y1 + y2^2", "y2 + x"]).unwrap();
        assert_eq!(s.c().to_string(), "[[1, 2*y2], [0, 1]]");
        assert!(s.q().is_one());
    }

    #[test]
    fn parabola_chart_level_two() {
        let s = SystemF::parse(&ScalarRing::rationals(), 1, 1, &["y^2 - x"]).unwrap();
        let c = s.chart_polys(2).unwrap();
        assert_eq!(c.u, vec![chart_poly("eta^2 - xi")]);
        assert_eq!(c.v, chart_poly("1 + 2*eta"));
    }

    #[test]
    fn cusp_chart_level_two() {
        let s = SystemF::parse(&ScalarRing::rationals(), 1, 1, &["y^2 - x^3"]).unwrap();
        let c = s.chart_polys(2).unwrap();
        let expected = chart_poly("eta^2 - 3*x^2*xi - 3*x*(2*y)^2*xi^2 - (2*y)^4*xi^3");
        assert_eq!(c.u, vec![expected]);
        assert_eq!(c.v, chart_poly("1 + 2*eta"));
    }

    #[test]
    fn variable_mismatch() {
        let q = ScalarRing::rationals();
        let p = crate::parse::parse_poly("z + y", &["y", "z"], &q).unwrap();
        assert!(matches!(build_system(std::slice::from_ref(&p), 1, 1), Err(Error::VariableMismatch(_))));
        assert!(matches!(build_system(&[p.clone(), p], 1, 1), Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn level_one_rejected() {
        let s = SystemF::parse(&ScalarRing::rationals(), 1, 1, &["y^2 - x"]).unwrap();
        assert!(s.chart_polys(1).is_err());
    }
}
