//! The Newton groupoid `Γ_r` in its explicit chart.
//!
//! An arrow based at `(x, y) ∈ X(R)` is a pair `(ξ, η)` with
//! `η + Ĉ(x,y)·u(x,y,ξ,η) = 0` and `v(x,y,ξ,η)` a unit. Its target is
//! `(x + Q^r ξ, y + Q^{r-1} η)` and `Q(target) = v·Q(base)`. Arrows are stored
//! in source coordinates; composition is
//! `(ξ₁,η₁)∘(ξ₂,η₂) = (ξ₁ + v₁^r ξ₂, η₁ + v₁^{r-1} η₂)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::mpoly::MPoly;
use crate::scalar::{Scalar, ScalarRing};
use crate::system::{indexed_names, SystemF};

/// A point `(x, y)` of affine `(n+l)`-space over a scalar ring.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Point {
    pub x: Vec<Scalar>,
    pub y: Vec<Scalar>,
}

impl Point {
    pub fn new(x: Vec<Scalar>, y: Vec<Scalar>) -> Self {
        Point { x, y }
    }

    pub fn ring(&self) -> &ScalarRing {
        self.x.first().or(self.y.first()).expect("nonempty point").ring()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.x.iter().map(|c| c.to_string()).collect();
        let ys: Vec<String> = self.y.iter().map(|c| c.to_string()).collect();
        write!(f, "(x = [{}], y = [{}])", xs.join(", "), ys.join(", "))
    }
}

fn check_arity(system: &SystemF, p: &Point) -> Result<()> {
    if p.x.len() != system.n() || p.y.len() != system.l() {
        return Err(Error::ArityMismatch(format!(
            "point has {} x- and {} y-coordinates, system has n = {}, l = {}",
            p.x.len(),
            p.y.len(),
            system.n(),
            system.l()
        )));
    }
    Ok(())
}

fn require_on_x(system: &SystemF, p: &Point) -> Result<()> {
    check_arity(system, p)?;
    if let Some(bad) = system.eval_f(&p.x, &p.y)?.iter().find(|v| !v.is_zero()) {
        return Err(Error::NotOnX(format!("f{p} = {bad}")));
    }
    Ok(())
}

#[derive(Clone)]
pub struct Arrow {
    system: Arc<SystemF>,
    r: u32,
    base: Point,
    xi: Vec<Scalar>,
    eta: Vec<Scalar>,
    v: Scalar,
}

impl Arrow {
    /// Validate `(ξ, η)` against the chart equations at `base`.
    pub fn new(system: &Arc<SystemF>, r: u32, base: Point, xi: Vec<Scalar>, eta: Vec<Scalar>) -> Result<Arrow> {
        require_on_x(system, &base)?;
        if xi.len() != system.n() || eta.len() != system.l() {
            return Err(Error::ArityMismatch("chart coordinates do not match n and l".into()));
        }
        let chart = system.chart_polys(r)?;
        let (u, v) = chart.eval(&base.x, &base.y, &xi, &eta)?;
        let c_hat = system.eval_c_hat(&base.x, &base.y)?;
        let lhs: Vec<Scalar> = eta.iter().zip(c_hat.mul_vec(&u)).map(|(e, cu)| e.add_ref(&cu)).collect();
        if let Some(bad) = lhs.iter().find(|v| !v.is_zero()) {
            return Err(Error::ConstraintViolated(format!("eta + C^(x,y) u = {bad}, expected 0")));
        }
        if !v.is_unit() {
            return Err(Error::ConstraintViolated(format!("v = {v} is not a unit")));
        }
        Ok(Arrow { system: system.clone(), r, base, xi, eta, v })
    }

    pub fn system(&self) -> &Arc<SystemF> {
        &self.system
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn xi(&self) -> &[Scalar] {
        &self.xi
    }

    pub fn eta(&self) -> &[Scalar] {
        &self.eta
    }

    pub fn v(&self) -> &Scalar {
        &self.v
    }

    /// `(x + Q^r ξ, y + Q^{r-1} η)`.
    pub fn target(&self) -> Point {
        let q = self.system.eval_q(&self.base.x, &self.base.y).expect("validated");
        let qr = q.pow(self.r);
        let qr1 = q.pow(self.r - 1);
        Point {
            x: self.base.x.iter().zip(&self.xi).map(|(x, xi)| x.add_ref(&qr.mul_ref(xi))).collect(),
            y: self.base.y.iter().zip(&self.eta).map(|(y, eta)| y.add_ref(&qr1.mul_ref(eta))).collect(),
        }
    }

    /// Coordinates in the chart at the target: `(v^{-r} ξ, v^{1-r} η)`.
    pub fn target_coordinates(&self) -> (Vec<Scalar>, Vec<Scalar>) {
        let vinv = self.v.inverse().expect("v is a unit");
        let sr = vinv.pow(self.r);
        let sr1 = vinv.pow(self.r - 1);
        (
            self.xi.iter().map(|c| c.mul_ref(&sr)).collect(),
            self.eta.iter().map(|c| c.mul_ref(&sr1)).collect(),
        )
    }
}

impl PartialEq for Arrow {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.base == other.base && self.xi == other.xi && self.eta == other.eta
    }
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.xi.iter().map(|c| c.to_string()).collect();
        let es: Vec<String> = self.eta.iter().map(|c| c.to_string()).collect();
        write!(f, "arrow_{} at {} (xi = [{}], eta = [{}], v = {})", self.r, self.base, xs.join(", "), es.join(", "), self.v)
    }
}

impl fmt::Debug for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The arrow between two points of `U = X \ Δ`.
pub fn arrow_from_endpoints(system: &Arc<SystemF>, r: u32, p: &Point, p_tilde: &Point) -> Result<Arrow> {
    require_on_x(system, p)?;
    require_on_x(system, p_tilde)?;
    let q = system.eval_q(&p.x, &p.y)?;
    let q_tilde = system.eval_q(&p_tilde.x, &p_tilde.y)?;
    for (pt, val) in [(p, &q), (p_tilde, &q_tilde)] {
        if !val.is_unit() {
            return Err(Error::OnTheDifferent(format!("Q{pt} = {val} is not a unit")));
        }
    }
    let qinv = q.inverse().expect("unit");
    let xi = p_tilde.x.iter().zip(&p.x).map(|(a, b)| a.sub_ref(b).mul_ref(&qinv.pow(r))).collect();
    let eta = p_tilde.y.iter().zip(&p.y).map(|(a, b)| a.sub_ref(b).mul_ref(&qinv.pow(r - 1))).collect();
    let arrow = Arrow::new(system, r, p.clone(), xi, eta)?;
    debug_assert_eq!(arrow.v, q_tilde.mul_ref(&qinv));
    Ok(arrow)
}

pub fn unit(system: &Arc<SystemF>, r: u32, p: &Point) -> Result<Arrow> {
    let ring = p.ring().clone();
    Arrow::new(system, r, p.clone(), vec![ring.zero(); system.n()], vec![ring.zero(); system.l()])
}

pub fn compose(a1: &Arrow, a2: &Arrow) -> Result<Arrow> {
    if a1.r != a2.r || *a1.system != *a2.system {
        return Err(Error::EndpointMismatch("arrows belong to different groupoids".into()));
    }
    let mid = a1.target();
    if a2.base != mid {
        return Err(Error::EndpointMismatch(format!("target {mid} differs from base {}", a2.base)));
    }
    let vr = a1.v.pow(a1.r);
    let vr1 = a1.v.pow(a1.r - 1);
    let xi = a1.xi.iter().zip(&a2.xi).map(|(a, b)| a.add_ref(&vr.mul_ref(b))).collect();
    let eta = a1.eta.iter().zip(&a2.eta).map(|(a, b)| a.add_ref(&vr1.mul_ref(b))).collect();
    let out = Arrow::new(&a1.system, a1.r, a1.base.clone(), xi, eta)?;
    debug_assert_eq!(out.v, a1.v.mul_ref(&a2.v));
    Ok(out)
}

/// Based at the target, with `(ξ', η') = (-v^{-r} ξ, -v^{1-r} η)`.
pub fn inverse(a: &Arrow) -> Result<Arrow> {
    let (xi, eta) = a.target_coordinates();
    Arrow::new(
        &a.system,
        a.r,
        a.target(),
        xi.iter().map(Scalar::neg_ref).collect(),
        eta.iter().map(Scalar::neg_ref).collect(),
    )
}

/// `Γ_{r+1} -> Γ_r`: `(ξ, η) ↦ (Q·ξ, Q·η)` with `Q = Q(base)`.
pub fn level_map(a: &Arrow) -> Result<Arrow> {
    if a.r < 3 {
        return Err(Error::PreconditionViolated(format!("level map needs r + 1 >= 3, got {}", a.r)));
    }
    let q = a.system.eval_q(&a.base.x, &a.base.y)?;
    Arrow::new(
        &a.system,
        a.r - 1,
        a.base.clone(),
        a.xi.iter().map(|c| c.mul_ref(&q)).collect(),
        a.eta.iter().map(|c| c.mul_ref(&q)).collect(),
    )
}

fn all_vectors(ring: &ScalarRing, p: u64, len: usize) -> Vec<Vec<Scalar>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|v| {
                (0..p).map(move |c| {
                    let mut w = v.clone();
                    w.push(ring.from_i64(c as i64));
                    w
                })
            })
            .collect();
    }
    out
}

fn field_size(system: &SystemF, limit: u128) -> Result<u64> {
    let p = system.ring().characteristic();
    if p == 0 || !system.ring().is_field() {
        return Err(Error::InvalidInput("enumeration needs a system over a prime field".into()));
    }
    let size = (p as u128).pow((system.n() + system.l()) as u32);
    if size > limit {
        return Err(Error::SearchSpaceTooLarge { size, limit });
    }
    Ok(p)
}

/// Default guard on `p^{n+l}` for brute-force enumeration.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// All points of `X(F_p)` for a system over `F_p`, in lexicographic order.
pub fn enumerate_points(system: &SystemF, limit: u128) -> Result<Vec<Point>> {
    let p = field_size(system, limit)?;
    let ring = system.ring();
    let xs = all_vectors(ring, p, system.n());
    let ys = all_vectors(ring, p, system.l());
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            if system.is_on_x(x, y)? {
                out.push(Point::new(x.clone(), y.clone()));
            }
        }
    }
    Ok(out)
}

/// Points of `X(F_p)` split into `U` (Q ≠ 0) and `Δ` (Q = 0).
pub fn split_points(system: &SystemF, limit: u128) -> Result<(Vec<Point>, Vec<Point>)> {
    let mut u = Vec::new();
    let mut delta = Vec::new();
    for pt in enumerate_points(system, limit)? {
        if system.eval_q(&pt.x, &pt.y)?.is_zero() {
            delta.push(pt);
        } else {
            u.push(pt);
        }
    }
    Ok((u, delta))
}

/// Every arrow of `Γ_r(F_p)` based at `p`.
pub fn enumerate_arrows_at(system: &Arc<SystemF>, r: u32, p: &Point, limit: u128) -> Result<Vec<Arrow>> {
    let size = field_size(system, limit)?;
    require_on_x(system, p)?;
    let ring = system.ring();
    let xis = all_vectors(ring, size, system.n());
    let etas = all_vectors(ring, size, system.l());
    let mut out = Vec::new();
    for xi in &xis {
        for eta in &etas {
            match Arrow::new(system, r, p.clone(), xi.clone(), eta.clone()) {
                Ok(a) => out.push(a),
                Err(Error::ConstraintViolated(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberKind {
    Additive,
    MultiplicativeSemidirect,
    TwoTorsionTimesAdditive,
}

impl FiberKind {
    pub fn name(self) -> &'static str {
        match self {
            FiberKind::Additive => "additive",
            FiberKind::MultiplicativeSemidirect => "multiplicative-semidirect",
            FiberKind::TwoTorsionTimesAdditive => "two-torsion-times-additive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberGroupReport {
    pub kind: FiberKind,
    pub n: usize,
    pub r: u32,
    /// Multiplicity of `z` in its fiber; `None` when `f(x_z, y_z + η)` vanishes identically.
    pub multiplicity: Option<u32>,
    pub singular: bool,
    pub characteristic: u64,
    /// Coefficient of `η²` in `f(x_z, y_z + η)` (for `l = 1`).
    pub a: Option<String>,
    pub df_dx: Vec<Vec<String>>,
    /// `η + Ĉ(z) u(z, ξ, η)`, one entry per equation.
    pub constraint: Vec<String>,
    pub v: String,
    pub law: String,
}

/// Chart polynomials specialized at `z`, in variables `ξ, η`.
pub fn fiber_equations(system: &Arc<SystemF>, r: u32, z: &Point) -> Result<(Vec<MPoly>, MPoly)> {
    let chart = system.chart_polys(r)?;
    let ring = z.ring().clone();
    let mut names = indexed_names("xi", system.n());
    names.extend(indexed_names("eta", system.l()));
    let vars = Arc::new(names);
    let coord = |i: usize| MPoly::var(&ring, &vars, i);
    let constant = |c: &Scalar| MPoly::constant(&ring, &vars, c.clone());
    let mut vals: Vec<MPoly> = z.x.iter().chain(&z.y).map(constant).collect();
    vals.extend((0..vars.len()).map(coord));
    let t = coord(0);
    let u: Vec<MPoly> = chart.u.iter().map(|p| p.change_ring(&ring)?.eval_in(&vals, &t)).collect::<Result<_>>()?;
    let v = chart.v.change_ring(&ring)?.eval_in(&vals, &t)?;
    let c_hat = system.eval_c_hat(&z.x, &z.y)?.map(constant);
    let cu = c_hat.mul_vec(&u);
    let n = system.n();
    let constraint = cu.iter().enumerate().map(|(j, e)| coord(n + j).add_ref(e)).collect();
    Ok((constraint, v))
}

/// Order of vanishing of `f(x_z, y_z + η)` at `η = 0`, and its `η²` coefficient.
fn multiplicity_l1(system: &SystemF, z: &Point) -> Result<(Option<u32>, Scalar)> {
    let ring = z.ring().clone();
    let vars = Arc::new(vec!["eta".to_string()]);
    let eta = MPoly::var(&ring, &vars, 0);
    let mut vals: Vec<MPoly> = z.x.iter().map(|c| MPoly::constant(&ring, &vars, c.clone())).collect();
    vals.push(MPoly::constant(&ring, &vars, z.y[0].clone()).add_ref(&eta));
    let g = system.f()[0].change_ring(&ring)?.eval_in(&vals, &eta)?;
    let order = g.terms().map(|(m, _)| m.0[0]).min();
    let a = g.coefficient(&crate::mpoly::Monomial(vec![2]));
    Ok((order, a))
}

/// Classify the group scheme `(Γ_r)_z` at a point `z` of the different.
///
/// The system must be in normal form at `z` (`C(z) = 0`). The multiplicity is
/// computed for `l = 1`; for `l >= 2` the normal form forces it to be at
/// least 3, so `multiplicity` may be left `None`.
pub fn fiber_group(system: &Arc<SystemF>, r: u32, z: &Point, multiplicity: Option<u32>) -> Result<FiberGroupReport> {
    if r < 2 {
        return Err(Error::PreconditionViolated(format!("level r = {r} must be at least 2")));
    }
    require_on_x(system, z)?;
    let q = system.eval_q(&z.x, &z.y)?;
    if !q.is_zero() {
        return Err(Error::NotOnDifferent(format!("Q{z} = {q}")));
    }
    let c = system.eval_c(&z.x, &z.y)?;
    if c.rows().iter().flatten().any(|e| !e.is_zero()) {
        return Err(Error::NotInNormalForm(format!("C{z} = {c} is not zero")));
    }
    let df_dx = system.eval_df_dx(&z.x, &z.y)?;
    // With C(z) = 0 the Jacobian rank is the rank of ∂f/∂x(z).
    let singular = rank(&df_dx) < system.l();
    let characteristic = system.ring().characteristic();
    let (mult, a) = if system.l() == 1 {
        let (m, a) = multiplicity_l1(system, z)?;
        (m.or(multiplicity), Some(a))
    } else {
        (multiplicity, None)
    };
    let m_effective = match (system.l(), mult) {
        (1, Some(m)) => m,
        (1, None) => u32::MAX,
        (_, Some(m)) => m.max(3),
        (_, None) => 3,
    };
    let kind = if r >= 3 || m_effective >= 3 {
        FiberKind::Additive
    } else if singular {
        FiberKind::TwoTorsionTimesAdditive
    } else if characteristic == 2 {
        FiberKind::Additive
    } else {
        FiberKind::MultiplicativeSemidirect
    };
    let (constraint, v) = fiber_equations(system, r, z)?;
    Ok(FiberGroupReport {
        kind,
        n: system.n(),
        r,
        multiplicity: mult,
        singular,
        characteristic,
        a: a.map(|s| s.to_string()),
        df_dx: df_dx.iter().map(|row| row.iter().map(|c| c.to_string()).collect()).collect(),
        constraint: constraint.iter().map(|p| p.to_string()).collect(),
        v: v.to_string(),
        law: format!("(xi, eta)*(xi~, eta~) = (xi + v^{r}*xi~, eta + v^{}*eta~)", r - 1),
    })
}

/// Rank over a field by row reduction.
pub fn rank(rows: &[Vec<Scalar>]) -> usize {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, pivot);
        let inv = m[rank][col].inverse().expect("field");
        for i in 0..m.len() {
            if i != rank && !m[i][col].is_zero() {
                let factor = m[i][col].mul_ref(&inv);
                let pivot_row = m[rank].clone();
                for (e, pv) in m[i].iter_mut().zip(&pivot_row) {
                    *e = e.sub_ref(&factor.mul_ref(pv));
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub kind: FiberKind,
    pub elements: usize,
    pub checks: u64,
    pub exhaustive: bool,
    pub failures: Vec<String>,
    pub pass: bool,
}

const FAILURE_CAP: usize = 10;

/// Check the group axioms of `(Γ_r)_z(F_p)` under the chart law, together
/// with the kind-specific structure: `v ≡ 1` and componentwise addition for
/// additive kinds, multiplicativity of `v` for the others, `v ∈ {±1}` for
/// the two-torsion kind.
///
/// All triples are checked when there are at most `max_triples` of them;
/// otherwise `max_triples` random triples drawn from `seed`.
pub fn group_axiom_fuzz(
    system: &Arc<SystemF>,
    report: &FiberGroupReport,
    z: &Point,
    max_triples: u64,
    seed: u64,
) -> Result<AxiomReport> {
    let r = report.r;
    let elements = enumerate_arrows_at(system, r, z, ENUMERATION_LIMIT)?;
    let mut failures: Vec<String> = Vec::new();
    let mut checks = 0u64;
    let fail = |msg: String, failures: &mut Vec<String>| {
        if failures.len() < FAILURE_CAP {
            failures.push(msg);
        }
    };
    let e = unit(system, r, z)?;
    let ring = z.ring().clone();
    let minus_one = ring.one().neg_ref();
    for a in &elements {
        checks += 1;
        if a.target() != *z {
            fail(format!("{a} is not a loop"), &mut failures);
            continue;
        }
        if compose(&e, a)? != *a || compose(a, &e)? != *a {
            fail(format!("unit law fails for {a}"), &mut failures);
        }
        let inv = inverse(a)?;
        if compose(a, &inv)? != e || compose(&inv, a)? != e {
            fail(format!("inverse law fails for {a}"), &mut failures);
        }
        match report.kind {
            FiberKind::Additive if !a.v.is_one() => fail(format!("v = {} at {a} in an additive fiber", a.v), &mut failures),
            FiberKind::TwoTorsionTimesAdditive if !a.v.is_one() && a.v != minus_one => {
                fail(format!("v = {} at {a} is not a sign", a.v), &mut failures)
            }
            _ => {}
        }
    }
    let count = elements.len() as u64;
    let total = count.saturating_pow(3);
    let exhaustive = total <= max_triples;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triple = |k: u64| -> (usize, usize, usize) {
        if exhaustive {
            ((k / (count * count)) as usize, ((k / count) % count) as usize, (k % count) as usize)
        } else {
            let n = elements.len();
            (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))
        }
    };
    let rounds = if elements.is_empty() { 0 } else if exhaustive { total } else { max_triples };
    for k in 0..rounds {
        let (i, j, l) = triple(k);
        let (a, b, c) = (&elements[i], &elements[j], &elements[l]);
        checks += 1;
        let ab = compose(a, b);
        let ab = match ab {
            Ok(x) => x,
            Err(err) => {
                fail(format!("product of {a} and {b} leaves the fiber: {err}"), &mut failures);
                continue;
            }
        };
        if ab.v != a.v.mul_ref(&b.v) {
            fail(format!("v is not multiplicative on {a}, {b}"), &mut failures);
        }
        if matches!(report.kind, FiberKind::Additive) {
            let sum_xi: Vec<Scalar> = a.xi.iter().zip(&b.xi).map(|(p, q)| p.add_ref(q)).collect();
            let sum_eta: Vec<Scalar> = a.eta.iter().zip(&b.eta).map(|(p, q)| p.add_ref(q)).collect();
            if ab.xi != sum_xi || ab.eta != sum_eta {
                fail(format!("law is not componentwise addition on {a}, {b}"), &mut failures);
            }
        }
        // The torus acts on the kernel of v through v^r on the ξ-part.
        if matches!(report.kind, FiberKind::MultiplicativeSemidirect) && b.v.is_one() {
            let conj = compose(&ab, &inverse(a)?)?;
            let scale = a.v.pow(r);
            if conj.xi.iter().zip(&b.xi).any(|(got, xi)| *got != scale.mul_ref(xi)) {
                fail(format!("conjugation by {a} does not scale the ξ-part of {b} by v^{r}"), &mut failures);
            }
        }
        let left = compose(&ab, c)?;
        let right = compose(a, &compose(b, c)?)?;
        if left != right {
            fail(format!("associativity fails on {a}, {b}, {c}"), &mut failures);
        }
    }
    let pass = failures.is_empty();
    Ok(AxiomReport { kind: report.kind, elements: elements.len(), checks, exhaustive, failures, pass })
}

/// First-order arrows at the unit of `p`: for each `i`, solve the arrow
/// equation over `k[ε]/(ε²)` with `ξ = ε e_i` and push the solution through
/// the target map. The result is `w_i = (Q^r e_i, -Q^{r-1} Ĉ ∂f/∂x_i)`.
pub fn lie_algebroid_basis(system: &Arc<SystemF>, r: u32, p: &Point) -> Result<Vec<Vec<Scalar>>> {
    require_on_x(system, p)?;
    let k = p.ring().clone();
    if !k.is_field() {
        return Err(Error::InvalidInput("the Lie algebroid basis is computed over a field".into()));
    }
    let (n, l) = (system.n(), system.l());
    let dual = ScalarRing::dual_numbers(k.base().clone(), "eps", 2)?;
    let eps = dual.generator(0);
    let lift = |c: &Scalar| c.coerce_into(&dual).expect("residue field constant");
    let px: Vec<Scalar> = p.x.iter().map(lift).collect();
    let py: Vec<Scalar> = p.y.iter().map(lift).collect();
    let chart = system.chart_polys(r)?;
    // Linear part of u in ξ and η: first-order coefficient at ε·e_j.
    let linear = |xi_dir: Option<usize>, eta_dir: Option<usize>| -> Result<Vec<Scalar>> {
        let xi: Vec<Scalar> = (0..n).map(|j| if Some(j) == xi_dir { eps.clone() } else { dual.zero() }).collect();
        let eta: Vec<Scalar> = (0..l).map(|j| if Some(j) == eta_dir { eps.clone() } else { dual.zero() }).collect();
        let (u, _) = chart.eval(&px, &py, &xi, &eta)?;
        Ok(u.iter().map(|c| k.from_coef(c.coords()[1].clone())).collect())
    };
    let l_eta: Vec<Vec<Scalar>> = (0..l).map(|j| linear(None, Some(j))).collect::<Result<_>>()?;
    let c_hat = system.eval_c_hat(&p.x, &p.y)?;
    // (I + Ĉ L_η) η = -Ĉ L_ξ e_i
    let l_eta_rows: Vec<Vec<Scalar>> = (0..l).map(|row| (0..l).map(|col| l_eta[col][row].clone()).collect()).collect();
    let m = c_hat.mul(&SquareMatrix::new(l_eta_rows)?).add(&SquareMatrix::identity_like(&k.one(), l));
    let (det, adj) = m.det_and_adjugate();
    let det_inv = det
        .inverse()
        .ok_or_else(|| Error::PreconditionViolated("first-order arrow equation is degenerate".into()))?;
    let q = system.eval_q(&p.x, &p.y)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let rhs: Vec<Scalar> = c_hat.mul_vec(&linear(Some(i), None)?).iter().map(Scalar::neg_ref).collect();
        let eta: Vec<Scalar> = adj.mul_vec(&rhs).iter().map(|c| c.mul_ref(&det_inv)).collect();
        let mut w: Vec<Scalar> = (0..n).map(|j| if j == i { q.pow(r) } else { k.zero() }).collect();
        w.extend(eta.iter().map(|e| e.mul_ref(&q.pow(r - 1))));
        out.push(w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7_parabola() -> (ScalarRing, Arc<SystemF>) {
        let f7 = ScalarRing::prime_field(7).unwrap();
        let s = SystemF::parse(&f7, 1, 1, &["y^2 - x"]).unwrap();
        (f7, s)
    }

    fn pt(ring: &ScalarRing, x: &[i64], y: &[i64]) -> Point {
        Point::new(x.iter().map(|&c| ring.from_i64(c)).collect(), y.iter().map(|&c| ring.from_i64(c)).collect())
    }

    fn ints(ring: &ScalarRing, v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&c| ring.from_i64(c)).collect()
    }

    #[test]
    fn endpoints_example() {
        let (f7, s) = f7_parabola();
        let a = arrow_from_endpoints(&s, 2, &pt(&f7, &[1], &[1]), &pt(&f7, &[4], &[2])).unwrap();
        assert_eq!(a.xi(), ints(&f7, &[6]).as_slice());
        assert_eq!(a.eta(), ints(&f7, &[4]).as_slice());
        assert_eq!(a.v(), &f7.from_i64(2));
        assert_eq!(a.target(), pt(&f7, &[4], &[2]));
        let e = arrow_from_endpoints(&s, 2, &pt(&f7, &[1], &[1]), &pt(&f7, &[1], &[1])).unwrap();
        assert_eq!(e, unit(&s, 2, &pt(&f7, &[1], &[1])).unwrap());
        assert!(matches!(
            arrow_from_endpoints(&s, 2, &pt(&f7, &[0], &[0]), &pt(&f7, &[1], &[1])),
            Err(Error::OnTheDifferent(_))
        ));
    }

    #[test]
    fn composition_example() {
        let (f7, s) = f7_parabola();
        let a1 = arrow_from_endpoints(&s, 2, &pt(&f7, &[1], &[1]), &pt(&f7, &[4], &[2])).unwrap();
        let a2 = arrow_from_endpoints(&s, 2, &pt(&f7, &[4], &[2]), &pt(&f7, &[2], &[3])).unwrap();
        assert_eq!((a2.xi()[0].clone(), a2.eta()[0].clone()), (f7.from_i64(6), f7.from_i64(2)));
        let c = compose(&a1, &a2).unwrap();
        assert_eq!((c.xi()[0].clone(), c.eta()[0].clone()), (f7.from_i64(2), f7.from_i64(1)));
        assert_eq!(c, arrow_from_endpoints(&s, 2, &pt(&f7, &[1], &[1]), &pt(&f7, &[2], &[3])).unwrap());
        assert!(matches!(compose(&a2, &a2), Err(Error::EndpointMismatch(_))));
    }

    #[test]
    fn inverse_matches_endpoints() {
        let (f7, s) = f7_parabola();
        let a = arrow_from_endpoints(&s, 2, &pt(&f7, &[1], &[1]), &pt(&f7, &[4], &[2])).unwrap();
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, arrow_from_endpoints(&s, 2, &pt(&f7, &[4], &[2]), &pt(&f7, &[1], &[1])).unwrap());
        // -2^{-2}·6 = -6·2 = 2 and -2^{-1}·4 = -2 = 5 in F_7.
        assert_eq!((inv.xi()[0].clone(), inv.eta()[0].clone()), (f7.from_i64(2), f7.from_i64(5)));
        assert_eq!(inverse(&inv).unwrap(), a);
    }

    #[test]
    fn level_map_matches_endpoints() {
        let (f7, s) = f7_parabola();
        let (p, pt2) = (pt(&f7, &[1], &[1]), pt(&f7, &[4], &[2]));
        let a3 = arrow_from_endpoints(&s, 3, &p, &pt2).unwrap();
        assert_eq!(level_map(&a3).unwrap(), arrow_from_endpoints(&s, 2, &p, &pt2).unwrap());
        let z = pt(&f7, &[0], &[0]);
        assert_eq!(level_map(&unit(&s, 3, &z).unwrap()).unwrap(), unit(&s, 2, &z).unwrap());
    }

    #[test]
    fn fiber_kinds() {
        let q = ScalarRing::rationals();
        let origin = pt(&q, &[0], &[0]);
        let s = SystemF::parse(&q, 1, 1, &["y^2 - x"]).unwrap();
        let rep = fiber_group(&s, 2, &origin, None).unwrap();
        assert_eq!(rep.kind, FiberKind::MultiplicativeSemidirect);
        assert_eq!(rep.constraint, vec!["eta^2 - xi + eta"]);
        assert_eq!(rep.v, "2*eta + 1");
        assert_eq!(fiber_group(&s, 3, &origin, None).unwrap().kind, FiberKind::Additive);
        let cusp = SystemF::parse(&q, 1, 1, &["y^2 - x^3"]).unwrap();
        let rep = fiber_group(&cusp, 2, &origin, None).unwrap();
        assert_eq!(rep.kind, FiberKind::TwoTorsionTimesAdditive);
        assert_eq!(rep.constraint, vec!["eta^2 + eta"]);
        let f2 = ScalarRing::prime_field(2).unwrap();
        let s2 = SystemF::parse(&f2, 1, 1, &["y^2 + x*y - x"]).unwrap();
        let rep = fiber_group(&s2, 2, &pt(&f2, &[0], &[0]), None).unwrap();
        assert_eq!(rep.kind, FiberKind::Additive);
        assert_eq!(rep.v, "1");
        assert!(matches!(fiber_group(&s, 2, &pt(&q, &[1], &[1]), None), Err(Error::NotOnDifferent(_))));
    }

    #[test]
    fn lie_basis_parabola() {
        let q = ScalarRing::rationals();
        let s = SystemF::parse(&q, 1, 1, &["y^2 - x"]).unwrap();
        let w = lie_algebroid_basis(&s, 2, &pt(&q, &[1], &[1])).unwrap();
        assert_eq!(w, vec![ints(&q, &[4, 2])]);
        let w0 = lie_algebroid_basis(&s, 2, &pt(&q, &[0], &[0])).unwrap();
        assert!(w0[0].iter().all(Algebra::is_zero));
    }
}
