//! Points of the schemes `Z_r`: triples `(q, x̄, ȳ)` with `q` monic of degree
//! `N`, `x̄` modulo `q^r` and `ȳ` modulo `q^{r-1}`, subject to
//!
//! * `f(x̄, ȳ) ≡ 0 mod q^{r-1}`,
//! * `Q(x̄, ȳ) ≡ 0 mod q`,
//! * `Ĉ f(x̄, ỹ) ≡ 0 mod q^r` for any lift `ỹ` of `ȳ`,
//! * `q⁻¹Q(x̄, ȳ)` invertible in `R[t]/(q^{r-2})` (vacuous for `r = 2`).
//!
//! Also: Newton lifting between levels, the reduction of arcs to `Z_r`, and
//! the inverse construction of arcs from points.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::modq::{ModQ, ModQRing};
use crate::mpoly::{vars, MPoly};
use crate::scalar::ScalarRing;
use crate::series::TruncSeries;
use crate::system::{build_system, SystemF};
use crate::upoly::UPoly;
use crate::weierstrass::weierstrass_divide;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `f(x̄, ȳ) ≡ 0 mod q^{r-1}`.
    EquationsVanish,
    /// `Q(x̄, ȳ) ≡ 0 mod q`.
    QDividesDet,
    /// `Ĉ f(x̄, ỹ) ≡ 0 mod q^r`.
    AdjugateCongruence,
    /// `q⁻¹ Q(x̄, ȳ)` is a unit modulo `q^{r-2}`.
    QuotientInvertible,
}

impl Condition {
    pub const ALL: [Condition; 4] =
        [Condition::EquationsVanish, Condition::QDividesDet, Condition::AdjugateCongruence, Condition::QuotientInvertible];

    pub fn name(self) -> &'static str {
        match self {
            Condition::EquationsVanish => "equations-vanish",
            Condition::QDividesDet => "q-divides-det",
            Condition::AdjugateCongruence => "adjugate-congruence",
            Condition::QuotientInvertible => "quotient-invertible",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub pass: bool,
    pub failed: Vec<Condition>,
}

fn ctx(q: &UPoly, power: u32) -> Arc<ModQRing> {
    ModQRing::new(q, power).expect("q validated at construction")
}

fn reduce_all(c: &Arc<ModQRing>, polys: &[UPoly]) -> Vec<ModQ> {
    polys.iter().map(|p| c.reduce(p)).collect()
}

fn check_carriers(system: &SystemF, q: &UPoly) -> Result<()> {
    let r = q.ring();
    if system.ring() != r && system.ring() != &r.residue_field() {
        return Err(Error::MixedCarrier(format!(
            "system over {} cannot be evaluated over {}",
            system.ring(),
            r
        )));
    }
    if !q.is_monic() || q.degree().unwrap_or(0) == 0 {
        return Err(Error::InvalidInput(format!("q = {q} must be monic of positive degree")));
    }
    Ok(())
}

fn reps(v: &[ModQ]) -> Vec<UPoly> {
    v.iter().map(|m| m.rep().clone()).collect()
}

/// An `R`-point `(q, x̄, ȳ)` of `Z_r`.
#[derive(Clone)]
pub struct ZrPoint {
    system: Arc<SystemF>,
    r: u32,
    q: UPoly,
    xbar: Vec<ModQ>,
    ybar: Vec<ModQ>,
}

impl ZrPoint {
    /// Reduce the given representatives modulo `q^r` and `q^{r-1}`.
    /// Membership is not checked; see [`check_membership`].
    pub fn new(system: &Arc<SystemF>, r: u32, q: UPoly, xbar: &[UPoly], ybar: &[UPoly]) -> Result<ZrPoint> {
        if r < 2 {
            return Err(Error::PreconditionViolated(format!("level r = {r} must be at least 2")));
        }
        check_carriers(system, &q)?;
        if xbar.len() != system.n() || ybar.len() != system.l() {
            return Err(Error::ArityMismatch(format!(
                "point has {} x- and {} y-coordinates, system has n = {}, l = {}",
                xbar.len(),
                ybar.len(),
                system.n(),
                system.l()
            )));
        }
        if xbar.iter().chain(ybar).any(|p| p.ring() != q.ring()) {
            return Err(Error::MixedCarrier("coordinates and q live over different rings".into()));
        }
        let xbar = reduce_all(&ctx(&q, r), xbar);
        let ybar = reduce_all(&ctx(&q, r - 1), ybar);
        Ok(ZrPoint { system: system.clone(), r, q, xbar, ybar })
    }

    pub fn system(&self) -> &Arc<SystemF> {
        &self.system
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> &UPoly {
        &self.q
    }

    pub fn ring(&self) -> &ScalarRing {
        self.q.ring()
    }

    /// Degree `N` of `q`.
    pub fn degree(&self) -> usize {
        self.q.degree().expect("q has positive degree")
    }

    pub fn xbar(&self) -> &[ModQ] {
        &self.xbar
    }

    pub fn ybar(&self) -> &[ModQ] {
        &self.ybar
    }

    pub fn xbar_reps(&self) -> Vec<UPoly> {
        reps(&self.xbar)
    }

    pub fn ybar_reps(&self) -> Vec<UPoly> {
        reps(&self.ybar)
    }

    /// Image at a lower level `2 <= r' <= r`.
    pub fn reduce_to_level(&self, level: u32) -> Result<ZrPoint> {
        if level < 2 || level > self.r {
            return Err(Error::PreconditionViolated(format!("cannot reduce level {} to {level}", self.r)));
        }
        ZrPoint::new(&self.system, level, self.q.clone(), &self.xbar_reps(), &self.ybar_reps())
    }

    /// `Ĉ f(x̄, ỹ) mod q^r` for a lift `ỹ` of `ȳ` (given by representatives).
    fn adjugate_residual(&self, lift: &[UPoly]) -> Result<Vec<ModQ>> {
        let c = ctx(&self.q, self.r);
        let y = reduce_all(&c, lift);
        self.system.eval_c_hat_f(&self.xbar, &y)
    }
}

impl PartialEq for ZrPoint {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.q == other.q && self.xbar == other.xbar && self.ybar == other.ybar
    }
}

impl fmt::Display for ZrPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.xbar.iter().map(|m| m.rep().to_string()).collect();
        let ys: Vec<String> = self.ybar.iter().map(|m| m.rep().to_string()).collect();
        write!(f, "Z_{}(q = {}, xbar = [{}], ybar = [{}])", self.r, self.q, xs.join(", "), ys.join(", "))
    }
}

impl fmt::Debug for ZrPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A point of `Z_r ×_{V_r} V_{r+1}`: like [`ZrPoint`] but with `x̄` known
/// modulo `q^{r+1}`.
#[derive(Clone)]
pub struct ZrExtPoint {
    system: Arc<SystemF>,
    r: u32,
    q: UPoly,
    xbar: Vec<ModQ>,
    ybar: Vec<ModQ>,
}

impl ZrExtPoint {
    pub fn new(system: &Arc<SystemF>, r: u32, q: UPoly, xbar: &[UPoly], ybar: &[UPoly]) -> Result<ZrExtPoint> {
        let base = ZrPoint::new(system, r, q.clone(), xbar, ybar)?;
        let xbar = reduce_all(&ctx(&q, r + 1), xbar);
        Ok(ZrExtPoint { system: system.clone(), r, q, xbar, ybar: base.ybar })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> &UPoly {
        &self.q
    }

    pub fn system(&self) -> &Arc<SystemF> {
        &self.system
    }

    pub fn xbar(&self) -> &[ModQ] {
        &self.xbar
    }

    pub fn ybar(&self) -> &[ModQ] {
        &self.ybar
    }

    pub fn xbar_reps(&self) -> Vec<UPoly> {
        reps(&self.xbar)
    }

    pub fn ybar_reps(&self) -> Vec<UPoly> {
        reps(&self.ybar)
    }

    /// The underlying `Z_r` point (`x̄` reduced modulo `q^r`).
    pub fn underlying(&self) -> ZrPoint {
        ZrPoint::new(&self.system, self.r, self.q.clone(), &self.xbar_reps(), &self.ybar_reps())
            .expect("validated at construction")
    }
}

impl PartialEq for ZrExtPoint {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.q == other.q && self.xbar == other.xbar && self.ybar == other.ybar
    }
}

impl fmt::Display for ZrExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.xbar.iter().map(|m| m.rep().to_string()).collect();
        let ys: Vec<String> = self.ybar.iter().map(|m| m.rep().to_string()).collect();
        write!(
            f,
            "Z_{} x V_{}(q = {}, xbar = [{}], ybar = [{}])",
            self.r,
            self.r + 1,
            self.q,
            xs.join(", "),
            ys.join(", ")
        )
    }
}

impl fmt::Debug for ZrExtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn check_membership(p: &ZrPoint) -> MembershipReport {
    let s = &p.system;
    let r = p.r;
    let mut failed = Vec::new();

    let c1 = ctx(&p.q, r - 1);
    let x1: Vec<ModQ> = p.xbar.iter().map(|m| m.reduce_to(r - 1)).collect();
    let f_vals = s.eval_f(&x1, &p.ybar).expect("arity checked");
    if !f_vals.iter().all(Algebra::is_zero) {
        failed.push(Condition::EquationsVanish);
    }

    let det = s.eval_q(&x1, &p.ybar).expect("arity checked");
    let divisible = det.reduce_to(1).is_zero();
    if !divisible {
        failed.push(Condition::QDividesDet);
    }

    let residual = p.adjugate_residual(&p.ybar_reps()).expect("arity checked");
    if !residual.iter().all(Algebra::is_zero) {
        failed.push(Condition::AdjugateCongruence);
    }

    if r >= 3 {
        let ok = divisible && det.div_by_q().map(|s| s.is_unit()).unwrap_or(false);
        if !ok {
            failed.push(Condition::QuotientInvertible);
        }
    }
    debug_assert!(c1.power() == r - 1);
    MembershipReport { pass: failed.is_empty(), failed }
}

/// Whether `Ĉ f(x̄, ỹ) mod q^r` is the same for two lifts of `ȳ`.
pub fn lift_independence_check(p: &ZrPoint, lift1: &[UPoly], lift2: &[UPoly]) -> Result<bool> {
    let c = ctx(&p.q, p.r - 1);
    for lift in [lift1, lift2] {
        if lift.len() != p.ybar.len() || reduce_all(&c, lift) != p.ybar {
            return Err(Error::PreconditionViolated("given polynomials do not lift ybar".into()));
        }
    }
    Ok(p.adjugate_residual(lift1)? == p.adjugate_residual(lift2)?)
}

fn require_member(p: &ZrPoint) -> Result<()> {
    let report = check_membership(p);
    if !report.pass {
        let names: Vec<&str> = report.failed.iter().map(|c| c.name()).collect();
        return Err(Error::PreconditionViolated(format!("{p} fails {}", names.join(", "))));
    }
    Ok(())
}

/// Newton's formula for the inverse of `Z_{r+1} -> Z_r ×_{V_r} V_{r+1}`, `r >= 3`:
/// `ȳ' = ỹ - (q⁻¹Q(x̄,ȳ))⁻¹ · q⁻¹Ĉf(x̄,ỹ)`.
pub fn newton_inverse(e: &ZrExtPoint) -> Result<ZrPoint> {
    let r = e.r;
    if r < 3 {
        return Err(Error::PreconditionViolated(format!(
            "Newton lifting needs r >= 3, got r = {r}"
        )));
    }
    require_member(&e.underlying())?;
    let s = &e.system;
    let y_lift: Vec<ModQ> = e.ybar.iter().map(|m| m.lift_to(r + 1)).collect();
    let residual = s.eval_c_hat_f(&e.xbar, &y_lift)?;
    let det = s.eval_q(&e.xbar, &y_lift)?;
    let unit = det
        .div_by_q()
        .map_err(|_| Error::PreconditionViolated("q does not divide Q(xbar, ybar)".into()))?;
    let unit_inv = unit.inverse()?;
    let ybar = y_lift
        .iter()
        .zip(&residual)
        .map(|(y, g)| {
            let g = g.div_by_q().map_err(|_| Error::PreconditionViolated("q does not divide the residual".into()))?;
            Ok(y.reduce_to(r).sub_ref(&unit_inv.mul_ref(&g)).rep().clone())
        })
        .collect::<Result<Vec<UPoly>>>()?;
    ZrPoint::new(&e.system, r + 1, e.q.clone(), &e.xbar_reps(), &ybar)
}

/// The canonical map `Z_{r+1} -> Z_r ×_{V_r} V_{r+1}`.
pub fn forget(p: &ZrPoint) -> Result<ZrExtPoint> {
    if p.r < 3 {
        return Err(Error::PreconditionViolated(format!("forget needs a point at level >= 3, got {}", p.r)));
    }
    require_member(p)?;
    ZrExtPoint::new(&p.system, p.r - 1, p.q.clone(), &p.xbar_reps(), &p.ybar_reps())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberWitness {
    pub q: String,
    pub xbar: String,
    pub ybar: String,
    /// `ȳ` modulo `q^2` of every point of `Z_3` in the fiber.
    pub fiber: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct R2ScanReport {
    pub p: u64,
    pub equation: String,
    pub degenerate: Option<String>,
    pub z3_points: u64,
    pub base_points: u64,
    pub empty_fibers: u64,
    pub multiple_fibers: u64,
    /// The first few witnesses of each kind, in enumeration order.
    pub non_surjective: Vec<FiberWitness>,
    pub non_injective: Vec<FiberWitness>,
}

const WITNESS_CAP: usize = 5;

fn all_polys(ring: &ScalarRing, p: u64, len: usize) -> Vec<UPoly> {
    let mut out = vec![UPoly::zero(ring)];
    for k in 0..len {
        out = out
            .iter()
            .flat_map(|base| {
                (0..p).map(move |c| base.add_ref(&UPoly::monomial(ring.from_i64(c as i64), k)))
            })
            .collect();
    }
    out
}

/// Exhaustive comparison of `Z_3(F_p)` with `(Z_2 ×_{V_2} V_3)(F_p)` for
/// `f = y(y - P(x))`, over all `q = t - c`.
pub fn r2_counterexample_scan(poly_p: &MPoly, p: u64, limit: u128) -> Result<R2ScanReport> {
    let ring = ScalarRing::prime_field(p)?;
    if poly_p.ring() != &ring {
        return Err(Error::MixedCarrier(format!("P must be over GF({p})")));
    }
    let size = (p as u128).pow(6);
    if size > limit {
        return Err(Error::SearchSpaceTooLarge { size, limit });
    }
    let xy = vars(&["x", "y"]);
    let pp = poly_p
        .with_vars(&xy)
        .map_err(|_| Error::VariableMismatch(format!("P = {poly_p} must be a polynomial in x")))?;
    let y = MPoly::var(&ring, &xy, 1);
    let f = y.mul_ref(&y.sub_ref(&pp));
    let system = build_system(std::slice::from_ref(&f), 1, 1)?;
    let degenerate = if p == 2 {
        Some("characteristic 2: Q = 2y - P(x) reduces to -P(x)".to_string())
    } else if pp.is_zero() {
        Some("P = 0: Q = 2y vanishes on all of X".to_string())
    } else {
        None
    };

    let mut report = R2ScanReport {
        p,
        equation: f.to_string(),
        degenerate,
        z3_points: 0,
        base_points: 0,
        empty_fibers: 0,
        multiple_fibers: 0,
        non_surjective: Vec::new(),
        non_injective: Vec::new(),
    };
    let cubics = all_polys(&ring, p, 3);
    let constants = all_polys(&ring, p, 1);
    for c in 0..p {
        let q = UPoly::from_coeffs(&ring, vec![ring.from_i64(c as i64).neg_ref(), ring.one()]);
        for xbar in &cubics {
            for y1 in &constants {
                let base = ZrExtPoint::new(&system, 2, q.clone(), std::slice::from_ref(xbar), std::slice::from_ref(y1))?;
                let base_ok = check_membership(&base.underlying()).pass;
                let mut fiber = Vec::new();
                for w in &constants {
                    let y2 = y1.add_ref(&q.mul_ref(w));
                    let z = ZrPoint::new(&system, 3, q.clone(), std::slice::from_ref(xbar), std::slice::from_ref(&y2))?;
                    if check_membership(&z).pass {
                        fiber.push(y2.to_string());
                    }
                }
                report.z3_points += fiber.len() as u64;
                if !base_ok {
                    if !fiber.is_empty() {
                        return Err(Error::PreconditionViolated(format!(
                            "Z_3 points over {base} which is not in Z_2"
                        )));
                    }
                    continue;
                }
                report.base_points += 1;
                let witness = || FiberWitness {
                    q: q.to_string(),
                    xbar: xbar.to_string(),
                    ybar: y1.to_string(),
                    fiber: fiber.clone(),
                };
                if fiber.is_empty() {
                    report.empty_fibers += 1;
                    if report.non_surjective.len() < WITNESS_CAP {
                        report.non_surjective.push(witness());
                    }
                } else if fiber.len() >= 2 {
                    report.multiple_fibers += 1;
                    if report.non_injective.len() < WITNESS_CAP {
                        report.non_injective.push(witness());
                    }
                }
            }
        }
    }
    Ok(report)
}

fn series_vec<T: Algebra>(system: &SystemF, x: &[T], y: &[T]) -> Result<()> {
    if x.len() != system.n() || y.len() != system.l() {
        return Err(Error::ArityMismatch(format!(
            "arc has {} x- and {} y-components, system has n = {}, l = {}",
            x.len(),
            y.len(),
            system.n(),
            system.l()
        )));
    }
    Ok(())
}

/// Reduce an arc on `X` to a point of `Z_r`: `q` is the Weierstrass
/// polynomial of `Q(x(t), y(t))`, `x̄ = x mod q^r`, `ȳ = y mod q^{r-1}`.
///
/// Reducing a truncated series modulo `q^r` is well defined once
/// `T >= N·(r + a - 1)`.
pub fn arc_to_zr(system: &Arc<SystemF>, x: &[TruncSeries], y: &[TruncSeries], r: u32) -> Result<ZrPoint> {
    series_vec(system, x, y)?;
    if r < 2 {
        return Err(Error::PreconditionViolated(format!("level r = {r} must be at least 2")));
    }
    let f_vals = system.eval_f(x, y)?;
    if let Some(bad) = f_vals.iter().find(|v| !v.is_zero()) {
        return Err(Error::NotOnX(format!("f(arc) = {bad}")));
    }
    let det = system.eval_q(x, y)?;
    let w = weierstrass_divide(&det)?;
    let a = det.ring().nilpotency() as usize;
    let needed = w.d * (r as usize + a - 1);
    let available = det.precision();
    if available < needed {
        return Err(Error::InsufficientTruncation { needed, available });
    }
    let xs: Vec<UPoly> = x.iter().map(TruncSeries::to_upoly).collect();
    let ys: Vec<UPoly> = y.iter().map(TruncSeries::to_upoly).collect();
    let point = ZrPoint::new(system, r, w.q, &xs, &ys)?;
    debug_assert!(check_membership(&point).pass, "arc reduction left Z_r: {point}");
    Ok(point)
}

/// A polynomial arc `γ0` over the base field with `f(γ0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseArc {
    pub x: Vec<UPoly>,
    pub y: Vec<UPoly>,
}

impl BaseArc {
    pub fn new(system: &SystemF, x: Vec<UPoly>, y: Vec<UPoly>) -> Result<BaseArc> {
        series_vec(system, &x, &y)?;
        let k = system.ring().residue_field();
        if x.iter().chain(&y).any(|p| p.ring() != &k) {
            return Err(Error::MixedCarrier(format!("the base arc must be over {k}")));
        }
        if let Some(bad) = system.eval_f(&x, &y)?.iter().find(|v| !v.is_zero()) {
            return Err(Error::NotOnX(format!("f(base arc) = {bad}")));
        }
        Ok(BaseArc { x, y })
    }

    /// Order `N` of `Q(γ0)`; `None` if the arc lies inside the different.
    pub fn contact_order(&self, system: &SystemF) -> Result<Option<usize>> {
        let det = system.eval_q(&self.x, &self.y)?;
        Ok(det.coeffs().iter().position(|c| !c.is_zero()))
    }

    /// The part of `x0` beyond `t^{N r}`, that is `(x0 - (x0 mod t^{Nr})) / t^{Nr}`.
    pub fn tail(&self, system: &SystemF, r: u32) -> Result<Vec<UPoly>> {
        let n = self.contact_order(system)?.ok_or(Error::ResidueIsZero)?;
        let k = n * r as usize;
        Ok(self.x.iter().map(|p| UPoly::from_coeffs(p.ring(), p.coeffs().iter().skip(k).cloned().collect())).collect())
    }

    /// Truncation of `γ0` as a point of `Z_r` over `k`.
    pub fn to_zr(&self, system: &Arc<SystemF>, r: u32) -> Result<ZrPoint> {
        let n = self.contact_order(system)?.ok_or(Error::ResidueIsZero)?;
        let k = system.ring().residue_field();
        ZrPoint::new(system, r, UPoly::monomial(k.one(), n), &self.x, &self.y)
    }
}

fn lift_poly(p: &UPoly, ring: &ScalarRing) -> Result<UPoly> {
    p.change_ring(ring)
}

/// Reconstruct the arc over `A` with `x = x̄ + q^r·tail` whose reduction is
/// `zr`. `tail` defaults to the tail of `γ0`.
///
/// The correction of `y` runs along `m ⊃ m² ⊃ …` using the Jacobian of `γ0`;
/// each stage divides by `Q(γ0) = t^N·unit`, so the work is done at
/// precision `T + (a-1)·N` and cut to `T` at the end.
pub fn solve_z_system(
    system: &Arc<SystemF>,
    gamma0: &BaseArc,
    zr: &ZrPoint,
    tail: Option<&[UPoly]>,
    precision: usize,
) -> Result<(Vec<TruncSeries>, Vec<TruncSeries>)> {
    let report = check_membership(zr);
    if !report.pass {
        let names: Vec<&str> = report.failed.iter().map(|c| c.name()).collect();
        return Err(Error::NoSolution(format!("{zr} fails {}", names.join(", "))));
    }
    let ring = zr.ring().clone();
    let k = ring.residue_field();
    let a = ring.nilpotency() as usize;
    let r = zr.r();
    let big_n = gamma0.contact_order(system)?.ok_or(Error::ResidueIsZero)?;
    if zr.degree() != big_n || zr.q().residue() != UPoly::monomial(k.one(), big_n) {
        return Err(Error::PreconditionViolated(format!("q = {} does not reduce to t^{big_n}", zr.q())));
    }
    let needed = (big_n * (r as usize + a - 1)).max(a * big_n + 1);
    if precision < needed {
        return Err(Error::InsufficientTruncation { needed, available: precision });
    }
    let base_tail = gamma0.tail(system, r)?;
    let tail: Vec<UPoly> = match tail {
        Some(t) => {
            if t.len() != system.n() {
                return Err(Error::ArityMismatch(format!("{} tail components for n = {}", t.len(), system.n())));
            }
            if t.iter().zip(&base_tail).any(|(a, b)| a.ring() != &ring || &a.residue() != b) {
                return Err(Error::PreconditionViolated("tail does not reduce to the tail of the base arc".into()));
            }
            t.to_vec()
        }
        None => base_tail.iter().map(|p| lift_poly(p, &ring)).collect::<Result<_>>()?,
    };

    // Residues must match the base arc.
    let nr = big_n * r as usize;
    for (xb, x0) in zr.xbar().iter().zip(&gamma0.x) {
        if xb.rep().residue() != x0.truncate(nr) {
            return Err(Error::PreconditionViolated(format!("xbar {} does not reduce to the base arc", xb.rep())));
        }
    }
    for (yb, y0) in zr.ybar().iter().zip(&gamma0.y) {
        if yb.rep().residue() != y0.truncate(big_n * (r as usize - 1)) {
            return Err(Error::PreconditionViolated(format!("ybar {} does not reduce to the base arc", yb.rep())));
        }
    }

    let work = precision + (a - 1) * big_n;
    let qr = zr.q().pow(r);
    let x: Vec<TruncSeries> = zr
        .xbar()
        .iter()
        .zip(&tail)
        .map(|(xb, tl)| TruncSeries::from_upoly(&xb.rep().add_ref(&qr.mul_ref(tl)), work))
        .collect();

    let x0: Vec<TruncSeries> =
        gamma0.x.iter().map(|p| TruncSeries::from_upoly(&lift_poly(p, &ring).expect("same base"), work)).collect();
    let y0: Vec<TruncSeries> =
        gamma0.y.iter().map(|p| TruncSeries::from_upoly(&lift_poly(p, &ring).expect("same base"), work)).collect();
    let c_hat0 = system.eval_c_hat(&x0, &y0)?;
    let det0 = system.eval_q(&x0, &y0)?;
    // det0 = t^N · unit0 with unit0 over k.
    let unit0 = TruncSeries::new(&ring, det0.coeffs()[big_n..].to_vec(), work - big_n).inverse()?;

    let y_ctx = ctx(zr.q(), r - 1);
    let align = |y: &[TruncSeries]| -> Vec<TruncSeries> {
        y.iter()
            .zip(zr.ybar())
            .map(|(yp, yb)| {
                let adj = y_ctx.reduce(&yb.rep().sub_ref(&yp.to_upoly()));
                yp.add_ref(&TruncSeries::from_upoly(adj.rep(), yp.precision()))
            })
            .collect()
    };

    let mut y = y0;
    for stage in 1..a {
        let y_adj = align(&y);
        let x_w: Vec<TruncSeries> = x.iter().map(|s| s.with_precision(y_adj[0].precision())).collect::<Result<_>>()?;
        let residual = c_hat0
            .map(|e| e.with_precision(y_adj[0].precision()).expect("precision shrinks"))
            .mul_vec(&system.eval_f(&x_w, &y_adj)?);
        let mut next = Vec::with_capacity(y.len());
        for (res, ya) in residual.iter().zip(&y_adj) {
            if res.coeffs().iter().any(|c| c.order() < stage as u32) {
                return Err(Error::NoSolution(format!("residual {res} is not in m^{stage}")));
            }
            if res.coeffs()[..big_n].iter().any(|c| c.order() <= stage as u32) {
                return Err(Error::NoSolution(format!("residual {res} is not divisible by t^{big_n}")));
            }
            let p = res.precision() - big_n;
            let shifted = TruncSeries::new(&ring, res.coeffs()[big_n..].to_vec(), p);
            let z = shifted.mul_ref(&unit0.with_precision(p)?);
            let low = big_n * (r as usize - 1);
            if z.coeffs().iter().take(low).any(|c| c.order() <= stage as u32) {
                return Err(Error::NoSolution(format!("correction {z} is not divisible by q^{}", r - 1)));
            }
            next.push(ya.with_precision(p)?.sub_ref(&z));
        }
        y = next;
    }
    let y = align(&y);
    let x: Vec<TruncSeries> = x.iter().map(|s| s.with_precision(precision)).collect::<Result<_>>()?;
    let y: Vec<TruncSeries> = y.iter().map(|s| s.with_precision(precision)).collect::<Result<_>>()?;
    if let Some(bad) = system.eval_f(&x, &y)?.iter().find(|v| !v.is_zero()) {
        return Err(Error::NoSolution(format!("f(x, y) = {bad} after the last stage")));
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, parse_ring};

    fn up(text: &str, ring: &ScalarRing) -> UPoly {
        UPoly::from_mpoly(&parse_poly(text, &["t"], ring).unwrap()).unwrap()
    }

    fn parabola(ring: &ScalarRing) -> Arc<SystemF> {
        SystemF::parse(ring, 1, 1, &["y^2 - x"]).unwrap()
    }

    fn point(s: &Arc<SystemF>, r: u32, q: &str, x: &str, y: &str) -> ZrPoint {
        let ring = s.ring();
        ZrPoint::new(s, r, up(q, ring), &[up(x, ring)], &[up(y, ring)]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let q = ScalarRing::rationals();
        let s = parabola(&q);
        assert!(check_membership(&point(&s, 3, "t", "t^2", "t")).pass);
        let r = check_membership(&point(&s, 3, "t", "t^2", "0"));
        assert!(r.failed.contains(&Condition::QuotientInvertible));
        let r = check_membership(&point(&s, 3, "t", "t^2 + t", "t"));
        assert!(r.failed.contains(&Condition::EquationsVanish));
    }

    #[test]
    fn lifts_agree() {
        let q = ScalarRing::rationals();
        let s = parabola(&q);
        let p = point(&s, 3, "t", "t^2", "t");
        assert!(lift_independence_check(&p, &[up("t", &q)], &[up("t + t^2", &q)]).unwrap());
        assert!(lift_independence_check(&p, &[up("t", &q)], &[up("1 + t", &q)]).is_err());
    }

    #[test]
    fn newton_lift_examples() {
        let q = ScalarRing::rationals();
        let s = parabola(&q);
        let e = ZrExtPoint::new(&s, 3, up("t", &q), &[up("t^2 + t^3", &q)], &[up("t", &q)]).unwrap();
        let lifted = newton_inverse(&e).unwrap();
        assert_eq!(lifted.ybar_reps(), vec![up("t + 1/2*t^2", &q)]);
        assert!(check_membership(&lifted).pass);
        assert_eq!(forget(&lifted).unwrap(), e);

        let e = ZrExtPoint::new(&s, 3, up("t", &q), &[up("t^2", &q)], &[up("t", &q)]).unwrap();
        assert_eq!(newton_inverse(&e).unwrap().ybar_reps(), vec![up("t", &q)]);

        let e = ZrExtPoint::new(&s, 2, up("t", &q), &[up("t^2", &q)], &[up("t", &q)]).unwrap();
        assert!(matches!(newton_inverse(&e), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn arc_reduction() {
        let q = ScalarRing::rationals();
        let s = parabola(&q);
        let x = TruncSeries::from_upoly(&up("t^2", &q), 8);
        let y = TruncSeries::from_upoly(&up("t", &q), 8);
        let z = arc_to_zr(&s, &[x], &[y], 3).unwrap();
        assert_eq!(z, point(&s, 3, "t", "t^2", "t"));

        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let x = TruncSeries::from_upoly(&up("(t + e)^2", &r), 8);
        let y = TruncSeries::from_upoly(&up("t + e", &r), 8);
        let z = arc_to_zr(&s, &[x], &[y], 3).unwrap();
        assert_eq!(z.q(), &up("t + e", &r));

        let x = TruncSeries::from_upoly(&UPoly::zero(&r), 8);
        let y = TruncSeries::from_upoly(&up("e*t", &r), 8);
        assert_eq!(arc_to_zr(&s, &[x], &[y], 3).unwrap_err(), Error::ResidueIsZero);
    }

    #[test]
    fn solve_examples() {
        let q = ScalarRing::rationals();
        let s = parabola(&q);
        let g0 = BaseArc::new(&s, vec![up("t^2", &q)], vec![up("t", &q)]).unwrap();
        let zr = g0.to_zr(&s, 3).unwrap();
        let (x, y) = solve_z_system(&s, &g0, &zr, None, 8).unwrap();
        assert_eq!((x[0].to_upoly(), y[0].to_upoly()), (up("t^2", &q), up("t", &q)));

        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let zr = point(&parabola(&r), 3, "t", "t^2 + e*t^2", "t + 1/2*e*t");
        let (x, y) = solve_z_system(&s, &g0, &zr, None, 8).unwrap();
        assert_eq!(x[0].to_upoly(), up("t^2 + e*t^2", &r));
        assert_eq!(y[0].to_upoly(), up("t + 1/2*e*t", &r));

        let bad = point(&parabola(&r), 3, "t", "t^2 + e*t", "t");
        assert!(matches!(solve_z_system(&s, &g0, &bad, None, 8), Err(Error::NoSolution(_))));
    }

    #[test]
    fn counterexample_scan_small() {
        let f5 = ScalarRing::prime_field(5).unwrap();
        let px = parse_poly("x", &["x"], &f5).unwrap();
        let rep = r2_counterexample_scan(&px, 5, 1 << 20).unwrap();
        assert!(rep.empty_fibers > 0 && rep.multiple_fibers > 0);
        assert!(rep.degenerate.is_none());
        assert!(matches!(r2_counterexample_scan(&px, 5, 100), Err(Error::SearchSpaceTooLarge { .. })));
    }
}
