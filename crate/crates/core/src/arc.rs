//! Deformations of arcs, split into finite-type data and free coordinates.
//!
//! Two models:
//!
//! * the hypersurface `y·x_{n+1} + g(x_1..x_n) = 0` around the arc
//!   `γ0 = (0, .., 0, t; 0)`, where a deformation over `A` is the same thing
//!   as `(α, u, ξ, x̃)` with `g(ξ) = 0`;
//! * a general complete intersection, where an arc over `A` deforming `γ0`
//!   splits as a point of `Z_r` times the tail of `x` beyond `q^r`.

use std::sync::Arc;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::scalar::{Scalar, ScalarRing};
use crate::series::TruncSeries;
use crate::system::{build_system, indexed_names, SystemF};
use crate::upoly::UPoly;
use crate::weierstrass::factor_arc;
use crate::zr::{arc_to_zr, solve_z_system, BaseArc, ZrPoint};

/// The hypersurface `y·x_{n+1} + g = 0` over a test ring, at truncation `T`.
pub struct XYExampleInstance {
    n: usize,
    g: MPoly,
    ring: ScalarRing,
    precision: usize,
    system: Arc<SystemF>,
}

/// `x_{n+1} = (t - α)·u` and `x_i = ξ_i + (t - α)·x̃_i`.
///
/// `u` and `x̃` have precision `T - 1`, so that multiplying back by
/// `t - α` stays below `t^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizedDeformation {
    pub alpha: Scalar,
    pub u: TruncSeries,
    pub xi: Vec<Scalar>,
    pub xtilde: Vec<TruncSeries>,
}

/// An arc `(x_1..x_{n+1}; y)` truncated at `t^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersurfaceArc {
    pub x: Vec<TruncSeries>,
    pub y: TruncSeries,
}

impl XYExampleInstance {
    /// `g` is given in variables `x1..xn`; `g(0)` must vanish.
    pub fn new(n: usize, g: &MPoly, ring: &ScalarRing, precision: usize) -> Result<XYExampleInstance> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let names = Arc::new(
            (1..=n + 1).map(|i| format!("x{i}")).chain(std::iter::once("y".to_string())).collect::<Vec<_>>(),
        );
        let k = ring.residue_field();
        if g.ring() != &k {
            return Err(Error::MixedCarrier(format!("g must be over {k}")));
        }
        let g_full = g
            .with_vars(&names)
            .map_err(|_| Error::VariableMismatch(format!("g = {g} must use only x1..x{n}")))?;
        if g_full.degree_in(n) > 0 || g_full.degree_in(n + 1) > 0 {
            return Err(Error::VariableMismatch(format!("g = {g} must use only x1..x{n}")));
        }
        if !g_full.coefficient(&crate::mpoly::Monomial(vec![0; n + 2])).is_zero() {
            return Err(Error::PreconditionViolated(format!("g = {g} does not vanish at 0")));
        }
        if precision < ring.nilpotency() as usize + 1 {
            return Err(Error::InsufficientTruncation { needed: ring.nilpotency() as usize + 1, available: precision });
        }
        let y = MPoly::var(&k, &names, n + 1);
        let xn1 = MPoly::var(&k, &names, n);
        let f = y.mul_ref(&xn1).add_ref(&g_full);
        let system = build_system(&[f], n + 1, 1)?;
        debug_assert_eq!(system.x_names(), indexed_names("x", n + 1).as_slice());
        Ok(XYExampleInstance { n, g: g_full, ring: ring.clone(), precision, system })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ring(&self) -> &ScalarRing {
        &self.ring
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn system(&self) -> &Arc<SystemF> {
        &self.system
    }

    fn g_at<T: Algebra>(&self, x: &[T]) -> Result<T> {
        let mut vals = x.to_vec();
        vals.push(x[0].zero_like());
        vals.push(x[0].zero_like());
        self.g.eval_in(&vals, &x[0])
    }

    /// The base arc `(0, .., 0, t; 0)` over `A`.
    pub fn gamma0(&self) -> HypersurfaceArc {
        let t = self.precision;
        let mut x = vec![TruncSeries::zero(&self.ring, t); self.n];
        x.push(TruncSeries::from_upoly(&UPoly::t(&self.ring), t));
        HypersurfaceArc { x, y: TruncSeries::zero(&self.ring, t) }
    }

    fn check_arc(&self, arc: &HypersurfaceArc) -> Result<()> {
        if arc.x.len() != self.n + 1 {
            return Err(Error::ArityMismatch(format!("expected {} x-components", self.n + 1)));
        }
        for s in arc.x.iter().chain(std::iter::once(&arc.y)) {
            if s.ring() != &self.ring {
                return Err(Error::MixedCarrier(format!("arc component over {} instead of {}", s.ring(), self.ring)));
            }
            if s.precision() != self.precision {
                return Err(Error::InsufficientTruncation { needed: self.precision, available: s.precision() });
            }
        }
        let deforms_zero = |s: &TruncSeries| s.coeffs().iter().all(Scalar::in_maximal_ideal);
        if !arc.x[..self.n].iter().all(deforms_zero) || !deforms_zero(&arc.y) {
            return Err(Error::WrongResidue("arc does not reduce to the base arc".into()));
        }
        Ok(())
    }

    pub fn factorize(&self, arc: &HypersurfaceArc) -> Result<FactorizedDeformation> {
        self.check_arc(arc)?;
        let (alpha, u) = factor_arc(&arc.x[self.n])?;
        let lin = UPoly::from_coeffs(&self.ring, vec![alpha.neg_ref(), self.ring.one()]);
        let mut xi = Vec::with_capacity(self.n);
        let mut xtilde = Vec::with_capacity(self.n);
        for s in &arc.x[..self.n] {
            let (h, rem) = s.to_upoly().div_rem(&lin)?;
            xi.push(rem.coeff(0));
            xtilde.push(TruncSeries::from_upoly(&h, self.precision - 1));
        }
        let gx = self.g_at(&xi)?;
        if !gx.is_zero() {
            return Err(Error::ConstraintViolated(format!("g(xi) = {gx}, so no y(t) exists")));
        }
        let fx = self.system.eval_f(&arc.x, std::slice::from_ref(&arc.y))?;
        if let Some(bad) = fx.iter().find(|v| !v.is_zero()) {
            return Err(Error::ConstraintViolated(format!("y*x{} + g = {bad} on the given arc", self.n + 1)));
        }
        let u = u.with_precision(self.precision - 1)?;
        Ok(FactorizedDeformation { alpha, u, xi, xtilde })
    }

    pub fn unfactorize(&self, data: &FactorizedDeformation) -> Result<HypersurfaceArc> {
        let t = self.precision;
        if !data.alpha.in_maximal_ideal() || data.xi.iter().any(|c| !c.in_maximal_ideal()) {
            return Err(Error::PreconditionViolated("alpha and xi must lie in the maximal ideal".into()));
        }
        if data.xi.len() != self.n || data.xtilde.len() != self.n {
            return Err(Error::ArityMismatch(format!("expected {} xi and xtilde components", self.n)));
        }
        let u_ok = data.u.coeffs().iter().enumerate().all(|(i, c)| {
            if i == 0 {
                c.residue().is_one()
            } else {
                c.in_maximal_ideal()
            }
        });
        if !u_ok || data.xtilde.iter().any(|s| !s.coeffs().iter().all(Scalar::in_maximal_ideal)) {
            return Err(Error::PreconditionViolated("u must lie in 1 + m[[t]] and xtilde in m[[t]]".into()));
        }
        let gx = self.g_at(&data.xi)?;
        if !gx.is_zero() {
            return Err(Error::ConstraintViolated(format!("g(xi) = {gx}")));
        }
        let lin = UPoly::from_coeffs(&self.ring, vec![data.alpha.neg_ref(), self.ring.one()]);
        let xs: Vec<UPoly> = data
            .xi
            .iter()
            .zip(&data.xtilde)
            .map(|(c, s)| UPoly::constant(c.clone()).add_ref(&lin.mul_ref(&s.to_upoly())))
            .collect();
        let last = lin.mul_ref(&data.u.to_upoly());
        // g(x(t)) = g(ξ) + (t - α)·G(t) with g(ξ) = 0.
        let g_poly = self.g_at(&xs)?;
        let big_g = g_poly.exact_div(&lin)?;
        let u_inv = TruncSeries::from_upoly(&data.u.to_upoly(), t).inverse()?;
        let y = TruncSeries::from_upoly(&big_g, t).mul_ref(&u_inv).neg_ref();
        let mut x: Vec<TruncSeries> = xs.iter().map(|p| TruncSeries::from_upoly(p, t)).collect();
        x.push(TruncSeries::from_upoly(&last, t));
        Ok(HypersurfaceArc { x, y })
    }
}

/// Split an arc over `A` deforming `γ0` into its `Z_r` point and the tail
/// `(x - x̄)/q^r` (an exact polynomial quotient of the truncated data).
pub fn gk_split(
    system: &Arc<SystemF>,
    gamma0: &BaseArc,
    x: &[TruncSeries],
    y: &[TruncSeries],
    r: u32,
) -> Result<(ZrPoint, Vec<UPoly>)> {
    for (s, base) in x.iter().zip(&gamma0.x).chain(y.iter().zip(&gamma0.y)) {
        let res = s.residue();
        if res.to_upoly() != base.truncate(s.precision()) {
            return Err(Error::WrongResidue(format!("{s} does not reduce to the base arc")));
        }
    }
    let zr = arc_to_zr(system, x, y, r)?;
    let qr = zr.q().pow(r);
    let tail = x
        .iter()
        .zip(zr.xbar())
        .map(|(s, xb)| s.to_upoly().sub_ref(xb.rep()).exact_div(&qr))
        .collect::<Result<Vec<_>>>()?;
    Ok((zr, tail))
}

/// Inverse of [`gk_split`]: the unique arc with the given `Z_r` point and tail.
pub fn join(
    system: &Arc<SystemF>,
    gamma0: &BaseArc,
    zr: &ZrPoint,
    tail: &[UPoly],
    precision: usize,
) -> Result<(Vec<TruncSeries>, Vec<TruncSeries>)> {
    solve_z_system(system, gamma0, zr, Some(tail), precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, parse_ring};

    fn series(text: &str, ring: &ScalarRing, precision: usize) -> TruncSeries {
        TruncSeries::from_upoly(&UPoly::from_mpoly(&parse_poly(text, &["t"], ring).unwrap()).unwrap(), precision)
    }

    fn square_instance(ring_text: &str) -> XYExampleInstance {
        let ring = parse_ring(ring_text).unwrap();
        let g = parse_poly("x1^2", &["x1"], &ring.residue_field()).unwrap();
        XYExampleInstance::new(1, &g, &ring, 6).unwrap()
    }

    #[test]
    fn epsilon_example() {
        let inst = square_instance("QQ[e]/(e^2)");
        let r = inst.ring().clone();
        let arc = HypersurfaceArc { x: vec![series("e", &r, 6), series("t + e", &r, 6)], y: series("0", &r, 6) };
        let d = inst.factorize(&arc).unwrap();
        assert_eq!(d.alpha, r.generator(0).neg_ref());
        assert!(d.u.is_one());
        assert_eq!(d.xi, vec![r.generator(0)]);
        assert!(d.xtilde[0].is_zero());
        assert_eq!(inst.unfactorize(&d).unwrap(), arc);
    }

    #[test]
    fn base_arc_is_zero_data() {
        let inst = square_instance("QQ[e]/(e^2)");
        let d = inst.factorize(&inst.gamma0()).unwrap();
        assert!(d.alpha.is_zero() && d.u.is_one() && d.xi[0].is_zero() && d.xtilde[0].is_zero());
        assert_eq!(inst.unfactorize(&d).unwrap(), inst.gamma0());
    }

    #[test]
    fn obstructed_deformation() {
        let inst = square_instance("QQ[e]/(e^3)");
        let r = inst.ring().clone();
        let arc = HypersurfaceArc { x: vec![series("e", &r, 6), series("t", &r, 6)], y: series("0", &r, 6) };
        assert!(matches!(inst.factorize(&arc), Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn split_and_join_parabola() {
        let q = ScalarRing::rationals();
        let s = SystemF::parse(&q, 1, 1, &["y^2 - x"]).unwrap();
        let up = |text: &str| UPoly::from_mpoly(&parse_poly(text, &["t"], &q).unwrap()).unwrap();
        let g0 = BaseArc::new(&s, vec![up("t^2")], vec![up("t")]).unwrap();
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let x = vec![series("(t + e)^2", &r, 8)];
        let y = vec![series("t + e", &r, 8)];
        let (zr, tail) = gk_split(&s, &g0, &x, &y, 3).unwrap();
        assert_eq!(zr.q(), &UPoly::from_mpoly(&parse_poly("t + e", &["t"], &r).unwrap()).unwrap());
        assert!(tail[0].is_zero());
        assert_eq!(join(&s, &g0, &zr, &tail, 8).unwrap(), (x, y));
    }
}
