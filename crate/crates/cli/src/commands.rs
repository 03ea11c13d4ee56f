use std::sync::Arc;

use serde_json::{json, Value};

use newton_arcs::arc::{gk_split, join, FactorizedDeformation, HypersurfaceArc, XYExampleInstance};
use newton_arcs::error::{Error, Result};
use newton_arcs::fuzz::{self, Bounds, FuzzConfig};
use newton_arcs::groupoid::{
    arrow_from_endpoints, compose, fiber_group, group_axiom_fuzz, inverse, level_map, lie_algebroid_basis, unit,
};
use newton_arcs::json::*;
use newton_arcs::mpoly::MPoly;
use newton_arcs::parse::{parse_poly, parse_ring};
use newton_arcs::scalar::ScalarRing;
use newton_arcs::system::{indexed_names, SystemF};
use newton_arcs::weierstrass::weierstrass_divide;
use newton_arcs::zr::{
    arc_to_zr, check_membership, lift_independence_check, newton_inverse, r2_counterexample_scan, solve_z_system,
    BaseArc,
};

use crate::{FuzzArgs, Global, Outcome};

/// Largest exhaustive triple count for `grp fiber` axiom checks.
const FIBER_TRIPLES: u64 = 200_000;
const SCAN_LIMIT: u128 = 1_000_000;

fn ok(v: Value) -> Outcome {
    Ok((v, true))
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

/// `--ring`, then the top-level `"ring"`, then `QQ`.
fn data_ring(g: &Global, v: &Value) -> Result<ScalarRing> {
    match &g.ring {
        Some(r) => parse_ring(r),
        None => ring_from_json(v.get("ring")),
    }
}

fn precision(g: &Global, v: &Value) -> Result<Option<usize>> {
    match g.trunc {
        Some(t) => Ok(Some(t)),
        None => v.get("T").map(|t| uint(t, "T").map(|t| t as usize)).transpose(),
    }
}

fn required_precision(g: &Global, v: &Value) -> Result<usize> {
    precision(g, v)?.ok_or_else(|| Error::InvalidInput("a truncation order is required (`T` or --trunc)".into()))
}

fn level(v: &Value) -> Result<u32> {
    Ok(uint(field(v, "r")?, "r")? as u32)
}

/// A system over the residue field of the data ring unless it names its own ring.
fn system_over_residue(v: &Value, data: &ScalarRing) -> Result<Arc<SystemF>> {
    let sv = field(v, "system")?;
    if sv.get("ring").is_some() {
        system_from_json(sv, None)
    } else {
        system_from_json(sv, Some(&data.residue_field()))
    }
}

/// A system and its data sharing one ring: `--ring`, the system's ring, the
/// top-level ring, `QQ`.
fn system_shared(g: &Global, v: &Value) -> Result<Arc<SystemF>> {
    let sv = field(v, "system")?;
    let ring = match &g.ring {
        Some(r) => parse_ring(r)?,
        None => match sv.get("ring") {
            Some(r) => parse_ring(string(r, "ring")?)?,
            None => ring_from_json(v.get("ring"))?,
        },
    };
    system_from_json(sv, Some(&ring))
}

pub fn wdiv(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let f = series_from_json(field(v, "coeffs")?, &ring, precision(g, v)?)?;
    let w = weierstrass_divide(&f)?;
    ok(json!({"q": upoly_to_json(&w.q), "u": series_to_json(&w.u), "d": w.d, "T": f.precision()}))
}

pub fn zr_check(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let p = zr_from_json(field(v, "point")?, &system, &ring)?;
    let report = check_membership(&p);
    let mut out = to_value(&report);
    let mut pass = report.pass;
    if let Some(lifts) = v.get("lifts") {
        let lifts = array(lifts, "lifts")?;
        if lifts.len() != 2 {
            return Err(Error::InvalidInput("`lifts` must hold exactly two lifts of ybar".into()));
        }
        let a = upolys_from_json(&lifts[0], p.ring(), "lifts")?;
        let b = upolys_from_json(&lifts[1], p.ring(), "lifts")?;
        let same = lift_independence_check(&p, &a, &b)?;
        pass &= same;
        out = with_field(out, "lift-independent", json!(same));
    }
    Ok((out, pass))
}

pub fn zr_lift(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let e = zr_ext_from_json(field(v, "point")?, &system, &ring)?;
    ok(zr_to_json(&newton_inverse(&e)?))
}

pub fn zr_scan(_g: &Global, v: &Value) -> Outcome {
    let p = uint(field(v, "p")?, "p")?;
    let k = ScalarRing::prime_field(p)?;
    let poly = parse_poly(string(field(v, "P")?, "P")?, &["x"], &k)?;
    let limit = match v.get("limit") {
        Some(l) => uint(l, "limit")? as u128,
        None => SCAN_LIMIT,
    };
    let report = r2_counterexample_scan(&poly, p, limit)?;
    ok(to_value(&report))
}

pub fn zr_from_arc(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let t = precision(g, v)?;
    let x = series_vec_from_json(field(v, "x")?, &ring, t, "x")?;
    let y = series_vec_from_json(field(v, "y")?, &ring, t, "y")?;
    ok(zr_to_json(&arc_to_zr(&system, &x, &y, level(v)?)?))
}

fn base_arc(system: &SystemF, v: &Value) -> Result<BaseArc> {
    let k = system.ring().residue_field();
    let gv = field(v, "gamma0")?;
    BaseArc::new(system, upolys_from_json(field(gv, "x")?, &k, "x")?, upolys_from_json(field(gv, "y")?, &k, "y")?)
}

fn arc_json(x: &[newton_arcs::series::TruncSeries], y: &[newton_arcs::series::TruncSeries]) -> Value {
    let t = x.iter().chain(y).map(|s| s.precision()).min().unwrap_or(0);
    json!({"x": series_vec_to_json(x), "y": series_vec_to_json(y), "T": t})
}

pub fn zr_to_arc(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let gamma0 = base_arc(&system, v)?;
    let p = zr_from_json(field(v, "point")?, &system, &ring)?;
    let tail = v.get("tail").map(|t| upolys_from_json(t, p.ring(), "tail")).transpose()?;
    let (x, y) = solve_z_system(&system, &gamma0, &p, tail.as_deref(), required_precision(g, v)?)?;
    ok(arc_json(&x, &y))
}

pub fn grp_from_endpoints(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    let ring = system.ring().clone();
    let p = point_from_json(field(v, "p")?, &ring)?;
    let pt = point_from_json(field(v, "p_tilde")?, &ring)?;
    ok(arrow_to_json(&arrow_from_endpoints(&system, level(v)?, &p, &pt)?))
}

pub fn grp_compose(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    let a1 = arrow_from_json(field(v, "a1")?, &system)?;
    let a2 = arrow_from_json(field(v, "a2")?, &system)?;
    ok(arrow_to_json(&compose(&a1, &a2)?))
}

pub fn grp_inverse(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    ok(arrow_to_json(&inverse(&arrow_from_json(field(v, "arrow")?, &system)?)?))
}

pub fn grp_unit(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    let p = point_from_json(field(v, "point")?, system.ring())?;
    ok(arrow_to_json(&unit(&system, level(v)?, &p)?))
}

pub fn grp_level(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    ok(arrow_to_json(&level_map(&arrow_from_json(field(v, "arrow")?, &system)?)?))
}

pub fn grp_fiber(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    let z = point_from_json(field(v, "z")?, system.ring())?;
    let mult = v.get("multiplicity").map(|m| uint(m, "multiplicity").map(|m| m as u32)).transpose()?;
    let r = level(v)?;
    let report = fiber_group(&system, r, &z, mult)?;
    let mut out = to_value(&report);
    let mut pass = true;
    if system.ring().is_field() && system.ring().characteristic() != 0 {
        let axioms = group_axiom_fuzz(&system, &report, &z, FIBER_TRIPLES, g.seed)?;
        pass = axioms.pass;
        out = with_field(out, "axioms", to_value(&axioms));
    }
    Ok((out, pass))
}

pub fn grp_lie(g: &Global, v: &Value) -> Outcome {
    let system = system_shared(g, v)?;
    let p = point_from_json(field(v, "point")?, system.ring())?;
    let basis = lie_algebroid_basis(&system, level(v)?, &p)?;
    ok(json!({"basis": basis.iter().map(|w| scalars_to_json(w)).collect::<Vec<_>>()}))
}

pub fn grp_fuzz(g: &Global, a: &FuzzArgs) -> Outcome {
    let d = Bounds::default();
    let bounds = Bounds {
        p_max: a.p_max.unwrap_or(d.p_max),
        n_max: a.n_max.unwrap_or(d.n_max),
        l_max: a.l_max.unwrap_or(d.l_max),
        degree_max: a.degree_max.unwrap_or(d.degree_max),
        a_max: a.a_max.unwrap_or(d.a_max),
        samples: a.samples.unwrap_or(d.samples),
    };
    let config = FuzzConfig { seed: g.seed, campaign: a.campaign.parse()?, bounds };
    let report = fuzz::run(&config)?;
    Ok((to_value(&report), report.pass))
}

fn example_instance(g: &Global, v: &Value) -> Result<XYExampleInstance> {
    let ring = data_ring(g, v)?;
    let n = uint(field(v, "n")?, "n")? as usize;
    let names = indexed_names("x", n);
    let vars = Arc::new(if n == 1 { vec!["x1".to_string()] } else { names });
    let g_poly: MPoly = match field(v, "g")? {
        Value::String(s) => newton_arcs::parse::parse_poly_in(s, &vars, &ring.residue_field())?,
        other => mpoly_from_json(other, &ring.residue_field())?,
    };
    XYExampleInstance::new(n, &g_poly, &ring, required_precision(g, v)?)
}

fn hypersurface_arc_json(a: &HypersurfaceArc) -> Value {
    json!({"x": series_vec_to_json(&a.x), "y": series_to_json(&a.y)})
}

pub fn arc_factor(g: &Global, v: &Value) -> Outcome {
    let inst = example_instance(g, v)?;
    let av = field(v, "arc")?;
    let t = Some(inst.precision());
    let arc = HypersurfaceArc {
        x: series_vec_from_json(field(av, "x")?, inst.ring(), t, "x")?,
        y: series_from_json(field(av, "y")?, inst.ring(), t)?,
    };
    let d = inst.factorize(&arc)?;
    ok(json!({
        "alpha": scalar_to_json(&d.alpha),
        "u": series_to_json(&d.u),
        "xi": scalars_to_json(&d.xi),
        "xtilde": series_vec_to_json(&d.xtilde),
    }))
}

pub fn arc_unfactor(g: &Global, v: &Value) -> Outcome {
    let inst = example_instance(g, v)?;
    let ring = inst.ring().clone();
    let dv = field(v, "data")?;
    let t = Some(inst.precision() - 1);
    let data = FactorizedDeformation {
        alpha: scalar_from_json(field(dv, "alpha")?, &ring)?,
        u: series_from_json(field(dv, "u")?, &ring, t)?,
        xi: scalars_from_json(field(dv, "xi")?, &ring, "xi")?,
        xtilde: series_vec_from_json(field(dv, "xtilde")?, &ring, t, "xtilde")?,
    };
    ok(hypersurface_arc_json(&inst.unfactorize(&data)?))
}

pub fn arc_split(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let gamma0 = base_arc(&system, v)?;
    let t = precision(g, v)?;
    let x = series_vec_from_json(field(v, "x")?, &ring, t, "x")?;
    let y = series_vec_from_json(field(v, "y")?, &ring, t, "y")?;
    let (zr, tail) = gk_split(&system, &gamma0, &x, &y, level(v)?)?;
    ok(json!({"point": zr_to_json(&zr), "tail": upolys_to_json(&tail)}))
}

pub fn arc_join(g: &Global, v: &Value) -> Outcome {
    let ring = data_ring(g, v)?;
    let system = system_over_residue(v, &ring)?;
    let gamma0 = base_arc(&system, v)?;
    let p = zr_from_json(field(v, "point")?, &system, &ring)?;
    let tail = upolys_from_json(field(v, "tail")?, p.ring(), "tail")?;
    let (x, y) = join(&system, &gamma0, &p, &tail, required_precision(g, v)?)?;
    ok(arc_json(&x, &y))
}

fn system_file(g: &Global, v: &Value) -> Result<Arc<SystemF>> {
    // Accept either a bare system file or `{system: ...}`.
    let sv = v.get("system").unwrap_or(v);
    match &g.ring {
        Some(r) => system_from_json(sv, Some(&parse_ring(r)?)),
        None => system_from_json(sv, None),
    }
}

pub fn sys_build(g: &Global, v: &Value) -> Outcome {
    let s = system_file(g, v)?;
    let df_dx: Vec<Vec<String>> = s.df_dx().iter().map(|row| row.iter().map(|p| p.to_string()).collect()).collect();
    let out = with_field(system_to_json(&s), "C", json!(s.c().to_string()));
    let out = with_field(out, "Q", json!(s.q().to_string()));
    let out = with_field(out, "C_hat", json!(s.c_hat().to_string()));
    ok(with_field(out, "df_dx", json!(df_dx)))
}

pub fn sys_chart(g: &Global, v: &Value) -> Outcome {
    let s = system_file(g, v)?;
    let r = level(v)?;
    let chart = s.chart_polys(r)?;
    let u: Vec<String> = chart.u.iter().map(|p| p.to_string()).collect();
    ok(json!({"r": r, "vars": chart.vars.as_slice(), "u": u, "v": chart.v.to_string()}))
}
