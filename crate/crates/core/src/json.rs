//! JSON encodings used by the command-line tool and regression fixtures.
//!
//! Scalars are strings (`"3/2"`, `"1 + 2*e"`); integers are accepted on
//! input, and so is `{"monomial-coeffs": [{"exp": [..], "coef": ".."}]}` for
//! test-ring elements. Univariate polynomials are strings in `t`; truncated
//! series are arrays of coefficients, constant term first.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Point};
use crate::mpoly::{Monomial, MPoly};
use crate::parse::{parse_poly, parse_poly_in, parse_ring, parse_scalar};
use crate::scalar::{Scalar, ScalarRing};
use crate::series::TruncSeries;
use crate::system::{build_system, SystemF};
use crate::upoly::UPoly;
use crate::zr::{ZrExtPoint, ZrPoint};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| invalid(format!("missing field `{key}`")))
}

pub fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| invalid(format!("`{what}` must be an array")))
}

pub fn uint(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| invalid(format!("`{what}` must be a nonnegative integer")))
}

pub fn string<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| invalid(format!("`{what}` must be a string")))
}

pub fn error_to_json(e: &Error) -> Value {
    json!({"error": {"code": e.code(), "message": e.to_string(), "location": e.location()}})
}

pub fn scalar_to_json(c: &Scalar) -> Value {
    Value::String(c.to_string())
}

pub fn scalar_from_json(v: &Value, ring: &ScalarRing) -> Result<Scalar> {
    match v {
        Value::String(s) => parse_scalar(s, ring),
        Value::Number(n) => match n.as_i64() {
            Some(k) => Ok(ring.from_i64(k)),
            None => parse_scalar(&n.to_string(), ring),
        },
        Value::Object(map) => {
            let terms = array(
                map.get("monomial-coeffs").ok_or_else(|| invalid("scalar object needs `monomial-coeffs`"))?,
                "monomial-coeffs",
            )?;
            let base = ring.residue_field();
            let mut acc = ring.zero();
            for t in terms {
                let exp: Vec<u32> = array(field(t, "exp")?, "exp")?
                    .iter()
                    .map(|e| uint(e, "exp").map(|x| x as u32))
                    .collect::<Result<_>>()?;
                if exp.len() != ring.generators().len() {
                    return Err(invalid("exponent vector length differs from the number of generators"));
                }
                let c = scalar_from_json(field(t, "coef")?, &base)?;
                acc = &acc + &ring.monomial(&exp, c.coords()[0].clone());
            }
            Ok(acc)
        }
        _ => Err(invalid(format!("cannot read a scalar from {v}"))),
    }
}

pub fn scalars_from_json(v: &Value, ring: &ScalarRing, what: &str) -> Result<Vec<Scalar>> {
    array(v, what)?.iter().map(|c| scalar_from_json(c, ring)).collect()
}

pub fn scalars_to_json(cs: &[Scalar]) -> Value {
    Value::Array(cs.iter().map(scalar_to_json).collect())
}

pub fn mpoly_to_json(p: &MPoly) -> Value {
    let terms: Vec<Value> = p.terms().map(|(m, c)| json!({"exp": m.0, "coef": c.to_string()})).collect();
    json!({"vars": p.vars().as_slice(), "terms": terms})
}

pub fn mpoly_from_json(v: &Value, ring: &ScalarRing) -> Result<MPoly> {
    let names: Vec<String> =
        array(field(v, "vars")?, "vars")?.iter().map(|s| string(s, "vars").map(str::to_string)).collect::<Result<_>>()?;
    let vars = Arc::new(names);
    let mut terms = Vec::new();
    for t in array(field(v, "terms")?, "terms")? {
        let exp: Vec<u32> =
            array(field(t, "exp")?, "exp")?.iter().map(|e| uint(e, "exp").map(|x| x as u32)).collect::<Result<_>>()?;
        if exp.len() != vars.len() {
            return Err(invalid("exponent vector length differs from the number of variables"));
        }
        terms.push((Monomial(exp), scalar_from_json(field(t, "coef")?, ring)?));
    }
    Ok(MPoly::from_terms(ring, &vars, terms))
}

pub fn upoly_to_json(p: &UPoly) -> Value {
    Value::String(p.to_string())
}

/// A string in `t`, or an array of coefficients (constant term first).
pub fn upoly_from_json(v: &Value, ring: &ScalarRing) -> Result<UPoly> {
    match v {
        Value::Array(_) => Ok(UPoly::from_coeffs(ring, scalars_from_json(v, ring, "coefficients")?)),
        Value::Number(_) => Ok(UPoly::constant(scalar_from_json(v, ring)?)),
        _ => UPoly::from_mpoly(&parse_poly(string(v, "polynomial")?, &["t"], ring)?),
    }
}

pub fn upolys_from_json(v: &Value, ring: &ScalarRing, what: &str) -> Result<Vec<UPoly>> {
    array(v, what)?.iter().map(|p| upoly_from_json(p, ring)).collect()
}

pub fn upolys_to_json(ps: &[UPoly]) -> Value {
    Value::Array(ps.iter().map(upoly_to_json).collect())
}

/// Coefficients with trailing zeros dropped; the truncation order travels
/// separately (`"T"`).
pub fn series_to_json(s: &TruncSeries) -> Value {
    let len = s.coeffs().iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    scalars_to_json(&s.coeffs()[..len])
}

pub fn series_vec_to_json(s: &[TruncSeries]) -> Value {
    Value::Array(s.iter().map(series_to_json).collect())
}

/// A coefficient array, or a polynomial string read at `precision`.
pub fn series_from_json(v: &Value, ring: &ScalarRing, precision: Option<usize>) -> Result<TruncSeries> {
    match v {
        Value::Array(items) => {
            let coeffs = scalars_from_json(v, ring, "series")?;
            let t = precision.unwrap_or(items.len());
            if t == 0 {
                return Err(invalid("truncation order must be positive"));
            }
            if coeffs.len() > t && coeffs[t..].iter().any(|c| !c.is_zero()) {
                return Err(invalid(format!("series has nonzero coefficients beyond t^{t}")));
            }
            Ok(TruncSeries::new(ring, coeffs, t))
        }
        _ => {
            let p = upoly_from_json(v, ring)?;
            let t = precision.ok_or_else(|| invalid("a truncation order is needed for a polynomial series"))?;
            if p.degree().is_some_and(|d| d >= t) {
                return Err(invalid(format!("{p} has terms beyond t^{t}")));
            }
            Ok(TruncSeries::from_upoly(&p, t))
        }
    }
}

pub fn series_vec_from_json(v: &Value, ring: &ScalarRing, precision: Option<usize>, what: &str) -> Result<Vec<TruncSeries>> {
    array(v, what)?.iter().map(|s| series_from_json(s, ring, precision)).collect()
}

pub fn ring_from_json(v: Option<&Value>) -> Result<ScalarRing> {
    match v {
        None => Ok(ScalarRing::rationals()),
        Some(r) => parse_ring(string(r, "ring")?),
    }
}

pub fn system_to_json(s: &SystemF) -> Value {
    let f: Vec<String> = s.f().iter().map(|p| p.to_string()).collect();
    json!({"n": s.n(), "l": s.l(), "f": f, "ring": s.ring().to_string()})
}

/// `{"n", "l", "f": [..], "ring"}`; `ring_override` replaces the field.
pub fn system_from_json(v: &Value, ring_override: Option<&ScalarRing>) -> Result<Arc<SystemF>> {
    let ring = match ring_override {
        Some(r) => r.clone(),
        None => ring_from_json(v.get("ring"))?,
    };
    let n = uint(field(v, "n")?, "n")? as usize;
    let l = uint(field(v, "l")?, "l")? as usize;
    if n == 0 || l == 0 {
        return Err(invalid("n and l must be positive"));
    }
    let mut names = crate::system::indexed_names("x", n);
    names.extend(crate::system::indexed_names("y", l));
    let vars = Arc::new(names);
    let polys = array(field(v, "f")?, "f")?
        .iter()
        .map(|p| match p {
            Value::String(s) => parse_poly_in(s, &vars, &ring),
            other => mpoly_from_json(other, &ring),
        })
        .collect::<Result<Vec<_>>>()?;
    build_system(&polys, n, l)
}

pub fn zr_to_json(p: &ZrPoint) -> Value {
    json!({
        "q": upoly_to_json(p.q()),
        "xbar": upolys_to_json(&p.xbar_reps()),
        "ybar": upolys_to_json(&p.ybar_reps()),
        "r": p.r(),
        "ring": p.ring().to_string(),
    })
}

fn point_ring(v: &Value, default: &ScalarRing) -> Result<ScalarRing> {
    match v.get("ring") {
        Some(r) => parse_ring(string(r, "ring")?),
        None => Ok(default.clone()),
    }
}

/// `{"q", "xbar", "ybar", "r"}`, with an optional `"ring"` (default `ring`).
pub fn zr_from_json(v: &Value, system: &Arc<SystemF>, ring: &ScalarRing) -> Result<ZrPoint> {
    let ring = point_ring(v, ring)?;
    let r = uint(field(v, "r")?, "r")? as u32;
    let q = upoly_from_json(field(v, "q")?, &ring)?;
    let xbar = upolys_from_json(field(v, "xbar")?, &ring, "xbar")?;
    let ybar = upolys_from_json(field(v, "ybar")?, &ring, "ybar")?;
    ZrPoint::new(system, r, q, &xbar, &ybar)
}

pub fn zr_ext_to_json(p: &ZrExtPoint) -> Value {
    json!({
        "q": upoly_to_json(p.q()),
        "xbar": upolys_to_json(&p.xbar_reps()),
        "ybar": upolys_to_json(&p.ybar_reps()),
        "r": p.r(),
        "ring": p.q().ring().to_string(),
    })
}

pub fn zr_ext_from_json(v: &Value, system: &Arc<SystemF>, ring: &ScalarRing) -> Result<ZrExtPoint> {
    let ring = point_ring(v, ring)?;
    let r = uint(field(v, "r")?, "r")? as u32;
    let q = upoly_from_json(field(v, "q")?, &ring)?;
    let xbar = upolys_from_json(field(v, "xbar")?, &ring, "xbar")?;
    let ybar = upolys_from_json(field(v, "ybar")?, &ring, "ybar")?;
    ZrExtPoint::new(system, r, q, &xbar, &ybar)
}

pub fn point_to_json(p: &Point) -> Value {
    json!({"x": scalars_to_json(&p.x), "y": scalars_to_json(&p.y)})
}

pub fn point_from_json(v: &Value, ring: &ScalarRing) -> Result<Point> {
    Ok(Point::new(scalars_from_json(field(v, "x")?, ring, "x")?, scalars_from_json(field(v, "y")?, ring, "y")?))
}

pub fn arrow_to_json(a: &Arrow) -> Value {
    json!({
        "base": point_to_json(a.base()),
        "xi": scalars_to_json(a.xi()),
        "eta": scalars_to_json(a.eta()),
        "r": a.r(),
        "v": scalar_to_json(a.v()),
        "target": point_to_json(&a.target()),
    })
}

/// `{"base": {"x", "y"}, "xi", "eta", "r"}`; extra fields are ignored.
pub fn arrow_from_json(v: &Value, system: &Arc<SystemF>) -> Result<Arrow> {
    let ring = point_ring(v, system.ring())?;
    let r = uint(field(v, "r")?, "r")? as u32;
    let base = point_from_json(field(v, "base")?, &ring)?;
    let xi = scalars_from_json(field(v, "xi")?, &ring, "xi")?;
    let eta = scalars_from_json(field(v, "eta")?, &ring, "eta")?;
    Arrow::new(system, r, base, xi, eta)
}

/// Insert `key: value` into a JSON object.
pub fn with_field(mut obj: Value, key: &str, value: Value) -> Value {
    if let Value::Object(map) = &mut obj {
        map.insert(key.to_string(), value);
    } else {
        let mut map = Map::new();
        map.insert(key.to_string(), value);
        return Value::Object(map);
    }
    obj
}
