//! Seeded randomized campaigns. A campaign is a pure function of its
//! [`FuzzConfig`], so replaying a config reproduces the report byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::Algebra;
use crate::arc::{gk_split, join, FactorizedDeformation, HypersurfaceArc, XYExampleInstance};
use crate::error::{Error, Result};
use crate::groupoid::{
    arrow_from_endpoints, compose, enumerate_arrows_at, enumerate_points, fiber_group, group_axiom_fuzz, inverse,
    level_map, lie_algebroid_basis, split_points, unit, Arrow, FiberKind, Point, ENUMERATION_LIMIT,
};
use crate::matrix::SquareMatrix;
use crate::mpoly::MPoly;
use crate::parse::{parse_poly, parse_ring};
use crate::scalar::{is_prime, BaseField, Scalar, ScalarRing};
use crate::series::TruncSeries;
use crate::system::SystemF;
use crate::upoly::UPoly;
use crate::weierstrass::weierstrass_divide;
use crate::zr::{check_membership, forget, newton_inverse, BaseArc, ZrExtPoint, ZrPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    GroupoidAxioms,
    ZrBijection,
    WeierstrassRoundtrip,
    ArcRoundtrip,
    FiberClassify,
}

impl Campaign {
    pub const ALL: [Campaign; 5] = [
        Campaign::GroupoidAxioms,
        Campaign::ZrBijection,
        Campaign::WeierstrassRoundtrip,
        Campaign::ArcRoundtrip,
        Campaign::FiberClassify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::GroupoidAxioms => "groupoid-axioms",
            Campaign::ZrBijection => "zr-bijection",
            Campaign::WeierstrassRoundtrip => "weierstrass-roundtrip",
            Campaign::ArcRoundtrip => "arc-roundtrip",
            Campaign::FiberClassify => "fiber-classify",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Campaign> {
        Campaign::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown campaign `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Bounds {
    pub p_max: u64,
    pub n_max: usize,
    pub l_max: usize,
    pub degree_max: u32,
    pub a_max: u32,
    pub samples: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { p_max: 11, n_max: 2, l_max: 2, degree_max: 3, a_max: 4, samples: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub campaign: Campaign,
    pub bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub campaign: Campaign,
    pub seed: u64,
    pub bounds: Bounds,
    /// Cases that met the preconditions and were checked.
    pub cases: u64,
    /// Individual assertions evaluated.
    pub checks: u64,
    /// Generated cases rejected by a precondition (not failures).
    pub skipped: u64,
    /// Named counters specific to the campaign.
    pub counters: BTreeMap<String, u64>,
    pub failures: Vec<String>,
    pub pass: bool,
}

const FAILURE_CAP: usize = 20;
/// Number of sampled composable triples when exhaustive enumeration is too large.
pub const SAMPLED_TRIPLES: u64 = 10_000;
/// Largest `|U|` for which all composable triples are checked.
pub const EXHAUSTIVE_POINTS: usize = 30;

struct Tally {
    cases: u64,
    checks: u64,
    skipped: u64,
    counters: BTreeMap<String, u64>,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, checks: 0, skipped: 0, counters: BTreeMap::new(), failures: Vec::new(), failed: 0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.failed += 1;
        if self.failures.len() < FAILURE_CAP {
            self.failures.push(msg);
        }
    }

    fn bump(&mut self, key: &str, by: u64) {
        *self.counters.entry(key.to_string()).or_insert(0) += by;
    }

    fn finish(self, config: &FuzzConfig) -> FuzzReport {
        let mut counters = self.counters;
        counters.insert("failed".into(), self.failed);
        FuzzReport {
            campaign: config.campaign,
            seed: config.seed,
            bounds: config.bounds.clone(),
            cases: self.cases,
            checks: self.checks,
            skipped: self.skipped,
            counters,
            pass: self.failed == 0,
            failures: self.failures,
        }
    }
}

pub fn run(config: &FuzzConfig) -> Result<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let b = &config.bounds;
    let tally = match config.campaign {
        Campaign::GroupoidAxioms => groupoid_axioms(&mut rng, b)?,
        Campaign::ZrBijection => zr_bijection(&mut rng, b)?,
        Campaign::WeierstrassRoundtrip => weierstrass_roundtrip(&mut rng, b)?,
        Campaign::ArcRoundtrip => arc_roundtrip(&mut rng, b)?,
        Campaign::FiberClassify => fiber_classify(&mut rng, b)?,
    };
    Ok(tally.finish(config))
}

// ---- random elements ----

fn primes_up_to(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&p| is_prime(p)).collect()
}

fn random_base(rng: &mut ChaCha8Rng, k: &ScalarRing) -> Scalar {
    match k.base() {
        BaseField::Prime(p) => k.from_i64(rng.gen_range(0..*p as i64)),
        BaseField::Rationals => {
            let den = [1, 1, 1, 2, 3][rng.gen_range(0..5)];
            k.from_ratio(rng.gen_range(-4..=4), den).expect("nonzero denominator")
        }
    }
}

fn random_nonzero_base(rng: &mut ChaCha8Rng, k: &ScalarRing) -> Scalar {
    loop {
        let c = random_base(rng, k);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random element of `m^min_degree` (all of the ring when `min_degree = 0`).
pub fn random_in_power(rng: &mut ChaCha8Rng, ring: &ScalarRing, min_degree: u32) -> Scalar {
    let k = ring.residue_field();
    let mut acc = ring.zero();
    for exp in ring.basis() {
        if exp.iter().sum::<u32>() < min_degree || rng.gen_bool(0.3) {
            continue;
        }
        let c = random_base(rng, &k);
        acc = acc.add_ref(&ring.monomial(exp, c.coords()[0].clone()));
    }
    acc
}

pub fn random_scalar(rng: &mut ChaCha8Rng, ring: &ScalarRing) -> Scalar {
    random_in_power(rng, ring, 0)
}

pub fn random_maximal(rng: &mut ChaCha8Rng, ring: &ScalarRing) -> Scalar {
    random_in_power(rng, ring, 1)
}

pub fn random_unit(rng: &mut ChaCha8Rng, ring: &ScalarRing) -> Scalar {
    let c = random_nonzero_base(rng, &ring.residue_field()).coerce_into(ring).expect("residue constant");
    c.add_ref(&random_maximal(rng, ring))
}

fn random_upoly(rng: &mut ChaCha8Rng, ring: &ScalarRing, len: usize) -> UPoly {
    UPoly::from_coeffs(ring, (0..len).map(|_| random_scalar(rng, ring)).collect())
}

fn random_maximal_upoly(rng: &mut ChaCha8Rng, ring: &ScalarRing, len: usize) -> UPoly {
    UPoly::from_coeffs(ring, (0..len).map(|_| random_maximal(rng, ring)).collect())
}

/// Monic of degree `n` over `ring`.
fn random_monic(rng: &mut ChaCha8Rng, ring: &ScalarRing, n: usize) -> UPoly {
    random_upoly(rng, ring, n).add_ref(&UPoly::monomial(ring.one(), n))
}

/// `k[e1..es]/(all monomials of degree a)`.
pub fn truncated_ring(base: BaseField, s: usize, a: u32) -> Result<ScalarRing> {
    let gens = if s == 1 { vec!["e".to_string()] } else { (1..=s).map(|i| format!("e{i}")).collect() };
    ScalarRing::test_ring(base, gens, Vec::new(), a)
}

fn ring(text: &str) -> ScalarRing {
    parse_ring(text).expect("valid ring literal")
}

fn system(ring: &ScalarRing, n: usize, l: usize, f: &[&str]) -> Arc<SystemF> {
    SystemF::parse(ring, n, l, f).expect("valid system literal")
}

// ---- weierstrass-roundtrip ----

fn weierstrass_roundtrip(rng: &mut ChaCha8Rng, b: &Bounds) -> Result<Tally> {
    let mut tally = Tally::new();
    let odd_primes = primes_up_to(2, b.p_max.max(2));
    let d_max = b.degree_max.min(3) as usize;
    for case in 0..b.samples {
        let a = rng.gen_range(1..=b.a_max.max(1));
        let s = rng.gen_range(1..=3usize);
        let base = if case % 2 == 0 || odd_primes.is_empty() {
            BaseField::Rationals
        } else {
            BaseField::Prime(*odd_primes.choose(rng).expect("nonempty"))
        };
        let ring = truncated_ring(base, s, a)?;
        let d = rng.gen_range(0..=d_max);
        let t = a as usize * d + 2;
        let coeffs: Vec<Scalar> = (0..t)
            .map(|i| match i.cmp(&d) {
                std::cmp::Ordering::Less => random_maximal(rng, &ring),
                std::cmp::Ordering::Equal => random_unit(rng, &ring),
                std::cmp::Ordering::Greater => random_scalar(rng, &ring),
            })
            .collect();
        let f = TruncSeries::new(&ring, coeffs, t);
        tally.cases += 1;
        let w = match weierstrass_divide(&f) {
            Ok(w) => w,
            Err(e) => {
                tally.fail(format!("weierstrass_divide({f}) over {ring}: {e}"));
                continue;
            }
        };
        let k = ring.residue_field();
        tally.check(w.d == d, || format!("{f}: d = {} instead of {d}", w.d));
        tally.check(w.q.is_monic() && w.q.degree() == Some(d), || format!("{f}: q = {} is not monic of degree {d}", w.q));
        tally.check(w.q.residue() == UPoly::monomial(k.one(), d), || format!("{f}: q = {} is not t^{d} mod m", w.q));
        tally.check(w.u.coeff(0).is_unit(), || format!("{f}: u = {} is not a unit", w.u));
        let product = TruncSeries::from_upoly(&w.q, t).mul_ref(&w.u.with_precision(t)?);
        tally.check(product == f, || format!("{f}: q*u = {product}"));
    }
    Ok(tally)
}

// ---- zr-bijection ----

/// Exact polynomial arcs `(x(t), y(t))` on small systems, built so that
/// `Q(x, y)` is divisible by `q` exactly once generically.
struct ArcFamily {
    system: Arc<SystemF>,
    build: fn(&mut ChaCha8Rng, &ScalarRing, &UPoly, usize) -> (Vec<UPoly>, Vec<UPoly>),
}

fn zr_families(k: &ScalarRing, b: &Bounds) -> Vec<ArcFamily> {
    let mut out = vec![
        ArcFamily {
            system: system(k, 1, 1, &["y^2 - x"]),
            build: |rng, ring, q, len| {
                let y = q.mul_ref(&random_upoly(rng, ring, len));
                (vec![y.mul_ref(&y)], vec![y])
            },
        },
        ArcFamily {
            system: system(k, 1, 1, &["y*(y - x)"]),
            build: |rng, ring, q, len| {
                let x = q.mul_ref(&random_upoly(rng, ring, len));
                (vec![x.clone()], vec![x])
            },
        },
    ];
    if b.n_max >= 2 {
        out.push(ArcFamily {
            system: system(k, 2, 1, &["y^2 - x1 - x2"]),
            build: |rng, ring, q, len| {
                let y = q.mul_ref(&random_upoly(rng, ring, len));
                let x2 = random_upoly(rng, ring, 2 * len + 2);
                (vec![y.mul_ref(&y).sub_ref(&x2), x2], vec![y])
            },
        });
    }
    if b.l_max >= 2 {
        out.push(ArcFamily {
            system: system(k, 1, 2, &["y1^2 - x", "y2 - x*y1"]),
            build: |rng, ring, q, len| {
                let y1 = q.mul_ref(&random_upoly(rng, ring, len));
                let x = y1.mul_ref(&y1);
                let y2 = x.mul_ref(&y1);
                (vec![x], vec![y1, y2])
            },
        });
    }
    out
}

fn zr_bijection(rng: &mut ChaCha8Rng, b: &Bounds) -> Result<Tally> {
    let mut tally = Tally::new();
    let primes = primes_up_to(3, b.p_max.max(3));
    let qe = ring("QQ[e]/(e^2)");
    for case in 0..b.samples {
        let ring = if case % 2 == 0 && !primes.is_empty() {
            ScalarRing::prime_field(*primes.choose(rng).expect("nonempty"))?
        } else {
            qe.clone()
        };
        let families = zr_families(&ring.residue_field(), b);
        let fam = families.choose(rng).expect("nonempty");
        let sys = fam.system.clone();
        let r: u32 = rng.gen_range(3..=4);
        let big_n = rng.gen_range(1..=2usize);
        let q = random_monic(rng, &ring, big_n);
        let (x, y) = (fam.build)(rng, &ring, &q, big_n + 1);

        // forget then newton_inverse, from a point of Z_{r+1}
        let top = ZrPoint::new(&sys, r + 1, q.clone(), &x, &y)?;
        if !check_membership(&top).pass {
            tally.skipped += 1;
            continue;
        }
        tally.cases += 1;
        tally.bump("points", 1);
        let e = forget(&top)?;
        match newton_inverse(&e) {
            Ok(back) => tally.check(back == top, || format!("newton_inverse(forget({top})) = {back}")),
            Err(err) => tally.fail(format!("newton_inverse(forget({top})): {err}")),
        }

        // newton_inverse then forget, from a perturbed point of Z_r x V_{r+1}
        let qr = q.pow(r);
        let xs: Vec<UPoly> = x.iter().map(|xi| xi.add_ref(&qr.mul_ref(&random_upoly(rng, &ring, big_n)))).collect();
        let ys: Vec<UPoly> =
            y.iter().map(|yi| yi.add_ref(&q.pow(r - 1).mul_ref(&random_upoly(rng, &ring, big_n)))).collect();
        let ext = ZrExtPoint::new(&sys, r, q.clone(), &xs, &ys)?;
        tally.check(check_membership(&ext.underlying()).pass, || format!("perturbed point {} fails membership", ext.underlying()));
        tally.bump("points", 1);
        match newton_inverse(&ext) {
            Ok(lifted) => {
                tally.check(check_membership(&lifted).pass, || format!("lift {lifted} fails membership"));
                match forget(&lifted) {
                    Ok(down) => tally.check(down == ext, || format!("forget(newton_inverse(e)) differs for {lifted}")),
                    Err(err) => tally.fail(format!("forget({lifted}): {err}")),
                }
            }
            Err(err) => tally.fail(format!("newton_inverse at level {r}: {err}")),
        }
    }
    Ok(tally)
}

// ---- arc-roundtrip ----

fn arc_roundtrip(rng: &mut ChaCha8Rng, b: &Bounds) -> Result<Tally> {
    let mut tally = Tally::new();
    gk_roundtrip(rng, b, &mut tally)?;
    example_roundtrip(rng, b, &mut tally)?;
    example_negative(&mut tally)?;
    Ok(tally)
}

/// Split and join for `y^2 = x` around `γ0 = (t^2, t)`, `r = 3`, `T = 8`.
fn gk_roundtrip(rng: &mut ChaCha8Rng, b: &Bounds, tally: &mut Tally) -> Result<()> {
    const T: usize = 8;
    const R: u32 = 3;
    let k = ScalarRing::rationals();
    let sys = system(&k, 1, 1, &["y^2 - x"]);
    let gamma0 = BaseArc::new(&sys, vec![UPoly::from_ints(&k, &[0, 0, 1])], vec![UPoly::t(&k)])?;
    let orders: Vec<u32> = (2..=b.a_max.clamp(2, 3)).collect();
    for case in 0..b.samples {
        let a = orders[case as usize % orders.len()];
        let ring = truncated_ring(BaseField::Rationals, 1, a)?;
        let deformation = |rng: &mut ChaCha8Rng| {
            let y = UPoly::t(&ring).add_ref(&random_maximal_upoly(rng, &ring, T));
            let y = TruncSeries::from_upoly(&y, T);
            (vec![y.mul_ref(&y)], vec![y])
        };
        let (x, y) = deformation(rng);
        tally.cases += 1;
        let (zr, tail) = match gk_split(&sys, &gamma0, &x, &y, R) {
            Ok(s) => s,
            Err(err) => {
                tally.fail(format!("gk_split({}, {}): {err}", x[0], y[0]));
                continue;
            }
        };
        tally.check(check_membership(&zr).pass, || format!("split point {zr} fails membership"));
        // x at t^T pins down the m^j part of y only modulo t^(T - j·N).
        let known = T - (a as usize - 1) * zr.degree();
        match join(&sys, &gamma0, &zr, &tail, T) {
            Ok((x2, y2)) => {
                let on_x = sys.eval_f(&x2, &y2).map(|f| f.iter().all(|c| c.is_zero())).unwrap_or(false);
                tally.check(on_x, || format!("join output ({}, {}) is off X", x2[0], y2[0]));
                let same_y = y2[0].with_precision(known)? == y[0].with_precision(known)?;
                tally.check(x2 == x && same_y, || format!("join(gk_split) moves ({}, {}) to ({}, {})", x[0], y[0], x2[0], y2[0]))
            }
            Err(err) => tally.fail(format!("join for {zr}: {err}")),
        }
        // The other direction: a fresh tail over the same point.
        let room = T - R as usize * zr.degree();
        let fresh: Vec<UPoly> = vec![random_maximal_upoly(rng, &ring, room)];
        match join(&sys, &gamma0, &zr, &fresh, T).and_then(|(x3, y3)| gk_split(&sys, &gamma0, &x3, &y3, R)) {
            Ok((zr3, tail3)) => {
                tally.check(zr3 == zr && tail3 == fresh, || format!("gk_split(join) moves {zr} with tail {}", fresh[0]))
            }
            Err(err) => tally.fail(format!("join/split for {zr} with tail {}: {err}", fresh[0])),
        }
        tally.bump("gk-deformations", 1);
    }
    Ok(())
}

/// Factorize and unfactorize on `y·x_{n+1} + g = 0`.
fn example_roundtrip(rng: &mut ChaCha8Rng, b: &Bounds, tally: &mut Tally) -> Result<()> {
    let rings: Vec<ScalarRing> = ["QQ[e]/(e^2)", "QQ[e]/(e^3)", "QQ[e1,e2]/(e1^2,e2^2,e1*e2)", "QQ[e1,e2]/(e1^2,e2^2)"]
        .iter()
        .map(|t| ring(t))
        .filter(|r| r.nilpotency() <= b.a_max.max(2))
        .collect();
    let k = ScalarRing::rationals();
    let examples: Vec<(usize, MPoly)> = vec![
        (1, parse_poly("x1^2", &["x1"], &k)?),
        (2, parse_poly("x1*x2", &["x1", "x2"], &k)?),
        (2, parse_poly("x1^2 - x2^3", &["x1", "x2"], &k)?),
    ];
    for case in 0..b.samples {
        let ring = &rings[case as usize % rings.len()];
        let (n, g) = examples.choose(rng).expect("nonempty");
        let a = ring.nilpotency();
        let t = a as usize + 3;
        let inst = XYExampleInstance::new(*n, g, ring, t)?;
        let mut xi: Vec<Scalar> = (0..*n).map(|_| random_maximal(rng, ring)).collect();
        let vanishes = |xi: &[Scalar]| g.change_ring(ring).and_then(|gg| gg.eval(xi)).map(|v| v.is_zero());
        if !vanishes(&xi)? {
            // Deep enough in m that every monomial of g vanishes.
            let depth = a.div_ceil(2);
            xi = (0..*n).map(|_| random_in_power(rng, ring, depth)).collect();
        }
        if !vanishes(&xi)? {
            tally.skipped += 1;
            continue;
        }
        let series = |rng: &mut ChaCha8Rng, one: bool| {
            let mut p = random_maximal_upoly(rng, ring, t - 1);
            if one {
                p = p.add_ref(&UPoly::one(ring));
            }
            TruncSeries::from_upoly(&p, t - 1)
        };
        let data = FactorizedDeformation {
            alpha: random_maximal(rng, ring),
            u: series(rng, true),
            xi,
            xtilde: (0..*n).map(|_| series(rng, false)).collect(),
        };
        tally.cases += 1;
        let arc = match inst.unfactorize(&data) {
            Ok(arc) => arc,
            Err(err) => {
                tally.fail(format!("unfactorize over {ring}: {err}"));
                continue;
            }
        };
        match inst.factorize(&arc) {
            Ok(back) => tally.check(back == data, || format!("factorize(unfactorize(data)) differs over {ring}")),
            Err(err) => tally.fail(format!("factorize over {ring}: {err}")),
        }
        match inst.factorize(&arc).and_then(|d| inst.unfactorize(&d)) {
            Ok(again) => tally.check(again == arc, || format!("unfactorize(factorize(arc)) differs over {ring}")),
            Err(err) => tally.fail(format!("round trip over {ring}: {err}")),
        }
        tally.bump("example-deformations", 1);
    }
    Ok(())
}

/// `g = x1^2` over `QQ[e]/(e^3)` with `x1 = e`: no `y(t)` exists.
pub fn example_negative_case() -> Result<Error> {
    let r = ring("QQ[e]/(e^3)");
    let k = ScalarRing::rationals();
    let inst = XYExampleInstance::new(1, &parse_poly("x1^2", &["x1"], &k)?, &r, 6)?;
    let arc = HypersurfaceArc {
        x: vec![TruncSeries::new(&r, vec![r.generator(0)], 6), TruncSeries::from_upoly(&UPoly::t(&r), 6)],
        y: TruncSeries::zero(&r, 6),
    };
    match inst.factorize(&arc) {
        Ok(d) => Err(Error::InvalidInput(format!("factorize accepted an arc off the hypersurface: {d:?}"))),
        Err(e) => Ok(e),
    }
}

fn example_negative(tally: &mut Tally) -> Result<()> {
    let err = example_negative_case()?;
    tally.check(matches!(err, Error::ConstraintViolated(_)), || format!("negative case gave {err}"));
    Ok(())
}

// ---- groupoid-axioms ----

pub const GROUPOID_SYSTEMS: [&str; 3] = ["y^2 - x", "y^2 - x^3", "y*(y - x)"];

fn groupoid_axioms(rng: &mut ChaCha8Rng, b: &Bounds) -> Result<Tally> {
    let mut tally = Tally::new();
    let mut primes = primes_up_to(5, b.p_max);
    if primes.is_empty() {
        primes = primes_up_to(3, b.p_max.max(3));
    }
    for f in GROUPOID_SYSTEMS {
        for &p in &primes {
            let k = ScalarRing::prime_field(p)?;
            let sys = system(&k, 1, 1, &[f]);
            for r in [2u32, 3] {
                groupoid_case(rng, &sys, r, &mut tally)?;
            }
        }
    }
    Ok(tally)
}

/// Axioms for one system and level over a finite field; also the level map
/// and the restriction to the different.
pub fn groupoid_case(rng: &mut ChaCha8Rng, sys: &Arc<SystemF>, r: u32, tally_out: &mut impl GroupoidTally) -> Result<()> {
    let (u, delta) = split_points(sys, ENUMERATION_LIMIT)?;
    let m = u.len();
    let mut arrows: Vec<Vec<Arrow>> = Vec::with_capacity(m);
    for p in &u {
        arrows.push(u.iter().map(|pt| arrow_from_endpoints(sys, r, p, pt)).collect::<Result<_>>()?);
    }
    let lower: Option<Vec<Vec<Arrow>>> = if r >= 3 {
        Some(
            u.iter()
                .map(|p| u.iter().map(|pt| arrow_from_endpoints(sys, r - 1, p, pt)).collect::<Result<_>>())
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    for i in 0..m {
        let e = unit(sys, r, &u[i])?;
        tally_out.record(arrows[i][i] == e, || format!("arrow_from_endpoints({0}, {0}) is not the unit", u[i]));
        for j in 0..m {
            let a = &arrows[i][j];
            tally_out.record(a.target() == u[j], || format!("target of {a} is not {}", u[j]));
            tally_out.record(compose(&e, a)? == *a, || format!("left unit fails for {a}"));
            tally_out.record(compose(a, &unit(sys, r, &u[j])?)? == *a, || format!("right unit fails for {a}"));
            let inv = inverse(a)?;
            tally_out.record(inv == arrows[j][i], || format!("inverse of {a} disagrees with the endpoint arrow"));
            tally_out.record(compose(a, &inv)? == e, || format!("a*a^-1 is not the unit for {a}"));
            tally_out.record(inv.v().mul_ref(a.v()).is_one(), || format!("v(a^-1) v(a) != 1 for {a}"));
            let q_base = sys.eval_q(&u[i].x, &u[i].y)?;
            let q_target = sys.eval_q(&u[j].x, &u[j].y)?;
            tally_out.record(q_target == a.v().mul_ref(&q_base), || format!("Q(target) != v Q(base) for {a}"));
            if let Some(lower) = &lower {
                tally_out.record(level_map(a)? == lower[i][j], || format!("level map of {a} disagrees with endpoints"));
            }
        }
    }
    let quads = (m as u64).pow(4);
    let exhaustive = m <= EXHAUSTIVE_POINTS;
    let rounds = if m == 0 { 0 } else if exhaustive { quads } else { SAMPLED_TRIPLES };
    for idx in 0..rounds {
        let (i, j, k, l) = if exhaustive {
            let mm = m as u64;
            ((idx / (mm * mm * mm)) as usize, ((idx / (mm * mm)) % mm) as usize, ((idx / mm) % mm) as usize, (idx % mm) as usize)
        } else {
            (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m))
        };
        let (a, b, c) = (&arrows[i][j], &arrows[j][k], &arrows[k][l]);
        let ab = compose(a, b)?;
        tally_out.record(ab == arrows[i][k], || format!("compose({a}, {b}) disagrees with the endpoint arrow"));
        tally_out.record(ab.v() == &a.v().mul_ref(b.v()), || format!("v is not multiplicative on {a}, {b}"));
        let left = compose(&ab, c)?;
        let right = compose(a, &compose(b, c)?)?;
        tally_out.record(left == right, || format!("associativity fails on {a}, {b}, {c}"));
        if let Some(lower) = &lower {
            if idx % 8 == 0 {
                let lowered = level_map(&ab)?;
                let expected = compose(&lower[i][j], &lower[j][k])?;
                tally_out.record(lowered == expected, || format!("level map is not multiplicative on {a}, {b}"));
            }
        }
        tally_out.triple();
    }
    for z in &delta {
        for a in enumerate_arrows_at(sys, r, z, ENUMERATION_LIMIT)? {
            tally_out.record(a.target() == *z, || format!("{a} based on the different moves its base"));
            tally_out.different_arrow();
        }
    }
    tally_out.case(m, exhaustive);
    Ok(())
}

/// Sink for [`groupoid_case`] results.
pub trait GroupoidTally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String);
    fn triple(&mut self);
    fn different_arrow(&mut self);
    fn case(&mut self, points: usize, exhaustive: bool);
}

impl GroupoidTally for Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.check(ok, what);
    }

    fn triple(&mut self) {
        self.bump("triples", 1);
    }

    fn different_arrow(&mut self) {
        self.bump("different-arrows", 1);
    }

    fn case(&mut self, points: usize, exhaustive: bool) {
        self.cases += 1;
        self.bump("u-points", points as u64);
        if exhaustive {
            self.bump("exhaustive-cases", 1);
        }
    }
}

/// Plain counters for callers outside this module.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GroupoidCounts {
    pub checks: u64,
    pub triples: u64,
    pub different_arrows: u64,
    pub cases: u64,
    pub exhaustive_cases: u64,
    pub failures: Vec<String>,
}

impl GroupoidTally for GroupoidCounts {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < FAILURE_CAP {
            self.failures.push(what());
        }
    }

    fn triple(&mut self) {
        self.triples += 1;
    }

    fn different_arrow(&mut self) {
        self.different_arrows += 1;
    }

    fn case(&mut self, _points: usize, exhaustive: bool) {
        self.cases += 1;
        if exhaustive {
            self.exhaustive_cases += 1;
        }
    }
}

// ---- fiber-classify ----

/// A named fiber instance: system text over a ring, level, expected kind,
/// and the field over which the group axioms are enumerated.
pub struct FiberInstance {
    pub label: &'static str,
    pub f: &'static str,
    pub ring: &'static str,
    pub r: u32,
    pub expected: FiberKind,
    pub axiom_ring: &'static str,
}

pub const FIBER_INSTANCES: [FiberInstance; 4] = [
    FiberInstance {
        label: "smooth parabola, r = 2",
        f: "y^2 - x",
        ring: "QQ",
        r: 2,
        expected: FiberKind::MultiplicativeSemidirect,
        axiom_ring: "GF(7)",
    },
    FiberInstance {
        label: "cusp, r = 2",
        f: "y^2 - x^3",
        ring: "QQ",
        r: 2,
        expected: FiberKind::TwoTorsionTimesAdditive,
        axiom_ring: "GF(7)",
    },
    FiberInstance {
        label: "smooth parabola, r = 3",
        f: "y^2 - x",
        ring: "QQ",
        r: 3,
        expected: FiberKind::Additive,
        axiom_ring: "GF(7)",
    },
    FiberInstance {
        label: "characteristic two",
        f: "y^2 + x*y - x",
        ring: "GF(2)",
        r: 2,
        expected: FiberKind::Additive,
        axiom_ring: "GF(2)",
    },
];

/// Enough triples to enumerate every fiber of [`FIBER_INSTANCES`].
pub const FIBER_EXHAUSTIVE_TRIPLES: u64 = 200_000;

/// Expected kind from multiplicity, level, singularity and characteristic.
pub fn expected_kind(m: Option<u32>, r: u32, singular: bool, characteristic: u64) -> FiberKind {
    if r >= 3 || m.is_none_or(|m| m >= 3) {
        FiberKind::Additive
    } else if singular {
        FiberKind::TwoTorsionTimesAdditive
    } else if characteristic == 2 {
        FiberKind::Additive
    } else {
        FiberKind::MultiplicativeSemidirect
    }
}

fn fiber_classify(rng: &mut ChaCha8Rng, b: &Bounds) -> Result<Tally> {
    let mut tally = Tally::new();
    for inst in &FIBER_INSTANCES {
        let k = ring(inst.ring);
        let sys = system(&k, 1, 1, &[inst.f]);
        let z = Point::new(vec![k.zero()], vec![k.zero()]);
        let report = fiber_group(&sys, inst.r, &z, None)?;
        tally.check(report.kind == inst.expected, || format!("{}: kind {}", inst.label, report.kind.name()));
        let kf = ring(inst.axiom_ring);
        let sys_f = system(&kf, 1, 1, &[inst.f]);
        let zf = Point::new(vec![kf.zero()], vec![kf.zero()]);
        let report_f = fiber_group(&sys_f, inst.r, &zf, None)?;
        let axioms = group_axiom_fuzz(&sys_f, &report_f, &zf, FIBER_EXHAUSTIVE_TRIPLES, rng.gen())?;
        tally.check(axioms.pass && axioms.exhaustive, || format!("{}: {:?}", inst.label, axioms.failures));
        tally.cases += 1;
        tally.bump("worked-instances", 1);
    }
    let primes = primes_up_to(2, b.p_max.clamp(2, 7));
    for _ in 0..b.samples {
        let p = *primes.choose(rng).expect("nonempty");
        let k = ScalarRing::prime_field(p)?;
        let n = rng.gen_range(1..=b.n_max.clamp(1, 2));
        let names = crate::system::indexed_names("x", n);
        let mut vars: Vec<String> = names.clone();
        vars.push("y".into());
        let vars = Arc::new(vars);
        // Normal form at the origin: no constant or linear y term.
        let mut f = MPoly::zero(&k, &vars);
        let y = MPoly::var(&k, &vars, n);
        let term = |rng: &mut ChaCha8Rng, m: MPoly, f: &mut MPoly| {
            let c = random_base(rng, &k);
            *f = f.add_ref(&m.scale_by(&c));
        };
        term(rng, y.pow(2), &mut f);
        term(rng, y.pow(3), &mut f);
        for i in 0..n {
            let xi = MPoly::var(&k, &vars, i);
            term(rng, xi.clone(), &mut f);
            term(rng, xi.mul_ref(&y), &mut f);
            term(rng, xi.pow(2), &mut f);
        }
        let sys = crate::system::build_system(&[f.clone()], n, 1)?;
        let r = rng.gen_range(2..=3u32);
        if sys.q().is_zero() {
            // Q must not vanish identically on X.
            tally.skipped += 1;
            continue;
        }
        let z = Point::new(vec![k.zero(); n], vec![k.zero()]);
        let report = match fiber_group(&sys, r, &z, None) {
            Ok(rep) => rep,
            Err(err) => {
                tally.fail(format!("fiber_group({f}) over GF({p}): {err}"));
                continue;
            }
        };
        tally.cases += 1;
        let expected = expected_kind(report.multiplicity, r, report.singular, p);
        tally.check(report.kind == expected, || format!("{f} over GF({p}), r = {r}: {} vs {}", report.kind.name(), expected.name()));
        let axioms = group_axiom_fuzz(&sys, &report, &z, 2_000, rng.gen())?;
        tally.check(axioms.pass, || format!("{f} over GF({p}), r = {r}: {:?}", axioms.failures));
        tally.bump(report.kind.name(), 1);
    }
    Ok(tally)
}

// ---- first-order check ----

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LieCheckReport {
    pub points: u64,
    pub off_different: u64,
    pub vectors: u64,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Random systems with `n, l <= 2` over small prime fields; random points
/// of `X`; every basis vector must be tangent to `X`, and where `Q != 0`
/// equal `Q^r` times the horizontal lift of `∂/∂x_i`.
pub fn lie_check(seed: u64, samples: u64, b: &Bounds) -> Result<LieCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LieCheckReport::default();
    let primes = primes_up_to(3, b.p_max.clamp(3, 7));
    while out.points < samples {
        let p = *primes.choose(&mut rng).expect("nonempty");
        let k = ScalarRing::prime_field(p)?;
        let n = rng.gen_range(1..=b.n_max.clamp(1, 2));
        let l = rng.gen_range(1..=b.l_max.clamp(1, 2));
        let sys = random_system(&mut rng, &k, n, l)?;
        let pts = enumerate_points(&sys, ENUMERATION_LIMIT)?;
        if pts.is_empty() {
            continue;
        }
        let r = rng.gen_range(2..=3u32);
        for _ in 0..4 {
            let pt = pts.choose(&mut rng).expect("nonempty");
            let basis = lie_algebroid_basis(&sys, r, pt)?;
            out.points += 1;
            let c = sys.eval_c(&pt.x, &pt.y)?;
            let dfdx = sys.eval_df_dx(&pt.x, &pt.y)?;
            let q = sys.eval_q(&pt.x, &pt.y)?;
            if !q.is_zero() {
                out.off_different += 1;
            }
            for (i, w) in basis.iter().enumerate() {
                out.vectors += 1;
                let (dx, dy) = w.split_at(n);
                for row in 0..l {
                    let mut s = k.zero();
                    for j in 0..n {
                        s = s.add_ref(&dfdx[row][j].mul_ref(&dx[j]));
                    }
                    for j in 0..l {
                        s = s.add_ref(&c.rows()[row][j].mul_ref(&dy[j]));
                    }
                    if !s.is_zero() && out.failures.len() < FAILURE_CAP {
                        out.failures.push(format!("{w:?} at {pt} on {:?} is not tangent", sys.f()));
                    }
                }
                if q.is_zero() {
                    if w.iter().any(|c| !c.is_zero()) && out.failures.len() < FAILURE_CAP {
                        out.failures.push(format!("nonzero vector at {pt} on the different"));
                    }
                    continue;
                }
                // Horizontal lift: C δy = -∂f/∂x_i, δx = e_i.
                let rhs: Vec<Scalar> = (0..l).map(|row| dfdx[row][i].neg_ref()).collect();
                let lift = solve(&c, &rhs)?;
                let qr = q.pow(r);
                let expected: Vec<Scalar> = (0..n)
                    .map(|j| if j == i { qr.clone() } else { k.zero() })
                    .chain(lift.iter().map(|c| c.mul_ref(&qr)))
                    .collect();
                if *w != expected && out.failures.len() < FAILURE_CAP {
                    out.failures.push(format!("w_{i} = {w:?} at {pt}, expected {expected:?}"));
                }
            }
        }
    }
    out.pass = out.failures.is_empty();
    Ok(out)
}

/// Gauss-Jordan solve over a field.
fn solve(m: &SquareMatrix<Scalar>, rhs: &[Scalar]) -> Result<Vec<Scalar>> {
    let size = rhs.len();
    let mut a: Vec<Vec<Scalar>> =
        m.rows().iter().zip(rhs).map(|(row, b)| row.iter().cloned().chain([b.clone()]).collect()).collect();
    for col in 0..size {
        let pivot = (col..size).find(|&i| !a[i][col].is_zero()).ok_or_else(|| Error::NotAUnit("singular Jacobian".into()))?;
        a.swap(col, pivot);
        let inv = a[col][col].try_inverse()?;
        a[col] = a[col].iter().map(|c| c.mul_ref(&inv)).collect();
        for i in 0..size {
            if i != col && !a[i][col].is_zero() {
                let factor = a[i][col].clone();
                let pr = a[col].clone();
                a[i] = a[i].iter().zip(&pr).map(|(e, pv)| e.sub_ref(&factor.mul_ref(pv))).collect();
            }
        }
    }
    Ok(a.into_iter().map(|row| row[size].clone()).collect())
}

/// Random system of `l` polynomials of total degree at most 2 whose `y`-Jacobian
/// determinant is not identically zero.
pub fn random_system(rng: &mut ChaCha8Rng, k: &ScalarRing, n: usize, l: usize) -> Result<Arc<SystemF>> {
    let mut names = crate::system::indexed_names("x", n);
    names.extend(crate::system::indexed_names("y", l));
    let vars = Arc::new(names);
    let gens: Vec<MPoly> = (0..n + l).map(|i| MPoly::var(k, &vars, i)).collect();
    loop {
        let mut polys = Vec::with_capacity(l);
        for j in 0..l {
            let mut f = MPoly::zero(k, &vars);
            // Keep a y_j term so that each equation involves its own y.
            f = f.add_ref(&gens[n + j].scale_by(&random_nonzero_base(rng, k)));
            for a in 0..n + l {
                if rng.gen_bool(0.5) {
                    f = f.add_ref(&gens[a].scale_by(&random_base(rng, k)));
                }
                for bb in a..n + l {
                    if rng.gen_bool(0.3) {
                        f = f.add_ref(&gens[a].mul_ref(&gens[bb]).scale_by(&random_base(rng, k)));
                    }
                }
            }
            polys.push(f);
        }
        let sys = crate::system::build_system(&polys, n, l)?;
        if !sys.q().is_zero() {
            return Ok(sys);
        }
    }
}
