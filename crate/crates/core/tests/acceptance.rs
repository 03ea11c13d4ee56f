//! One line per acceptance criterion, `PASS` or `FAIL`, then a single
//! assertion over all of them. Run with `--nocapture` to see the lines.

use std::sync::Arc;
use std::time::{Duration, Instant};

use newton_arcs::algebra::Algebra;
use newton_arcs::fuzz::{self, Bounds, Campaign, FuzzConfig, FIBER_EXHAUSTIVE_TRIPLES, FIBER_INSTANCES};
use newton_arcs::groupoid::{enumerate_arrows_at, fiber_group, group_axiom_fuzz, split_points, Point, ENUMERATION_LIMIT};
use newton_arcs::parse::{parse_poly, parse_ring};
use newton_arcs::scalar::ScalarRing;
use newton_arcs::system::{chart_identity_sides, chart_vars, SystemF};
use newton_arcs::zr::r2_counterexample_scan;

const SEED: u64 = 20_240_601;

// Pinned sizes and budgets.
const WEIERSTRASS_SERIES: u64 = 1000;
const WEIERSTRASS_BUDGET: Duration = Duration::from_secs(60);
const GROUPOID_BUDGET: Duration = Duration::from_secs(120);
const NEWTON_POINTS: u64 = 500;
const SCAN_BUDGET: Duration = Duration::from_secs(60);
const LIE_POINTS: u64 = 100;
const GK_DEFORMATIONS: u64 = 200;

struct Outcome {
    lines: Vec<String>,
    all_pass: bool,
}

impl Outcome {
    fn record(&mut self, n: u32, name: &str, pass: bool, detail: String) {
        let line = format!("{} criterion {n} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        self.all_pass &= pass;
    }
}

fn sys(ring: &ScalarRing, n: usize, l: usize, f: &[&str]) -> Arc<SystemF> {
    SystemF::parse(ring, n, l, f).unwrap()
}

fn config(campaign: Campaign, samples: u64) -> FuzzConfig {
    FuzzConfig { seed: SEED, campaign, bounds: Bounds { samples, ..Bounds::default() } }
}

fn weierstrass(out: &mut Outcome) {
    let start = Instant::now();
    let report = fuzz::run(&config(Campaign::WeierstrassRoundtrip, WEIERSTRASS_SERIES)).unwrap();
    let took = start.elapsed();
    let pass = report.pass && report.cases >= WEIERSTRASS_SERIES && took < WEIERSTRASS_BUDGET;
    out.record(1, "weierstrass round trip", pass, format!("{} series, {} failures, {:.1?}", report.cases, report.counters["failed"], took));
}

fn groupoid(out: &mut Outcome) {
    let start = Instant::now();
    let report = fuzz::run(&config(Campaign::GroupoidAxioms, 0)).unwrap();
    let took = start.elapsed();
    // 3 systems x 3 primes x 2 levels
    let pass = report.pass && report.cases == 18 && took < GROUPOID_BUDGET;
    out.record(
        2,
        "groupoid axioms",
        pass,
        format!(
            "{} cases, {} triples, {} exhaustive, {} failures, {:.1?}",
            report.cases,
            report.counters["triples"],
            report.counters.get("exhaustive-cases").copied().unwrap_or(0),
            report.counters["failed"],
            took
        ),
    );
}

fn newton(out: &mut Outcome) {
    let report = fuzz::run(&config(Campaign::ZrBijection, NEWTON_POINTS)).unwrap();
    let points = report.counters.get("points").copied().unwrap_or(0);
    let pass = report.pass && points >= NEWTON_POINTS;
    out.record(3, "newton bijection", pass, format!("{points} points, {} failures", report.counters["failed"]));
}

fn scan(out: &mut Outcome) {
    let k = ScalarRing::prime_field(5).unwrap();
    let p = parse_poly("x", &["x"], &k).unwrap();
    let start = Instant::now();
    let report = r2_counterexample_scan(&p, 5, ENUMERATION_LIMIT).unwrap();
    let took = start.elapsed();
    let pass = report.degenerate.is_none()
        && report.empty_fibers >= 1
        && report.multiple_fibers >= 1
        && took < SCAN_BUDGET;
    out.record(
        4,
        "r = 2 counterexample",
        pass,
        format!("{} empty fibers, {} fibers of size >= 2, {:.1?}", report.empty_fibers, report.multiple_fibers, took),
    );
}

fn fibers(out: &mut Outcome) {
    let mut pass = true;
    let mut kinds = Vec::new();
    for inst in &FIBER_INSTANCES {
        let k = parse_ring(inst.ring).unwrap();
        let s = sys(&k, 1, 1, &[inst.f]);
        let z = Point::new(vec![k.zero()], vec![k.zero()]);
        let kind = fiber_group(&s, inst.r, &z, None).unwrap().kind;
        pass &= kind == inst.expected;
        kinds.push(kind.name());
        let kf = parse_ring(inst.axiom_ring).unwrap();
        let sf = sys(&kf, 1, 1, &[inst.f]);
        let zf = Point::new(vec![kf.zero()], vec![kf.zero()]);
        let report = fiber_group(&sf, inst.r, &zf, None).unwrap();
        let axioms = group_axiom_fuzz(&sf, &report, &zf, FIBER_EXHAUSTIVE_TRIPLES, SEED).unwrap();
        pass &= axioms.pass && axioms.exhaustive;
    }
    out.record(5, "fiber classification", pass, kinds.join(", "));
}

fn different(out: &mut Outcome) {
    let mut arrows = 0u64;
    let mut moved = 0u64;
    let cases: [(&str, &[&str], usize, usize); 5] = [
        ("GF(5)", &["y^2 - x"], 1, 1),
        ("GF(7)", &["y^2 - x^3"], 1, 1),
        ("GF(5)", &["y*(y - x)"], 1, 1),
        ("GF(2)", &["y^2 + x*y - x"], 1, 1),
        ("GF(3)", &["y1^2 - x", "y2 - x*y1"], 1, 2),
    ];
    for (ring, f, n, l) in cases {
        let k = parse_ring(ring).unwrap();
        let s = sys(&k, n, l, f);
        let (_, delta) = split_points(&s, ENUMERATION_LIMIT).unwrap();
        for r in [2u32, 3] {
            for z in &delta {
                for a in enumerate_arrows_at(&s, r, z, ENUMERATION_LIMIT).unwrap() {
                    arrows += 1;
                    if a.target() != *z {
                        moved += 1;
                    }
                }
            }
        }
    }
    out.record(6, "restriction to the different", arrows > 0 && moved == 0, format!("{arrows} arrows, {moved} moved"));
}

fn lie(out: &mut Outcome) {
    let report = fuzz::lie_check(SEED, LIE_POINTS, &Bounds::default()).unwrap();
    let pass = report.pass && report.points >= LIE_POINTS && report.off_different > 0;
    out.record(
        7,
        "lie algebroid first order",
        pass,
        format!("{} points ({} off the different), {} vectors, {} failures", report.points, report.off_different, report.vectors, report.failures.len()),
    );
}

fn arcs(out: &mut Outcome) {
    let bounds = Bounds { samples: GK_DEFORMATIONS, a_max: 3, ..Bounds::default() };
    let report = fuzz::run(&FuzzConfig { seed: SEED, campaign: Campaign::ArcRoundtrip, bounds }).unwrap();
    let gk = report.counters.get("gk-deformations").copied().unwrap_or(0);
    let ex = report.counters.get("example-deformations").copied().unwrap_or(0);
    let negative = matches!(fuzz::example_negative_case().unwrap(), newton_arcs::error::Error::ConstraintViolated(_));
    let pass = report.pass && gk >= GK_DEFORMATIONS && ex > 0 && negative;
    out.record(
        8,
        "desk-scale split",
        pass,
        format!("{gk} split deformations, {ex} factorized deformations, negative case rejected: {negative}"),
    );
}

fn charts(out: &mut Outcome) {
    let q = ScalarRing::rationals();
    let systems: Vec<Arc<SystemF>> = vec![
        sys(&q, 1, 1, &["y^2 - x"]),
        sys(&q, 1, 1, &["y^2 - x^3"]),
        sys(&q, 1, 1, &["y*(y - x)"]),
        sys(&parse_ring("GF(2)").unwrap(), 1, 1, &["y^2 + x*y - x"]),
        sys(&q, 1, 2, &["y1 + y2^2", "y2 + x"]),
        sys(&q, 1, 2, &["y1^2 - x", "y2 - x*y1"]),
        sys(&q, 2, 1, &["y^2 - x1 - x2"]),
    ];
    let mut checked = 0;
    let mut bad = Vec::new();
    for s in &systems {
        for r in [2u32, 3] {
            let label = format!("{:?} r={r}", s.f().iter().map(|p| p.to_string()).collect::<Vec<_>>());
            let chart = match s.chart_polys(r) {
                Ok(c) => c,
                Err(e) => {
                    bad.push(format!("{label}: {e}"));
                    continue;
                }
            };
            let sides = chart_identity_sides(s, r).unwrap();
            let qr = sides.q_big.pow(r);
            let mut ok = chart.u.iter().zip(&sides.u_numerators).all(|(u, num)| qr.mul_ref(u) == *num);
            ok &= sides.q_big.mul_ref(&chart.v) == sides.v_numerator;
            let vars = chart_vars(s.n(), s.l());
            let (n, l) = (s.n(), s.l());
            let at_unit: Vec<_> = (0..vars.len())
                .map(|i| {
                    if i < n + l {
                        newton_arcs::mpoly::MPoly::var(s.ring(), &vars, i)
                    } else {
                        newton_arcs::mpoly::MPoly::zero(s.ring(), &vars)
                    }
                })
                .collect();
            ok &= chart.v.substitute(&at_unit).unwrap().is_one();
            ok &= chart.u.iter().all(|u| u.substitute(&at_unit).unwrap().is_zero());
            if !ok {
                bad.push(label);
            }
            checked += 1;
        }
    }
    out.record(9, "chart identities", bad.is_empty(), format!("{checked} charts, problems: {bad:?}"));
}

#[test]
fn acceptance() {
    let mut out = Outcome { lines: Vec::new(), all_pass: true };
    weierstrass(&mut out);
    groupoid(&mut out);
    newton(&mut out);
    scan(&mut out);
    fibers(&mut out);
    different(&mut out);
    lie(&mut out);
    arcs(&mut out);
    charts(&mut out);
    assert!(out.all_pass, "{}", out.lines.join("\n"));
}
