//! Acceptance criteria 1 to 10, one PASS/FAIL line each. Exits nonzero if
//! any criterion fails. All comparisons are exact.

use std::time::{Duration, Instant};

use freediv::compose::{example_instances, normal_crossing_adjoint};
use freediv::derivations::{bracket_closed, verify_saito, Derivation, FreenessCertificate};
use freediv::discriminant::{self as disc, build_discriminant};
use freediv::parse::parse_polynomial;
use freediv::polylinalg::PolyMatrix;
use freediv::polyring::{integer, Polynomial, Ring, WeightSystem};
use freediv::stablemap::{self as stable, build_lambda};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

/// Certificates built along the way, checked for bracket closure in criterion 10.
type Bases = Vec<(String, FreenessCertificate)>;

fn within(start: Instant, limit: Duration, failures: &mut Vec<String>) {
    if start.elapsed() >= limit {
        failures.push(format!("took {:?}, limit {limit:?}", start.elapsed()));
    }
}

fn summary(failures: Vec<String>, ok: impl Into<String>) -> Outcome {
    if failures.is_empty() {
        Outcome::new(true, ok)
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

fn up_to_sign(a: &Polynomial, b: &Polynomial) -> bool {
    a == b || *a == -b.clone()
}

const LAMBDA3: [[&str; 3]; 3] = [
    ["-V1", "-V2", "W2"],
    ["-V2", "W2 + U1*V1", "-V1*W1"],
    ["W2", "-V1*W1", "V2*W1 - U1*W2"],
];

const LAMBDA4: [[&str; 4]; 4] = [
    ["-V1", "-V2", "-V3", "W2"],
    ["-V2", "U1*V1 - V3", "W2 + U2*V1", "-V1*W1"],
    ["-V3", "W2 + U2*V1", "U2*V2 - U1*V3 - V1*W2", "-V2*W1 + U1*W2"],
    ["W2", "-V1*W2", "-V2*W1 + U1*W2", "-V3*W1 + U2*W2"],
];

fn compare_displayed(k: usize, shown: &[&[&str]], failures: &mut Vec<String>) {
    let start = Instant::now();
    let p = build_lambda(k).expect("lambda");
    within(start, Duration::from_secs(1), failures);
    let ring = p.lambda.ring();
    for (i, row) in shown.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            let want = parse_polynomial(ring, s).expect("displayed entry parses");
            let got = p.lambda.get(i, j);
            if *got != want {
                failures.push(format!("k={k} ({},{}) built {got}, displayed {want}", i + 1, j + 1));
            }
        }
    }
}

fn criterion1() -> Outcome {
    let mut failures = Vec::new();
    let l3: Vec<&[&str]> = LAMBDA3.iter().map(|r| &r[..]).collect();
    let l4: Vec<&[&str]> = LAMBDA4.iter().map(|r| &r[..]).collect();
    compare_displayed(3, &l3, &mut failures);
    compare_displayed(4, &l4, &mut failures);
    summary(failures, "k=3 and k=4 match entry for entry")
}

fn monomial_coefficient(p: &Polynomial, powers: &[(&str, u32)]) -> num_rational::BigRational {
    let ring = p.ring();
    let mut e = vec![0; ring.nvars()];
    for (v, d) in powers {
        e[ring.index_of(v).expect("variable")] = *d;
    }
    p.coefficient(&e)
}

fn is_unit_sign(c: &num_rational::BigRational) -> bool {
    *c == integer(1) || *c == integer(-1)
}

fn criterion2() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 2..=4 {
        let p = build_lambda(k).expect("lambda");
        if p.lambda.transpose() != p.lambda {
            failures.push(format!("k={k} lambda not symmetric"));
        }
        let c = monomial_coefficient(&p.h, &[("W2", k as u32)]);
        if !is_unit_sign(&c) {
            failures.push(format!("k={k} W2^{k} coefficient {c}"));
        }
        let mono: Vec<(&str, u32)> = if k == 2 { vec![("V1", 1)] } else { vec![("W2", k as u32 - 2), ("V1", 1)] };
        let c = monomial_coefficient(&p.adjoint, &mono);
        if !is_unit_sign(&c) {
            failures.push(format!("k={k} W2^(k-2)*V1 coefficient {c} in m_kk"));
        }
        if !p.germ.pullback(&p.h).expect("pullback").is_zero() {
            failures.push(format!("k={k} h o f != 0"));
        }
        let x = Polynomial::var(&p.germ.source, "x").expect("x");
        let mkf = p.germ.pullback(&p.adjoint).expect("pullback");
        for j in 1..=k {
            let mj = p.germ.pullback(p.minor(j)).expect("pullback");
            if !up_to_sign(&mj, &(&x.pow((k - j) as u32) * &mkf)) {
                failures.push(format!("k={k} m{k}{j} o f"));
            }
        }
    }
    within(start, Duration::from_secs(30), &mut failures);
    summary(failures, "k=2..4 symmetric, unit distinguished monomials, pullback identities")
}

fn criterion3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut n = 0;
    for k in 2..=4 {
        let p = build_lambda(k).expect("lambda");
        let fields = stable::hl_linear_parts(k).expect("linear parts");
        let r = stable::first_order_tangency(&p, &fields).expect("tangency");
        n += r.checks.len();
        failures.extend(r.failures().iter().map(|c| format!("k={k} {}: {}", c.name, c.detail)));
    }
    within(start, Duration::from_secs(120), &mut failures);
    summary(failures, format!("{n} first-order relations for k=2..4"))
}

fn criterion4(bases: &mut Bases) -> Outcome {
    let mut failures = Vec::new();
    for (k, limit) in [(2, 10), (3, 600)] {
        let start = Instant::now();
        match stable::certify_theorem59(k, None) {
            Ok(r) => {
                failures.extend(r.checks.failures().iter().map(|c| format!("k={k} {}", c.name)));
                if let Err(e) = r.certificate.reverify() {
                    failures.push(format!("k={k} re-verify: {e}"));
                }
                bases.push((format!("D+A k={k}"), r.certificate));
            }
            Err(e) => failures.push(format!("k={k}: {e}")),
        }
        within(start, Duration::from_secs(limit), &mut failures);
    }
    let mut seen = Vec::new();
    for s in 0..3 {
        let seed = SEED + s;
        let constants = stable::random_adjoint_constants(2, seed);
        if seen.contains(&constants) {
            failures.push(format!("seed {seed} repeats constants"));
        }
        seen.push(constants.clone());
        match stable::certify_generic_adjoint(2, &constants, seed) {
            Ok(g) => {
                if let Err(e) = g.certificate.reverify() {
                    failures.push(format!("generic seed {seed}: {e}"));
                }
                bases.push((format!("generic adjoint seed {seed}"), g.certificate));
            }
            Err(e) => failures.push(format!("generic seed {seed}: {e}")),
        }
    }
    summary(failures, "k=2, k=3 and three generic k=2 adjoints certified")
}

/// Sylvester matrix of two univariate polynomials given by coefficient lists
/// (constant term first).
fn sylvester(ring: &Ring, f: &[Polynomial], g: &[Polynomial]) -> PolyMatrix {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut s = PolyMatrix::zero(ring, size, size);
    for r in 0..n {
        for (i, c) in f.iter().rev().enumerate() {
            s.set(r, r + i, c.clone());
        }
    }
    for r in 0..m {
        for (i, c) in g.iter().rev().enumerate() {
            s.set(n + r, r + i, c.clone());
        }
    }
    s
}

fn criterion5() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for mu in 2..=4 {
        let dd = build_discriminant(mu).expect("discriminant");
        if !dd.lambda.is_symmetric() {
            failures.push(format!("mu={mu} Lambda not symmetric"));
        }
        let det = dd.lambda.det_bareiss().expect("det");
        let m = &dd.milnor;
        let res = sylvester(&m.base, m.unfolding.coeffs(), m.fx().coeffs()).det_cofactor().expect("resultant");
        match res.exact_divide(&det).expect("divide") {
            Some(c) if c.is_constant() && !c.is_zero() => {}
            _ => failures.push(format!("mu={mu} det Lambda is not a constant multiple of Res(F, F_x)")),
        }
        let mut reports = disc::structure_checks(&dd).expect("structure");
        reports.extend(disc::linear_shape_checks(&dd).expect("shape"));
        reports.extend(disc::lemma5_checks(&dd).expect("lemma 5"));
        failures.extend(reports.failures().iter().map(|c| format!("mu={mu} {}: {}", c.name, c.detail)));
    }
    within(start, Duration::from_secs(60), &mut failures);
    summary(failures, "mu=2..4 resultant, tangency, shape, monomial, constant and scaling identities")
}

fn criterion6(bases: &mut Bases) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for mu in 2..=3 {
        match disc::certify_theorem60(mu, None) {
            Ok(r) => {
                failures.extend(r.checks.failures().iter().map(|c| format!("mu={mu} {}", c.name)));
                if let Err(e) = r.certificate.reverify() {
                    failures.push(format!("mu={mu} re-verify: {e}"));
                }
                if mu == 2 {
                    let u1 = Polynomial::var(r.data.adjoint.ring(), "u1").expect("u1");
                    if r.data.adjoint.monic() != u1 {
                        failures.push(format!("mu=2 adjoint {}", r.data.adjoint));
                    }
                }
                bases.push((format!("discriminant plus adjoint mu={mu}"), r.certificate));
            }
            Err(e) => failures.push(format!("mu={mu}: {e}")),
        }
    }
    within(start, Duration::from_secs(300), &mut failures);
    summary(failures, "mu=2, 3 certified, C(0) invertible with first column (0,..,0,c)")
}

fn criterion7(bases: &mut Bases) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for mu in 2..=3 {
        match disc::build_d0(mu, None) {
            Ok(d) => {
                let h2 = &d.hessian * &d.hessian;
                if d.pullback.exact_divide(&h2).expect("divide").is_none() {
                    failures.push(format!("mu={mu} H^2 does not divide"));
                }
                if d.pullback.exact_divide(&d.hessian).expect("divide") != Some(d.equation.clone()) {
                    failures.push(format!("mu={mu} equation is not the quotient by H"));
                }
                if !d.equation.is_squarefree().expect("squarefree") {
                    failures.push(format!("mu={mu} quotient not squarefree"));
                }
                if let Err(e) = d.certificate.reverify() {
                    failures.push(format!("mu={mu} re-verify: {e}"));
                }
                failures.extend(d.checks.failures().iter().map(|c| format!("mu={mu} {}", c.name)));
                bases.push((format!("D0 mu={mu}"), d.certificate));
            }
            Err(e) => failures.push(format!("mu={mu}: {e}")),
        }
    }
    within(start, Duration::from_secs(120), &mut failures);
    summary(failures, "mu=2, 3 quotient on the critical locus certified free")
}

fn criterion8(bases: &mut Bases) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 2..=6 {
        match normal_crossing_adjoint(k) {
            Ok((pair, checks)) => {
                failures.extend(checks.failures().iter().map(|c| format!("k={k} {}", c.name)));
                if let Err(e) = pair.certificate.reverify() {
                    failures.push(format!("k={k} re-verify: {e}"));
                }
                bases.push((format!("normal crossings plus adjoint k={k}"), pair.certificate));
            }
            Err(e) => failures.push(format!("k={k}: {e}")),
        }
    }
    within(start, Duration::from_secs(30), &mut failures);
    summary(failures, "k=2..6 determinant, certificate and commutators")
}

fn criterion9(bases: &mut Bases) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let instances = match example_instances() {
        Ok(v) => v,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let mut equations: Vec<Polynomial> = Vec::new();
    for (name, c) in &instances {
        if let Some(chk) = c.checks.get("log Jacobian det = f1...fk") {
            if !chk.passed {
                failures.push(format!("{name}: log Jacobian"));
            }
        } else {
            failures.push(format!("{name}: log Jacobian not checked"));
        }
        if let Err(e) = c.certificate.reverify() {
            failures.push(format!("{name}: {e}"));
        }
        equations.push(c.equation.clone());
        bases.push((name.clone(), c.certificate.clone()));
    }
    let distinct = equations.iter().enumerate().filter(|(i, e)| !equations[..*i].contains(e)).count();
    if distinct < 5 {
        failures.push(format!("only {distinct} distinct composites"));
    }
    for want in ["x1*x2*x3*(x1 + x2*x3)", "x1*x2*x3*x4*(x1*x2 + x3*x4)"] {
        let found = equations.iter().any(|e| {
            parse_polynomial(e.ring(), want).map(|w| up_to_sign(e, &w)).unwrap_or(false)
        });
        if !found {
            failures.push(format!("missing V({want})"));
        }
    }
    within(start, Duration::from_secs(60), &mut failures);
    summary(failures, format!("{distinct} distinct composites certified"))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ring3() -> Ring {
    WeightSystem::standard(["x", "y", "z"]).expect("ring")
}

fn poly_strategy(ring: Ring, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..3, 3), -4i64..=4), 0..=max_terms).prop_map(move |terms| {
        Polynomial::from_terms(&ring, terms.into_iter().map(|(e, c)| (e, integer(c))))
    })
}

fn field_strategy(ring: Ring) -> impl Strategy<Value = Derivation> {
    prop::collection::vec(poly_strategy(ring.clone(), 2), 3)
        .prop_map(move |c| Derivation::new(&ring, c).expect("field"))
}

fn property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
    failures: &mut Vec<String>,
) {
    if let Err(e) = runner(cases).run(&strategy, test) {
        failures.push(format!("{name}: {e}"));
    }
}

fn criterion10(bases: &Bases) -> Outcome {
    let mut failures = Vec::new();
    let r = ring3();
    let p = || poly_strategy(ring3(), 4);

    property(
        "ring axioms",
        200,
        (p(), p(), p()),
        |(a, b, c)| {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a + &(-a.clone())).is_zero());
            prop_assert_eq!(&a * &Polynomial::one(a.ring()), a.clone());
            Ok(())
        },
        &mut failures,
    );

    property(
        "gcd and exact division",
        100,
        (poly_strategy(ring3(), 3), poly_strategy(ring3(), 3), poly_strategy(ring3(), 2)),
        |(a, b, c)| {
            prop_assume!(!b.is_zero() && !c.is_zero());
            prop_assert_eq!((&a * &b).exact_divide(&b).unwrap(), Some(a.clone()));
            let ac = &a * &c;
            let bc = &b * &c;
            let g = ac.gcd(&bc).unwrap();
            prop_assert!(c.divides(&g).unwrap());
            prop_assert!(g.divides(&ac).unwrap() && g.divides(&bc).unwrap());
            Ok(())
        },
        &mut failures,
    );

    let entry = prop_oneof![Just(None), poly_strategy(ring3(), 2).prop_map(Some)];
    let matrices = (1usize..=4).prop_flat_map(move |n| {
        prop::collection::vec(entry.clone(), n * n).prop_map(move |es| (n, es))
    });
    let rr = r.clone();
    property(
        "Bareiss agrees with cofactor expansion",
        200,
        matrices,
        move |(n, es)| {
            let entries = es.into_iter().map(|e| e.unwrap_or_else(|| Polynomial::zero(&rr))).collect();
            let m = PolyMatrix::new(&rr, n, n, entries).unwrap();
            prop_assert_eq!(m.det_bareiss().unwrap(), m.det_cofactor().unwrap());
            Ok(())
        },
        &mut failures,
    );

    let f = || field_strategy(ring3());
    property(
        "bracket antisymmetry and Jacobi",
        100,
        (f(), f(), f()),
        |(a, b, c)| {
            let ab = a.lie_bracket(&b).unwrap();
            prop_assert_eq!(ab.clone(), b.lie_bracket(&a).unwrap().neg());
            let j1 = a.lie_bracket(&b.lie_bracket(&c).unwrap()).unwrap();
            let j2 = b.lie_bracket(&c.lie_bracket(&a).unwrap()).unwrap();
            let j3 = c.lie_bracket(&ab).unwrap();
            prop_assert!(j1.add(&j2).unwrap().add(&j3).unwrap().is_zero());
            Ok(())
        },
        &mut failures,
    );

    for (name, cert) in bases {
        match bracket_closed(cert) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("{name}: basis not bracket-closed")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    summary(failures, format!("600 random cases, {} constructed bases bracket-closed", bases.len()))
}

/// The umbrella with its adjoint, from its displayed Saito matrix.
fn umbrella_basis() -> FreenessCertificate {
    let r = WeightSystem::new([("x", 1), ("y", 2), ("z", 2)]).expect("ring");
    let q = |s: &str| parse_polynomial(&r, s).expect("parse");
    let cols = [["x", "2*y", "2*z"], ["x", "0", "z"], ["0", "2*z", "x^2"]];
    let fields: Vec<Derivation> =
        cols.iter().map(|c| Derivation::new(&r, c.iter().map(|s| q(s)).collect()).expect("field")).collect();
    verify_saito(&q("x*(z^2 - x^2*y)"), &fields).expect("umbrella certificate")
}

fn main() {
    let mut bases: Bases = vec![("umbrella plus adjoint".to_string(), umbrella_basis())];
    let results = [
        criterion1(),
        criterion2(),
        criterion3(),
        criterion4(&mut bases),
        criterion5(),
        criterion6(&mut bases),
        criterion7(&mut bases),
        criterion8(&mut bases),
        criterion9(&mut bases),
    ];
    let last = criterion10(&bases);
    let mut all = true;
    for (i, o) in results.iter().chain(std::iter::once(&last)).enumerate() {
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("{mark} criterion {}: {}", i + 1, o.detail);
        all &= o.passed;
    }
    if !all {
        std::process::exit(1);
    }
}
