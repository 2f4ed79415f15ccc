//! End-to-end acceptance checks for the library's guaranteed behaviours.
//!
//! Each test covers one guarantee and prints a single summary line
//! (visible with `--nocapture`); the test name states what is checked.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use jetcheck::{
    check_certificate, contact_order, flatness_verdict, integrate, is_ruled_sampled,
    nonequivalence_verdict, static_obstruction, validate_certificate_numeric, ContactGrade,
    ControlPoly, NumericReport, Obstruction, Outcome, Program, RuledParams, Ruledness, SampleBox,
};
use num::{BigInt, BigRational};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data(name: &str) -> Program {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {name}: {e}"));
    jetcheck::load_str(&text).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// Certificates verify exactly
// ---------------------------------------------------------------------------

/// The order-(1, 2) certificate between the two three-state systems passes
/// the full symbolic check with exact zero residuals, well under 30 seconds.
#[test]
fn cross_order_certificate_verifies_exactly() {
    let started = Instant::now();
    let prog = data("exx1.jet");
    let cert = prog.certificate("C1").expect("certificate C1");
    let report = check_certificate(cert, 25, 0, &SampleBox::default()).expect("check runs");
    for item in &report.items {
        assert!(item.passed, "failed: {} — {}", item.label, item.detail);
        assert!(
            item.residuals.is_empty(),
            "nonzero residual in {}",
            item.label
        );
    }
    let exact = report.items.iter().filter(|i| i.method == "exact").count();
    assert!(exact >= 6, "expected exact identities, saw {exact}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:.2?}, budget is 30 s");
    println!(
        "[PASS] cross-order certificate C1: {} checks ({} exact identities) in {:.2?}",
        report.items.len(),
        exact,
        elapsed
    );
}

/// The flatness certificate into the equation-free system passes the full
/// symbolic check exactly: the source is flat with the recorded flat outputs.
#[test]
fn flatness_certificate_verifies_exactly() {
    let prog = data("exx1.jet");
    let cert = prog.certificate("F1").expect("certificate F1");
    let target = cert.forward().target();
    assert_eq!(
        target.n(),
        target.m(),
        "a flatness certificate must land in a system with no equations"
    );
    let report = check_certificate(cert, 25, 0, &SampleBox::default()).expect("check runs");
    for item in &report.items {
        assert!(item.passed, "failed: {} — {}", item.label, item.detail);
    }
    println!(
        "[PASS] flatness certificate F1: {} checks passed; target {} has no equations",
        report.items.len(),
        target.name()
    );
}

/// Lifting the controls of a single integrator to a five-state tower (state,
/// drift derivative, controls' derivatives appended as new controls) and
/// projecting back is an equivalence, and the certificate verifies exactly.
#[test]
fn integrator_tower_certificate_verifies_exactly() {
    let prog = data("integrator.jet");
    let cert = prog.certificate("T1").expect("certificate T1");
    let report = check_certificate(cert, 25, 0, &SampleBox::default()).expect("check runs");
    for item in &report.items {
        assert!(item.passed, "failed: {} — {}", item.label, item.detail);
    }
    println!(
        "[PASS] integrator tower certificate T1: {} checks passed ({} -> {})",
        report.items.len(),
        cert.forward().source().name(),
        cert.forward().target().name()
    );
}

// ---------------------------------------------------------------------------
// Ruledness split between the two quartic-example systems
// ---------------------------------------------------------------------------

/// At 100 seeded sample points each: the system whose fiber is cubic in the
/// top control derivative carries a ruling line with infinite contact at
/// every point, while the quartic-fiber system is refuted by exact
/// elimination at every point of its domain.
#[test]
fn ruledness_splits_the_quartic_and_cubic_fiber_systems() {
    let prog = data("exx2.jet");
    let quartic = prog.system("Sigma").expect("system Sigma");
    let cubic = prog.system("SigmaP").expect("system SigmaP");
    let params = RuledParams {
        points: 100,
        seed: 0,
        ..Default::default()
    };

    let cubic_verdict = is_ruled_sampled(cubic, &params).expect("ruledness probe runs");
    match &cubic_verdict {
        Ruledness::RuledEvidence { rulings } => {
            assert_eq!(rulings.len(), 100, "one ruling per sampled point");
            for r in rulings {
                assert_eq!(
                    r.contact().grade(),
                    ContactGrade::Infinite,
                    "every ruling line must lie inside the fiber"
                );
            }
        }
        other => panic!("cubic-fiber system should be ruled, got {}", other.label()),
    }

    let quartic_verdict = is_ruled_sampled(quartic, &params).expect("ruledness probe runs");
    match &quartic_verdict {
        Ruledness::NotRuled { witnesses } => {
            assert_eq!(witnesses.len(), 100, "every sampled point must be refuted");
            for w in witnesses {
                assert!(
                    quartic.in_domain(&w.point).expect("domain evaluates"),
                    "witness must satisfy the system's domain"
                );
                assert!(
                    w.detail.starts_with("exact elimination"),
                    "witness must carry an exact refutation, got: {}",
                    w.detail
                );
            }
        }
        other => panic!(
            "quartic-fiber system should not be ruled, got {}",
            other.label()
        ),
    }

    println!(
        "[PASS] ruledness at 100 seeded points each: {} is ruled (infinite contact at every \
         point), {} is not ruled (exact refutation at every sampled point of its domain)",
        cubic.name(),
        quartic.name()
    );
    println!(
        "       note: circulating descriptions of this pair disagree about which of the two \
         carries the ruling; the computation settles it. With u = D(x2) - x1*D(x3) and \
         v = D(x3), the quartic fiber D(x1) = x2 + u^2 v^2 contains a line only where \
         u*v = 0 — exactly the locus its domain excludes — while the cubic fiber \
         D(y1) = y2 + u^2 v is a ruled surface: u |-> (u, lambda + u*y1, quadratic in u) \
         sweeps a line through every point. Any account labelling the quartic-fiber \
         system as the ruled one has the two systems swapped."
    );
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// Static equivalence between the two three-state systems is disproved: one
/// has affine velocity fibers (planes), the other does not.
#[test]
fn static_equivalence_is_disproved_by_fiber_geometry() {
    let prog = data("exx1.jet");
    let s = prog.system("Sigma").expect("system Sigma");
    let t = prog.system("SigmaP").expect("system SigmaP");
    let obstruction = static_obstruction(s, t, 60, 0);
    match &obstruction {
        Obstruction::Disproved { reason, .. } => {
            assert_eq!(*reason, "affine vs non-affine fiber");
        }
        Obstruction::Unknown { detail } => {
            panic!("expected a disproof, got UNKNOWN: {detail}")
        }
    }
    println!(
        "[PASS] static equivalence disproved ({}): {}",
        match &obstruction {
            Obstruction::Disproved { reason, .. } => reason,
            _ => unreachable!(),
        },
        obstruction.detail()
    );
}

/// The quartic-fiber system is neither dynamically equivalent to its
/// cubic-fiber partner nor flat: both verdicts rest on the same exact
/// ruledness refutations.
#[test]
fn nonequivalence_and_unflatness_verdicts() {
    let prog = data("exx2.jet");
    let quartic = prog.system("Sigma").expect("system Sigma");
    let cubic = prog.system("SigmaP").expect("system SigmaP");
    let params = RuledParams {
        points: 100,
        seed: 0,
        ..Default::default()
    };

    let verdict = nonequivalence_verdict(quartic, cubic, &params).expect("verdict runs");
    assert_eq!(verdict.outcome, Outcome::NotDynamicEquivalent);
    assert!(
        !verdict.witnesses.is_empty(),
        "a disproof must carry witnesses"
    );

    let flat = flatness_verdict(quartic, &params).expect("verdict runs");
    assert_eq!(flat.outcome, Outcome::NotFlat);
    assert!(!flat.witnesses.is_empty());

    println!(
        "[PASS] verdicts: {} vs {} -> {} ({} witnesses); {} alone -> {} ({} witnesses)",
        quartic.name(),
        cubic.name(),
        verdict.outcome.label(),
        verdict.witnesses.len(),
        quartic.name(),
        flat.outcome.label(),
        flat.witnesses.len()
    );
}

// ---------------------------------------------------------------------------
// Numeric validation lane
// ---------------------------------------------------------------------------

fn fd_error(report: &NumericReport) -> f64 {
    report
        .items
        .iter()
        .find(|i| i.label.contains("finite differences"))
        .expect("finite-difference item present")
        .max_error
}

/// Ten seeded trajectories of the single integrator, each staying at least
/// 0.1 away from the forward map's singular locus 1 - D(x2) - x2^3 = 0:
/// all certificate residuals stay within 1e-6 at step 1e-3, and halving the
/// step shrinks the finite-difference residual at second order.
///
/// The convergence ratio is asserted at >= 3.9 rather than a literal 4.0:
/// each maximum is taken over its own grid's interior points, and the finer
/// grid samples the smooth error envelope more densely, so the estimator
/// approaches the asymptotic 4.0 from below (measured values sit at
/// 3.98-4.00). Trajectories whose finite-difference residual falls below
/// 1e-9 are redrawn: down there the quantization floor, not the step size,
/// dominates, and no convergence order can be measured.
#[test]
fn numeric_validation_stays_within_tolerance_and_converges() {
    let prog = data("exx1.jet");
    let sigma = prog.system("Sigma").expect("system Sigma");
    let cert = prog.certificate("C1").expect("certificate C1");
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut worst_residual: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    let mut kept = 0u32;
    let mut draws = 0u32;
    while kept < 10 {
        draws += 1;
        assert!(
            draws <= 40,
            "only {kept}/10 draws produced a measurable convergence signal"
        );
        let a0 = rng.random_range(-0.35..0.35);
        let a1 = rng.random_range(0.08..0.2);
        let b0 = rng.random_range(-0.5..0.5);
        let b1 = rng.random_range(-0.5..0.5);
        let b2 = rng.random_range(0.2..0.5) * if rng.random() { 1.0 } else { -1.0 };
        let x0 = rng.random_range(-0.5..0.5);
        let x2 = ControlPoly::new(vec![a0, a1]);
        let x3 = ControlPoly::new(vec![b0, b1, b2]);

        // Distance of 1 - D(x2) - x2^3 from zero along the whole window.
        let margin = (0..=1000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                (1.0 - x2.derivative().eval(t) - x2.eval(t).powi(3)).abs()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(
            margin >= 0.1,
            "draw {draws}: trajectory strays within {margin:.3} of the singular locus"
        );

        let controls = [x2, x3];
        let coarse =
            integrate(sigma, &[x0], &controls, (0.0, 1.0), 1e-3, 3).expect("integration runs");
        let fine =
            integrate(sigma, &[x0], &controls, (0.0, 1.0), 5e-4, 3).expect("integration runs");
        let rc = validate_certificate_numeric(cert, &coarse, 1e-6).expect("validation runs");
        let rf = validate_certificate_numeric(cert, &fine, 1e-6).expect("validation runs");
        for item in rc.items.iter().chain(rf.items.iter()) {
            assert!(
                item.passed,
                "draw {draws}: {} exceeded tolerance ({:.3e} > {:.3e})",
                item.label, item.max_error, item.tol
            );
            worst_residual = worst_residual.max(item.max_error);
        }

        if fd_error(&rc) < 1e-9 {
            continue; // no measurable h^2 signal on this trajectory
        }
        kept += 1;
        let ratio = fd_error(&rc) / fd_error(&rf);
        worst_ratio = worst_ratio.min(ratio);
        assert!(
            ratio >= 3.9,
            "trajectory {kept}: halving the step shrank the finite-difference residual only \
             {ratio:.3}x; second-order convergence predicts 4x"
        );
    }

    println!(
        "[PASS] 10 seeded trajectories (of {draws} draws), margin >= 0.1 from the singular \
         locus: all residuals <= {worst_residual:.3e} (tolerance 1e-6); halving h = 1e-3 \
         shrank the finite-difference residual by at least {worst_ratio:.3}x"
    );
}

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

mod properties {
    use super::*;
    use jetcheck::dsl::{parse, parse_expr, serialize, Decl, SourceFile, Span, SystemDecl};
    use jetcheck::{expr_to_string, prolong_map, sample_solution_jet, Constraint, Expr, JetMap, JetVar};
    use num::ToPrimitive;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

    const CASES: u32 = 200;

    /// Deterministically seeded runner: the suite checks the same 200 cases
    /// on every run, like every other sampled computation in this crate.
    fn runner() -> TestRunner {
        TestRunner::new_with_rng(
            Config {
                cases: CASES,
                max_global_rejects: 40_000,
                ..Config::default()
            },
            TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
        )
    }

    fn reject(why: &'static str) -> TestCaseError {
        TestCaseError::reject(why)
    }

    /// Variables used by the random expressions (parser-level names).
    fn arb_var() -> impl Strategy<Value = JetVar> {
        prop_oneof![
            Just(JetVar::plain("x", 0)),
            Just(JetVar::plain("x", 1)),
            Just(JetVar::plain("y", 0)),
            Just(JetVar::plain("u", 2)),
        ]
    }

    /// General expression trees: sums, products, integer powers, quotients.
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            3 => (1i64..=3).prop_map(Expr::int),
            2 => ((-4i64..=4), prop_oneof![Just(1i64), Just(2), Just(4)])
                .prop_filter("nonzero", |(n, _)| *n != 0)
                .prop_map(|(n, d)| Expr::ratio(n, d)),
            5 => arb_var().prop_map(Expr::var),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                3 => proptest::collection::vec(inner.clone(), 2..=3).prop_map(Expr::add),
                3 => proptest::collection::vec(inner.clone(), 2..=2).prop_map(Expr::mul),
                2 => (inner.clone(), prop_oneof![Just(-2i64), Just(-1), Just(2), Just(3)])
                    .prop_map(|(e, k)| Expr::pow(e, k)),
                2 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
                1 => inner.prop_map(Expr::neg),
            ]
        })
    }

    /// Differentiation satisfies the product and quotient rules on random
    /// expression pairs.
    #[test]
    fn prop_differentiation_obeys_product_and_quotient_rules() {
        runner()
            .run(&(arb_expr(), arb_expr()), |(a, b)| {
                let v = JetVar::plain("x", 0);
                let da = a.differentiate(&v);
                let db = b.differentiate(&v);

                let product = Expr::mul(vec![a.clone(), b.clone()]).differentiate(&v);
                let expected = Expr::add(vec![
                    Expr::mul(vec![da.clone(), b.clone()]),
                    Expr::mul(vec![a.clone(), db.clone()]),
                ]);
                let zero = Expr::sub(product, expected)
                    .is_zero()
                    .map_err(|_| reject("zero denominator"))?;
                prop_assert!(zero, "product rule violated");

                let b_zero = b.is_zero().map_err(|_| reject("zero denominator"))?;
                if b_zero {
                    return Err(reject("quotient by the zero expression"));
                }
                let quotient = Expr::div(a.clone(), b.clone()).differentiate(&v);
                let expected = Expr::div(
                    Expr::sub(Expr::mul(vec![da, b.clone()]), Expr::mul(vec![a, db])),
                    Expr::pow(b, 2),
                );
                let zero = Expr::sub(quotient, expected)
                    .is_zero()
                    .map_err(|_| reject("zero denominator"))?;
                prop_assert!(zero, "quotient rule violated");
                Ok(())
            })
            .unwrap();
        println!("[PASS] product and quotient rules hold on {CASES} random expression pairs");
    }

    /// Magnitude envelope of an expression at a point: bounds every partial
    /// sum in its evaluation (and in the evaluation of its expanded normal
    /// form), so it calibrates the floating-point error budget.
    fn envelope(e: &Expr, env: &BTreeMap<JetVar, f64>) -> f64 {
        match e {
            Expr::Rat(q) => q.to_f64().map(f64::abs).unwrap_or(f64::INFINITY),
            Expr::Var(v) => env.get(v).map(|x| x.abs()).unwrap_or(f64::INFINITY),
            Expr::Add(items) => items.iter().map(|i| envelope(i, env)).sum(),
            Expr::Mul(items) => items.iter().map(|i| envelope(i, env)).product(),
            Expr::Pow(b, k) if *k >= 0 => envelope(b, env).powi(*k as i32),
            Expr::Pow(b, k) => match b.eval_f64(env) {
                Ok(v) if v.abs() > 1e-2 => v.abs().powi(*k as i32),
                _ => f64::INFINITY,
            },
            Expr::Div(a, b) => match b.eval_f64(env) {
                Ok(v) if v.abs() > 1e-2 => envelope(a, env) / v.abs(),
                _ => f64::INFINITY,
            },
        }
    }

    /// Normalization is idempotent, and the normalized expression evaluates
    /// to the same value as the original within 1e-12 relative tolerance at
    /// random well-conditioned points.
    #[test]
    fn prop_normalization_is_idempotent_and_numerically_sound() {
        let vars = [
            JetVar::plain("x", 0),
            JetVar::plain("x", 1),
            JetVar::plain("y", 0),
            JetVar::plain("u", 2),
        ];
        let values = proptest::collection::vec(-16i32..=16, vars.len());
        runner()
            .run(&(arb_expr(), values), |(e, vals)| {
                let n1 = e.normalize().map_err(|_| reject("zero denominator"))?;
                let n2 = n1
                    .normalize()
                    .map_err(|_| reject("zero denominator"))?;
                prop_assert_eq!(&n1, &n2, "normalize is not idempotent");

                // Dyadic sample point: exactly representable in f64.
                let env: BTreeMap<JetVar, f64> = vars
                    .iter()
                    .cloned()
                    .zip(vals.iter().map(|k| f64::from(*k) / 8.0))
                    .collect();
                if envelope(&e, &env).max(envelope(&n1, &env)) > 200.0 {
                    return Err(reject("ill-conditioned at this point"));
                }
                let (v0, v1) = match (e.eval_f64(&env), n1.eval_f64(&env)) {
                    (Ok(v0), Ok(v1)) => (v0, v1),
                    _ => return Err(reject("denominator vanishes at the point")),
                };
                let tol = 1e-12 * v0.abs().max(v1.abs()).max(1.0);
                prop_assert!(
                    (v0 - v1).abs() <= tol,
                    "normalized form drifted: {} vs {} (tol {})",
                    v0,
                    v1,
                    tol
                );
                Ok(())
            })
            .unwrap();
        println!(
            "[PASS] normalization is idempotent and numerically sound on {CASES} random \
             expressions (1e-12 relative)"
        );
    }

    /// Polynomial expressions over the jet variables a source map of order 1
    /// may mention: drift state at order 0, control states at orders 0 and 1.
    fn arb_map_component(src: &jetcheck::ExplicitSystem) -> impl Strategy<Value = Expr> {
        let vars: Vec<JetVar> = vec![
            src.var("x1", 0),
            src.var("x2", 0),
            src.var("x2", 1),
            src.var("x3", 0),
            src.var("x3", 1),
        ];
        let term = (
            (-3i64..=3).prop_filter("nonzero", |n| *n != 0),
            proptest::collection::vec(0u32..=2, vars.len()),
        )
            .prop_map(move |(c, pows)| {
                let mut factors = vec![Expr::int(c)];
                for (v, p) in vars.iter().zip(pows) {
                    if p > 0 {
                        factors.push(Expr::pow(Expr::var(v.clone()), i64::from(p)));
                    }
                }
                Expr::mul(factors)
            });
        proptest::collection::vec(term, 1..=4).prop_map(Expr::add)
    }

    /// Dropping the top level of a prolonged map gives the prolongation one
    /// order lower: prolongation commutes with the jet-space projections.
    #[test]
    fn prop_projection_commutes_with_prolongation() {
        let prog = data("exx1.jet");
        let sigma = prog.system("Sigma").expect("system Sigma").clone();
        runner()
            .run(
                &(
                    arb_map_component(&sigma),
                    arb_map_component(&sigma),
                    arb_map_component(&sigma),
                    1u32..=3,
                ),
                |(c1, c2, c3, r)| {
                    let map = JetMap::new(
                        "R",
                        sigma.clone(),
                        sigma.clone(),
                        1,
                        vec![c1, c2, c3],
                        Vec::new(),
                    )
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let tall = prolong_map(&map, r)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let short = prolong_map(&map, r - 1)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    prop_assert_eq!(tall.len() as u32, r + 1);
                    prop_assert_eq!(short.len() as u32, r);
                    for (level_tall, level_short) in tall.iter().zip(short.iter()) {
                        prop_assert_eq!(level_tall, level_short);
                    }
                    Ok(())
                },
            )
            .unwrap();
        println!(
            "[PASS] projection commutes with prolongation on {CASES} random maps (orders <= 3)"
        );
    }

    /// The contact order of a line with the fiber does not depend on how the
    /// direction vector is scaled.
    #[test]
    fn prop_contact_order_ignores_direction_scaling() {
        let prog = data("exx2.jet");
        let quartic = prog.system("Sigma").expect("system Sigma").clone();
        let direction = proptest::collection::vec(-5i64..=5, 3)
            .prop_filter("nonzero direction", |w| w.iter().any(|c| *c != 0));
        let scale = ((-6i64..=6).prop_filter("nonzero", |n| *n != 0), 1i64..=4);
        runner()
            .run(
                &(0u64..=1_000, direction, scale),
                |(stream, w, (sn, sd))| {
                    let p = sample_solution_jet(&quartic, 1, 7, stream, &SampleBox::default())
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let w: Vec<BigRational> = w.into_iter().map(|c| rat(c, 1)).collect();
                    let c = rat(sn, sd);
                    let scaled: Vec<BigRational> = w.iter().map(|x| x * &c).collect();
                    let one = contact_order(&quartic, &p, &w, 4)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let two = contact_order(&quartic, &p, &scaled, 4)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    prop_assert_eq!(
                        one.grade(),
                        two.grade(),
                        "contact order changed under rescaling by {}",
                        c
                    );
                    Ok(())
                },
            )
            .unwrap();
        println!(
            "[PASS] contact order is invariant under direction rescaling on {CASES} random \
             point/direction/scale triples"
        );
    }

    /// The symbolic drift jets stored along an integrated trajectory agree
    /// with centered finite differences of the integrated values.
    #[test]
    fn prop_prolonged_drift_matches_finite_differences() {
        let prog = data("exx1.jet");
        let sigma = prog.system("Sigma").expect("system Sigma").clone();
        let h = 2e-3;
        let coeffs = (
            -0.3f64..0.3,
            -0.2f64..0.2,
            -0.1f64..0.1,
            -0.05f64..0.05,
        );
        runner()
            .run(
                &(coeffs.clone(), coeffs, -0.5f64..0.5),
                |((a0, a1, a2, a3), (b0, b1, b2, b3), x0)| {
                    let controls = [
                        ControlPoly::new(vec![a0, a1, a2, a3]),
                        ControlPoly::new(vec![b0, b1, b2, b3]),
                    ];
                    let traj = integrate(&sigma, &[x0], &controls, (0.0, 0.4), h, 3)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let fd = jetcheck::fd_jet(&traj.column(0, 0), 3, h)
                        .map_err(|e| TestCaseError::fail(e.to_string()))?;
                    for k in 1..=3usize {
                        for (i, fd_value) in fd[k].iter().enumerate() {
                            let symbolic = traj.jet(k as u32, i + k, 0);
                            prop_assert!(
                                (symbolic - fd_value).abs() <= 1e-6,
                                "level {} drift jet at step {} drifted: symbolic {} vs \
                                 finite-difference {}",
                                k,
                                i + k,
                                symbolic,
                                fd_value
                            );
                        }
                    }
                    Ok(())
                },
            )
            .unwrap();
        println!(
            "[PASS] prolonged drift jets match centered finite differences (1e-6) on {CASES} \
             random trajectories"
        );
    }

    /// Printing and re-parsing preserves the meaning of arbitrary expression
    /// trees, and on anything the parser itself produced the trip is the
    /// structural identity — for bare expressions and for whole files.
    #[test]
    fn prop_parse_inverts_serialize() {
        runner()
            .run(&(arb_expr(), arb_expr(), prop::bool::ANY), |(e, d, with_domain)| {
                // One trip lands in the parser's image and preserves meaning.
                let printed = expr_to_string(&e);
                let canon = parse_expr(&printed)
                    .map_err(|err| TestCaseError::fail(format!("`{printed}`: {err}")))?;
                match Expr::sub(canon.clone(), e.clone()).is_zero() {
                    Ok(same) => prop_assert!(same, "printing `{}` changed its value", printed),
                    Err(_) => return Err(reject("zero denominator")),
                }

                // From there on, print/parse is the structural identity.
                let reprinted = expr_to_string(&canon);
                let again = parse_expr(&reprinted)
                    .map_err(|err| TestCaseError::fail(format!("`{reprinted}`: {err}")))?;
                prop_assert_eq!(&again, &canon, "round-trip through `{}`", reprinted);

                let file = SourceFile {
                    decls: vec![Decl::System(SystemDecl {
                        name: "S".into(),
                        states: vec!["x".into(), "y".into(), "u".into()],
                        controls: vec!["y".into(), "u".into()],
                        equations: vec![("x".into(), canon.clone())],
                        domain: if with_domain {
                            let dc = parse_expr(&expr_to_string(&d))
                                .map_err(|err| TestCaseError::fail(err.to_string()))?;
                            vec![Constraint::NonZero(dc)]
                        } else {
                            Vec::new()
                        },
                        span: Span { start: 0, end: 0 },
                    })],
                };
                let text = serialize(&file);
                let refile = parse(&text)
                    .map_err(|err| TestCaseError::fail(format!("file round-trip: {err}\n{text}")))?;
                prop_assert_eq!(&refile, &file, "file round-trip through:\n{}", text);
                Ok(())
            })
            .unwrap();
        println!("[PASS] parse inverts serialize on {CASES} random expressions and files");
    }
}
