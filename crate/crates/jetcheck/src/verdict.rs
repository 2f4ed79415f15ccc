//! Static-equivalence checks, linear-invariant obstructions, and
//! necessary-condition verdicts.
//!
//! A static equivalence is a change of state coordinates (an order-0 map
//! pair) whose push-forward carries one system's equations into the
//! other's. Its existence forces pointwise linear invariants to agree:
//! state dimension, fiber dimension, affineness of fibers, and fiber
//! ruledness. [`static_obstruction`] disproves static equivalence by
//! exhibiting a differing invariant.
//!
//! Dynamic equivalence in turn forces ruledness on the side with more
//! states — and forces a static equivalence when the state dimensions are
//! equal. [`nonequivalence_verdict`] turns refuted ruledness plus a static
//! obstruction into a non-equivalence verdict, and [`flatness_verdict`]
//! refutes equivalence to any trivial system the same way. Both only ever
//! disprove: the underlying condition is necessary, not sufficient, so the
//! positive direction is always reported as `Unknown`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::Zero;

use crate::equiv::{Certificate, CheckItem, CheckReport, JetMap};
use crate::error::{Error, Result};
use crate::expr::{JetVar, RatFn};
use crate::prolong::reduce_rat;
use crate::ruled::{is_ruled_sampled, NotRuledWitness, RuledParams, Ruledness};
use crate::system::{sample_fiber_point_stream, ExplicitSystem, SampleBox};

/// Below this many agreeing samples, sampled invariants are not treated as
/// uniform and cannot disprove anything.
pub const MIN_UNIFORM_SAMPLES: u32 = 30;

/// Relative singular-value threshold for Jacobian nondegeneracy.
const RANK_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Static certificates
// ---------------------------------------------------------------------------

/// A claimed change of state coordinates between two systems: a pair of
/// order-0 maps declared mutually inverse.
#[derive(Clone, Debug)]
pub struct StaticCertificate {
    inner: Certificate,
}

impl StaticCertificate {
    pub fn new(name: &str, forward: JetMap, backward: JetMap) -> Result<StaticCertificate> {
        if forward.order() != 0 || backward.order() != 0 {
            return Err(Error::BadCertificate {
                name: name.to_string(),
                reason: "static certificates must use order-0 maps".to_string(),
            });
        }
        let (n, n2) = (forward.source().n(), forward.target().n());
        if n != n2 {
            return Err(Error::DimensionMismatch {
                what: "static certificate endpoints",
                expected: n,
                got: n2,
            });
        }
        let inner = Certificate::new(name, forward, backward)?;
        Ok(StaticCertificate { inner })
    }

    pub fn name(&self) -> &str {
        self.inner.name()
    }

    pub fn forward(&self) -> &JetMap {
        self.inner.forward()
    }

    pub fn backward(&self) -> &JetMap {
        self.inner.backward()
    }
}

/// Substitute one order-0 map's components into another's and compare with
/// the identity, canonically.
fn composes_to_identity(first: &JetMap, then: &JetMap, label: String) -> Result<CheckItem> {
    let mut bindings: BTreeMap<JetVar, RatFn> = BTreeMap::new();
    for (j, z) in then.source().states().iter().enumerate() {
        bindings.insert(then.source().var(z, 0), first.components_rat()[j].clone());
    }
    let mut residuals = Vec::new();
    for (i, s) in first.source().states().iter().enumerate() {
        let composed = then.components_rat()[i].substitute(&bindings)?;
        let residual = composed.sub(&RatFn::var(first.source().var(s, 0)));
        if !residual.is_zero() {
            residuals.push(residual.to_expr());
        }
    }
    let passed = residuals.is_empty();
    Ok(CheckItem {
        label,
        passed,
        method: "exact",
        detail: if passed {
            "composition is canonically the identity on states".to_string()
        } else {
            format!("{} state components differ from the identity", residuals.len())
        },
        residuals,
        witnesses: Vec::new(),
    })
}

/// Substituting `z = Φ₀(x)` and `ż = DΦ₀(x)·ẋ` into the target equations
/// must reduce to zero over the source system.
fn pushforward_item(map: &JetMap, label: String) -> Result<CheckItem> {
    let src = map.source();
    let tgt = map.target();
    let mut bindings: BTreeMap<JetVar, RatFn> = BTreeMap::new();
    for (j, z) in tgt.states().iter().enumerate() {
        let comp = &map.components_rat()[j];
        bindings.insert(tgt.var(z, 0), comp.clone());
        bindings.insert(tgt.var(z, 1), comp.total_derivative_free());
    }
    let mut residuals = Vec::new();
    for (i, zs) in tgt.drift_states().iter().enumerate() {
        let residual = RatFn::var(tgt.var(zs, 1)).sub(&tgt.f_rat()[i]);
        let substituted = residual.substitute(&bindings)?;
        let reduced = reduce_rat(&substituted, src)?;
        if !reduced.is_zero() {
            residuals.push(reduced.to_expr());
        }
    }
    let passed = residuals.is_empty();
    Ok(CheckItem {
        label,
        passed,
        method: "exact",
        detail: if passed {
            "push-forward carries the source equations into the target equations".to_string()
        } else {
            format!("{} target equations are not satisfied", residuals.len())
        },
        residuals,
        witnesses: Vec::new(),
    })
}

/// Numeric nondegeneracy of the state Jacobian at sampled points.
fn jacobian_item(
    map: &JetMap,
    samples: u32,
    seed: u64,
    bx: &SampleBox,
    label: String,
) -> Result<CheckItem> {
    let src = map.source();
    let n = src.n();
    let partials: Vec<Vec<RatFn>> = map
        .components_rat()
        .iter()
        .map(|comp| {
            src.states()
                .iter()
                .map(|s| comp.derivative(&src.var(s, 0)))
                .collect()
        })
        .collect();

    let mut degenerate = Vec::new();
    let mut singular_evals = 0u32;
    for i in 0..samples {
        let p = sample_fiber_point_stream(src, seed, u64::from(i), bx)?;
        let env = p.env_f64();
        let mut entries = Vec::with_capacity(n * n);
        let mut eval_ok = true;
        for row in &partials {
            for d in row {
                match d.eval_f64(&env) {
                    Ok(v) if v.is_finite() => entries.push(v),
                    _ => {
                        eval_ok = false;
                        break;
                    }
                }
            }
            if !eval_ok {
                break;
            }
        }
        if !eval_ok {
            singular_evals += 1;
            continue;
        }
        let jac = DMatrix::from_row_slice(n, n, &entries);
        let sv = jac.svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > RANK_TOLERANCE * smax) {
            if degenerate.len() < 3 {
                degenerate.push(p.clone());
            } else {
                degenerate.push(p);
                degenerate.truncate(3);
            }
        }
    }
    let passed = degenerate.is_empty();
    Ok(CheckItem {
        label,
        passed,
        method: "statistical",
        detail: format!(
            "state Jacobian nondegenerate at {}/{samples} samples ({singular_evals} undefined)",
            samples - degenerate.len().min(samples as usize) as u32
        ),
        residuals: Vec::new(),
        witnesses: degenerate,
    })
}

/// Verify a static certificate: canonical inverse identities both ways, the
/// push-forward of the equations both ways (exact), and numeric Jacobian
/// nondegeneracy at sampled points.
pub fn check_static_certificate(
    cert: &StaticCertificate,
    samples: u32,
    seed: u64,
    bx: &SampleBox,
) -> Result<CheckReport> {
    let f = cert.forward();
    let b = cert.backward();
    let mut report = CheckReport::default();
    report.items.push(composes_to_identity(
        f,
        b,
        format!("{}: backward after forward is the identity", cert.name()),
    )?);
    report.items.push(composes_to_identity(
        b,
        f,
        format!("{}: forward after backward is the identity", cert.name()),
    )?);
    report.items.push(pushforward_item(
        f,
        format!("{}: forward push-forward preserves the equations", cert.name()),
    )?);
    report.items.push(pushforward_item(
        b,
        format!("{}: backward push-forward preserves the equations", cert.name()),
    )?);
    report.items.push(jacobian_item(
        f,
        samples,
        seed,
        bx,
        format!("{}: forward Jacobian nondegenerate at samples", cert.name()),
    )?);
    report.items.push(jacobian_item(
        b,
        samples,
        seed,
        bx,
        format!("{}: backward Jacobian nondegenerate at samples", cert.name()),
    )?);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Linear-invariant obstructions
// ---------------------------------------------------------------------------

/// Canonically nonzero second partials of the right-hand sides with respect
/// to the control derivatives. Empty exactly when every fiber is affine.
fn nonzero_second_partials(sys: &ExplicitSystem) -> Vec<RatFn> {
    let ctrl: Vec<JetVar> = sys.controls().iter().map(|c| sys.var(c, 1)).collect();
    let mut out = Vec::new();
    for f in sys.f_rat() {
        for (i, a) in ctrl.iter().enumerate() {
            let d1 = f.derivative(a);
            for b in &ctrl[i..] {
                let d2 = d1.derivative(b);
                if !d2.is_zero() {
                    out.push(d2);
                }
            }
        }
    }
    out
}

/// True iff the velocity fibers are affine subspaces: all second partials
/// of `f` with respect to the control derivatives vanish canonically.
pub fn is_affine_fiber(sys: &ExplicitSystem) -> bool {
    nonzero_second_partials(sys).is_empty()
}

/// Does every one of `samples` fiber points make some second partial
/// nonzero (so the fiber is non-affine at every sampled point)?
fn uniformly_nonaffine(sys: &ExplicitSystem, samples: u32, seed: u64) -> Result<bool> {
    let parts = nonzero_second_partials(sys);
    if parts.is_empty() {
        return Ok(false);
    }
    let bx = SampleBox::default();
    for i in 0..samples {
        let p = sample_fiber_point_stream(sys, seed, u64::from(i), &bx)?;
        let mut nonzero_here = false;
        for part in &parts {
            match part.eval_exact(p.env()) {
                Ok(v) if !v.is_zero() => {
                    nonzero_here = true;
                    break;
                }
                Ok(_) => {}
                Err(_) => return Ok(false),
            }
        }
        if !nonzero_here {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the static-equivalence obstruction search.
#[derive(Clone, Debug)]
pub enum Obstruction {
    /// A linear-equivalence invariant provably differs; `reason` is one of
    /// "state dimension", "fiber dimension", "affine vs non-affine fiber",
    /// "fiber ruledness".
    Disproved { reason: &'static str, detail: String },
    Unknown { detail: String },
}

impl Obstruction {
    pub fn label(&self) -> &'static str {
        match self {
            Obstruction::Disproved { .. } => "DISPROVED",
            Obstruction::Unknown { .. } => "UNKNOWN",
        }
    }

    pub fn is_disproved(&self) -> bool {
        matches!(self, Obstruction::Disproved { .. })
    }

    pub fn detail(&self) -> &str {
        match self {
            Obstruction::Disproved { detail, .. } | Obstruction::Unknown { detail } => detail,
        }
    }
}

/// How a sampled ruledness verdict classifies for uniformity purposes.
enum RuledClass {
    AllRuled,
    AllRefuted,
    Mixed,
}

fn classify_ruledness(r: &Ruledness, total: u32) -> RuledClass {
    match r {
        Ruledness::RuledEvidence { .. } => RuledClass::AllRuled,
        Ruledness::NotRuled { witnesses } if witnesses.len() == total as usize => {
            RuledClass::AllRefuted
        }
        _ => RuledClass::Mixed,
    }
}

/// Search for a linear invariant separating the two systems: state
/// dimension, fiber dimension, fiber affineness (canonical on one side,
/// uniformly violated on the other), or fiber ruledness (verified rulings
/// everywhere on one side, exact refutation everywhere on the other).
/// Sampled invariants require at least [`MIN_UNIFORM_SAMPLES`] agreeing
/// samples to disprove; sampling problems degrade to `Unknown`, never to a
/// false disproof.
pub fn static_obstruction(
    s: &ExplicitSystem,
    t: &ExplicitSystem,
    samples: u32,
    seed: u64,
) -> Obstruction {
    if s.n() != t.n() {
        return Obstruction::Disproved {
            reason: "state dimension",
            detail: format!(
                "{} has {} states but {} has {}",
                s.name(),
                s.n(),
                t.name(),
                t.n()
            ),
        };
    }
    if s.m() != t.m() {
        return Obstruction::Disproved {
            reason: "fiber dimension",
            detail: format!(
                "{} has {}-dimensional fibers but {} has {}-dimensional fibers",
                s.name(),
                s.m(),
                t.name(),
                t.m()
            ),
        };
    }

    let mut notes: Vec<String> = Vec::new();

    let affine_s = is_affine_fiber(s);
    let affine_t = is_affine_fiber(t);
    if affine_s != affine_t {
        let (affine, other) = if affine_s { (s, t) } else { (t, s) };
        if samples < MIN_UNIFORM_SAMPLES {
            notes.push(format!(
                "affineness differs but {samples} samples are fewer than the {MIN_UNIFORM_SAMPLES} required for uniformity"
            ));
        } else {
            match uniformly_nonaffine(other, samples, seed) {
                Ok(true) => {
                    return Obstruction::Disproved {
                        reason: "affine vs non-affine fiber",
                        detail: format!(
                            "{} has affine fibers everywhere; {} has a non-affine fiber at every one of {samples} sampled points",
                            affine.name(),
                            other.name()
                        ),
                    };
                }
                Ok(false) => notes.push(format!(
                    "{} is not uniformly non-affine over the sampled points",
                    other.name()
                )),
                Err(e) => notes.push(format!(
                    "sampling {} for affineness failed: {e}",
                    other.name()
                )),
            }
        }
    }

    if samples >= MIN_UNIFORM_SAMPLES {
        let params = RuledParams {
            points: samples,
            seed,
            ..RuledParams::default()
        };
        match (is_ruled_sampled(s, &params), is_ruled_sampled(t, &params)) {
            (Ok(rs), Ok(rt)) => {
                let (cs, ct) = (
                    classify_ruledness(&rs, samples),
                    classify_ruledness(&rt, samples),
                );
                match (cs, ct) {
                    (RuledClass::AllRuled, RuledClass::AllRefuted) => {
                        return Obstruction::Disproved {
                            reason: "fiber ruledness",
                            detail: format!(
                                "every sampled fiber of {} carries a verified ruling while every sampled fiber of {} provably has none ({samples} samples each)",
                                s.name(),
                                t.name()
                            ),
                        };
                    }
                    (RuledClass::AllRefuted, RuledClass::AllRuled) => {
                        return Obstruction::Disproved {
                            reason: "fiber ruledness",
                            detail: format!(
                                "every sampled fiber of {} carries a verified ruling while every sampled fiber of {} provably has none ({samples} samples each)",
                                t.name(),
                                s.name()
                            ),
                        };
                    }
                    (cs, ct) => {
                        if matches!(cs, RuledClass::Mixed) || matches!(ct, RuledClass::Mixed) {
                            notes.push(
                                "mixed per-point ruledness outcomes; no uniform invariant"
                                    .to_string(),
                            );
                        } else {
                            notes.push("sampled ruledness agrees on both systems".to_string());
                        }
                    }
                }
            }
            (rs, rt) => {
                if let Err(e) = rs {
                    notes.push(format!("sampling {} for ruledness failed: {e}", s.name()));
                }
                if let Err(e) = rt {
                    notes.push(format!("sampling {} for ruledness failed: {e}", t.name()));
                }
            }
        }
    } else {
        notes.push(format!(
            "{samples} samples are fewer than the {MIN_UNIFORM_SAMPLES} required for sampled invariants"
        ));
    }

    if notes.is_empty() {
        notes.push("no linear invariant separates the systems".to_string());
    }
    Obstruction::Unknown {
        detail: notes.join("; "),
    }
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// Verdict outcome. Never asserts equivalence or flatness: the implemented
/// condition is necessary, so only disproofs are conclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    NotDynamicEquivalent,
    NotFlat,
    Unknown,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::NotDynamicEquivalent => "NOT_DYNAMIC_EQUIVALENT",
            Outcome::NotFlat => "NOT_FLAT",
            Outcome::Unknown => "UNKNOWN",
        }
    }
}

/// Which dimension comparison drove the verdict logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimensionCase {
    /// The left system has fewer states (n < n′).
    LeftSmaller,
    /// The left system has more states (n > n′).
    LeftLarger,
    /// Equal state dimensions (n = n′).
    Equal,
}

impl DimensionCase {
    pub fn label(&self) -> &'static str {
        match self {
            DimensionCase::LeftSmaller => "n < n'",
            DimensionCase::LeftLarger => "n > n'",
            DimensionCase::Equal => "n = n'",
        }
    }
}

/// A disproof (or declared ignorance) with re-checkable evidence.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Dimension case for equivalence verdicts; absent for flatness.
    pub case: Option<DimensionCase>,
    /// Fiber points where exact elimination refuted all ruling lines.
    pub witnesses: Vec<NotRuledWitness>,
    /// Name of the system the witnesses belong to.
    pub witness_system: Option<String>,
    /// The static obstruction consulted in the equal-dimension case.
    pub obstruction: Option<Obstruction>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn unknown(case: Option<DimensionCase>, notes: Vec<String>) -> Verdict {
        Verdict {
            outcome: Outcome::Unknown,
            case,
            witnesses: Vec::new(),
            witness_system: None,
            obstruction: None,
            notes,
        }
    }
}

fn ruledness_note(sys: &ExplicitSystem, r: &Ruledness) -> String {
    match r {
        Ruledness::RuledEvidence { rulings } => format!(
            "{}: verified rulings at all {} sampled points",
            sys.name(),
            rulings.len()
        ),
        Ruledness::NotRuled { witnesses } => format!(
            "{}: exact ruling refutation at {} sampled points",
            sys.name(),
            witnesses.len()
        ),
        Ruledness::Inconclusive { rulings, unresolved } => format!(
            "{}: {} rulings found, {} points unresolved (heuristic search failed)",
            sys.name(),
            rulings.len(),
            unresolved.len()
        ),
    }
}

/// Attempt to disprove dynamic equivalence of `left` and `right`.
///
/// Equivalence with unequal state dimensions forces the larger-dimension
/// system to be ruled, so an exact ruledness refutation there is a
/// disproof. With equal dimensions, equivalence forces a static
/// equivalence wherever neither system is ruled — so a static obstruction
/// together with an exact ruledness refutation on either side is a
/// disproof. Everything else is `Unknown`.
pub fn nonequivalence_verdict(
    left: &ExplicitSystem,
    right: &ExplicitSystem,
    params: &RuledParams,
) -> Result<Verdict> {
    use std::cmp::Ordering;

    let probe_larger = |larger: &ExplicitSystem, case: DimensionCase| -> Result<Verdict> {
        match is_ruled_sampled(larger, params) {
            Ok(Ruledness::NotRuled { witnesses }) => Ok(Verdict {
                outcome: Outcome::NotDynamicEquivalent,
                case: Some(case),
                witness_system: Some(larger.name().to_string()),
                witnesses,
                obstruction: None,
                notes: vec![format!(
                    "equivalence would force {} (the larger system) to be ruled near every point",
                    larger.name()
                )],
            }),
            Ok(other) => Ok(Verdict::unknown(
                Some(case),
                vec![ruledness_note(larger, &other)],
            )),
            Err(e) => Ok(Verdict::unknown(
                Some(case),
                vec![format!("sampling {} failed: {e}", larger.name())],
            )),
        }
    };

    match left.n().cmp(&right.n()) {
        Ordering::Less => probe_larger(right, DimensionCase::LeftSmaller),
        Ordering::Greater => probe_larger(left, DimensionCase::LeftLarger),
        Ordering::Equal => {
            let obstruction = static_obstruction(left, right, params.points, params.seed);
            if !obstruction.is_disproved() {
                let mut v = Verdict::unknown(
                    Some(DimensionCase::Equal),
                    vec![format!(
                        "no static obstruction found: {}",
                        obstruction.detail()
                    )],
                );
                v.obstruction = Some(obstruction);
                return Ok(v);
            }
            let mut notes = Vec::new();
            for sys in [left, right] {
                match is_ruled_sampled(sys, params) {
                    Ok(Ruledness::NotRuled { witnesses }) => {
                        return Ok(Verdict {
                            outcome: Outcome::NotDynamicEquivalent,
                            case: Some(DimensionCase::Equal),
                            witness_system: Some(sys.name().to_string()),
                            witnesses,
                            obstruction: Some(obstruction),
                            notes: vec![format!(
                                "static equivalence is obstructed and {} is provably not ruled at the witness points",
                                sys.name()
                            )],
                        });
                    }
                    Ok(other) => notes.push(ruledness_note(sys, &other)),
                    Err(e) => notes.push(format!("sampling {} failed: {e}", sys.name())),
                }
            }
            notes.insert(
                0,
                "static equivalence is obstructed, but neither system's ruledness is refuted"
                    .to_string(),
            );
            let mut v = Verdict::unknown(Some(DimensionCase::Equal), notes);
            v.obstruction = Some(obstruction);
            Ok(v)
        }
    }
}

/// Attempt to disprove flatness: a system equivalent to a trivial system
/// must be ruled near every point, so an exact ruledness refutation is a
/// proof of non-flatness.
pub fn flatness_verdict(sys: &ExplicitSystem, params: &RuledParams) -> Result<Verdict> {
    match is_ruled_sampled(sys, params) {
        Ok(Ruledness::NotRuled { witnesses }) => Ok(Verdict {
            outcome: Outcome::NotFlat,
            case: None,
            witness_system: Some(sys.name().to_string()),
            witnesses,
            obstruction: None,
            notes: vec![format!(
                "equivalence to a trivial system would force {} to be ruled near every point",
                sys.name()
            )],
        }),
        Ok(other) => Ok(Verdict::unknown(None, vec![ruledness_note(sys, &other)])),
        Err(e) => Ok(Verdict::unknown(
            None,
            vec![format!("sampling {} failed: {e}", sys.name())],
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::fixtures::{affine3, fiber_point, power1, power2, quadric3, trivial2, v};
    use crate::ruled::{contact_order, find_ruling, ContactGrade, RulingOutcome};
    use std::sync::Arc;

    fn small_params(points: u32) -> RuledParams {
        RuledParams {
            points,
            ..RuledParams::default()
        }
    }

    #[test]
    fn affineness_of_fibers_is_detected_canonically() {
        assert!(is_affine_fiber(&affine3()));
        assert!(is_affine_fiber(&trivial2()));
        assert!(!is_affine_fiber(&quadric3()));
        assert!(!is_affine_fiber(&power1()));
        assert!(!is_affine_fiber(&power2()));
    }

    #[test]
    fn dimension_mismatches_are_disproofs() {
        match static_obstruction(&trivial2(), &affine3(), 5, 0) {
            Obstruction::Disproved { reason, .. } => assert_eq!(reason, "state dimension"),
            other => panic!("expected disproof, got {}", other.label()),
        }
        // Same state count, different fiber dimension.
        let narrow = ExplicitSystem::new(
            "Narrow",
            vec!["x1".into(), "x2".into()],
            vec!["x2".into()],
            vec![("x1".to_string(), v("x2", 0))],
            vec![],
        )
        .unwrap();
        match static_obstruction(&narrow, &trivial2(), 5, 0) {
            Obstruction::Disproved { reason, .. } => assert_eq!(reason, "fiber dimension"),
            other => panic!("expected disproof, got {}", other.label()),
        }
    }

    #[test]
    fn affine_versus_quadric_is_a_static_obstruction() {
        match static_obstruction(&affine3(), &quadric3(), 30, 0) {
            Obstruction::Disproved { reason, .. } => {
                assert_eq!(reason, "affine vs non-affine fiber");
            }
            other => panic!("expected disproof, got {}: {}", other.label(), other.detail()),
        }
        // Symmetric in the arguments.
        match static_obstruction(&quadric3(), &affine3(), 30, 0) {
            Obstruction::Disproved { reason, .. } => {
                assert_eq!(reason, "affine vs non-affine fiber");
            }
            other => panic!("expected disproof, got {}", other.label()),
        }
    }

    #[test]
    fn a_system_is_never_obstructed_against_itself() {
        let s = affine3();
        match static_obstruction(&s, &s, 30, 0) {
            Obstruction::Unknown { .. } => {}
            Obstruction::Disproved { reason, detail } => {
                panic!("self-obstruction via {reason}: {detail}")
            }
        }
    }

    #[test]
    fn ruledness_separates_the_power_pair_statically() {
        match static_obstruction(&power2(), &power1(), 30, 0) {
            Obstruction::Disproved { reason, .. } => assert_eq!(reason, "fiber ruledness"),
            other => panic!("expected disproof, got {}: {}", other.label(), other.detail()),
        }
    }

    #[test]
    fn too_few_samples_cannot_disprove() {
        match static_obstruction(&affine3(), &quadric3(), 10, 0) {
            Obstruction::Unknown { detail } => {
                assert!(detail.contains("fewer than"), "unexpected detail: {detail}")
            }
            Obstruction::Disproved { reason, .. } => {
                panic!("10 samples must not disprove (got {reason})")
            }
        }
    }

    #[test]
    fn power_pair_is_not_dynamic_equivalent() {
        let verdict = nonequivalence_verdict(&power2(), &power1(), &small_params(30)).unwrap();
        assert_eq!(verdict.outcome, Outcome::NotDynamicEquivalent);
        assert_eq!(verdict.case, Some(DimensionCase::Equal));
        assert_eq!(verdict.witness_system.as_deref(), Some("Power2"));
        assert!(!verdict.witnesses.is_empty());
        assert!(verdict.obstruction.as_ref().unwrap().is_disproved());

        // Symmetric up to which side carries the witnesses.
        let swapped = nonequivalence_verdict(&power1(), &power2(), &small_params(30)).unwrap();
        assert_eq!(swapped.outcome, Outcome::NotDynamicEquivalent);
        assert_eq!(swapped.witness_system.as_deref(), Some("Power2"));
    }

    #[test]
    fn verdict_witnesses_reverify_exactly() {
        let verdict = nonequivalence_verdict(&power2(), &power1(), &small_params(30)).unwrap();
        let sys = power2();
        for w in verdict.witnesses.iter().take(5) {
            match find_ruling(&sys, &w.point, None, 4, 1).unwrap() {
                RulingOutcome::NotFound(nf) => assert!(nf.exact),
                RulingOutcome::Found(_) => panic!("witness point has a ruling after all"),
            }
        }
    }

    #[test]
    fn statically_distinct_but_both_ruled_is_unknown() {
        let verdict = nonequivalence_verdict(&affine3(), &quadric3(), &small_params(30)).unwrap();
        assert_eq!(verdict.outcome, Outcome::Unknown);
        assert_eq!(verdict.case, Some(DimensionCase::Equal));
        assert!(verdict.obstruction.as_ref().unwrap().is_disproved());
    }

    #[test]
    fn a_system_is_never_refuted_against_itself() {
        let s = power1();
        let verdict = nonequivalence_verdict(&s, &s, &small_params(30)).unwrap();
        assert_eq!(verdict.outcome, Outcome::Unknown);
    }

    #[test]
    fn unequal_dimensions_use_the_larger_system() {
        // The 2-state trivial system against the non-ruled 3-state quartic.
        let verdict = nonequivalence_verdict(&trivial2(), &power2(), &small_params(20)).unwrap();
        assert_eq!(verdict.outcome, Outcome::NotDynamicEquivalent);
        assert_eq!(verdict.case, Some(DimensionCase::LeftSmaller));
        assert_eq!(verdict.witness_system.as_deref(), Some("Power2"));

        let swapped = nonequivalence_verdict(&power2(), &trivial2(), &small_params(20)).unwrap();
        assert_eq!(swapped.outcome, Outcome::NotDynamicEquivalent);
        assert_eq!(swapped.case, Some(DimensionCase::LeftLarger));

        // Against a ruled larger system nothing can be concluded.
        let open = nonequivalence_verdict(&trivial2(), &power1(), &small_params(20)).unwrap();
        assert_eq!(open.outcome, Outcome::Unknown);
    }

    #[test]
    fn flatness_refutation_and_ignorance() {
        let bad = flatness_verdict(&power2(), &small_params(20)).unwrap();
        assert_eq!(bad.outcome, Outcome::NotFlat);
        assert!(!bad.witnesses.is_empty());

        let open = flatness_verdict(&affine3(), &small_params(20)).unwrap();
        assert_eq!(open.outcome, Outcome::Unknown);

        let trivial = flatness_verdict(&trivial2(), &small_params(20)).unwrap();
        assert_eq!(trivial.outcome, Outcome::Unknown);
    }

    fn identity_static_cert(sys: &ExplicitSystem) -> StaticCertificate {
        let arc = Arc::new(sys.clone());
        let comps: Vec<Expr> = sys.states().iter().map(|s| v(s, 0)).collect();
        let fwd = JetMap::new(
            "Id",
            Arc::clone(&arc),
            Arc::clone(&arc),
            0,
            comps.clone(),
            vec![],
        )
        .unwrap();
        let bwd = JetMap::new("IdBack", Arc::clone(&arc), arc, 0, comps, vec![]).unwrap();
        StaticCertificate::new("IdentityCert", fwd, bwd).unwrap()
    }

    #[test]
    fn identity_static_certificate_passes() {
        let sys = affine3();
        let cert = identity_static_cert(&sys);
        let report =
            check_static_certificate(&cert, 10, 0, &SampleBox::default()).unwrap();
        assert!(report.passed(), "items: {:?}", report.items);
    }

    #[test]
    fn linear_change_of_coordinates_passes() {
        // z = (x1, x2 + x1, x3) carries D(x1) = x2 into D(z1) = z2 - z1.
        let src = Arc::new(affine3());
        let tgt = Arc::new(
            ExplicitSystem::new(
                "Sheared",
                vec!["z1".into(), "z2".into(), "z3".into()],
                vec!["z2".into(), "z3".into()],
                vec![("z1".to_string(), Expr::sub(v("z2", 0), v("z1", 0)))],
                vec![],
            )
            .unwrap(),
        );
        let fwd = JetMap::new(
            "Shear",
            Arc::clone(&src),
            Arc::clone(&tgt),
            0,
            vec![
                v("x1", 0),
                Expr::add(vec![v("x2", 0), v("x1", 0)]),
                v("x3", 0),
            ],
            vec![],
        )
        .unwrap();
        let bwd = JetMap::new(
            "Unshear",
            Arc::clone(&tgt),
            Arc::clone(&src),
            0,
            vec![
                v("z1", 0),
                Expr::sub(v("z2", 0), v("z1", 0)),
                v("z3", 0),
            ],
            vec![],
        )
        .unwrap();
        let cert = StaticCertificate::new("ShearCert", fwd, bwd).unwrap();
        let report =
            check_static_certificate(&cert, 10, 0, &SampleBox::default()).unwrap();
        assert!(report.passed(), "items: {:?}", report.items);
    }

    #[test]
    fn wrong_equations_fail_the_pushforward() {
        // The identity map does not carry the affine system into the quadric.
        let src = Arc::new(affine3());
        let tgt = Arc::new(
            ExplicitSystem::new(
                "QuadricX",
                vec!["x1".into(), "x2".into(), "x3".into()],
                vec!["x2".into(), "x3".into()],
                vec![(
                    "x1".to_string(),
                    Expr::add(vec![
                        v("x2", 0),
                        Expr::mul(vec![
                            Expr::sub(v("x2", 1), Expr::mul(vec![v("x1", 0), v("x3", 1)])),
                            v("x3", 1),
                        ]),
                    ]),
                )],
                vec![],
            )
            .unwrap(),
        );
        let comps = |names: [&str; 3]| -> Vec<Expr> { names.iter().map(|s| v(s, 0)).collect() };
        let fwd = JetMap::new(
            "IdXY",
            Arc::clone(&src),
            Arc::clone(&tgt),
            0,
            comps(["x1", "x2", "x3"]),
            vec![],
        )
        .unwrap();
        let bwd = JetMap::new(
            "IdYX",
            Arc::clone(&tgt),
            Arc::clone(&src),
            0,
            comps(["x1", "x2", "x3"]),
            vec![],
        )
        .unwrap();
        let cert = StaticCertificate::new("BadCert", fwd, bwd).unwrap();
        let report =
            check_static_certificate(&cert, 10, 0, &SampleBox::default()).unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.items.iter().filter(|i| !i.passed).collect();
        assert!(
            failed.iter().all(|i| i.label.contains("push-forward")),
            "only the push-forward items should fail: {failed:?}"
        );
    }

    #[test]
    fn static_certificates_must_have_order_zero_and_equal_dimensions() {
        let src = Arc::new(affine3());
        let fwd = JetMap::new(
            "NotStatic",
            Arc::clone(&src),
            Arc::clone(&src),
            1,
            vec![v("x1", 0), v("x2", 0), v("x3", 0)],
            vec![],
        )
        .unwrap();
        let bwd = JetMap::new(
            "NotStaticBack",
            Arc::clone(&src),
            Arc::clone(&src),
            1,
            vec![v("x1", 0), v("x2", 0), v("x3", 0)],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            StaticCertificate::new("Bad", fwd, bwd),
            Err(Error::BadCertificate { .. })
        ));
    }

    #[test]
    fn obstruction_reasons_match_a_ruling_pushforward_sanity_check() {
        // A verified ruling of the affine system stays a line under the
        // identity static map: contact remains infinite at the same point.
        let sys = affine3();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 1, 2),
                ("x2", 0, 1, 3),
                ("x3", 0, -2, 1),
                ("x2", 1, 1, 1),
                ("x3", 1, 2, 1),
            ],
        );
        let outcome = find_ruling(&sys, &p, None, 4, 0).unwrap();
        let RulingOutcome::Found(cert) = outcome else {
            panic!("affine system must be ruled")
        };
        // Push forward by the identity: same point, same direction.
        let rep = contact_order(&sys, cert.point(), cert.direction(), 4).unwrap();
        assert_eq!(rep.grade(), ContactGrade::Infinite);
    }
}
