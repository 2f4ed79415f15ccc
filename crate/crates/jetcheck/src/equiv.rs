//! Equivalence certificates between systems and their exact verification.
//!
//! A certificate is a pair of jet-space maps: the forward map takes reduced
//! coordinates of the source system (order up to K) into the target state
//! space, the backward map goes the other way at order K'. Verification is
//! three-fold: each map must send solutions into solutions (an exact
//! rational-function identity), the two compositions must be the identity
//! on base coordinates over the respective solution sets (again exact),
//! and the maps must send their domains into each other's domains (checked
//! statistically at sampled solution jets — the only non-exact part).

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, RatFn};
use crate::prolong::{prolong_components_rat, reduce_rat, sample_solution_jet_constrained};
use crate::system::{Constraint, ExplicitSystem, JetPoint, SampleBox};

/// A map from the reduced jet coordinates of `source` (drift states at
/// order 0, control states up to `order`) into the state space of
/// `target`, with a domain given by constraints over the same reduced
/// coordinates.
#[derive(Clone, Debug)]
pub struct JetMap {
    name: String,
    source: Arc<ExplicitSystem>,
    target: Arc<ExplicitSystem>,
    order: u32,
    components: Vec<Expr>,
    components_rat: Vec<RatFn>,
    domain: Vec<Constraint>,
}

impl JetMap {
    pub fn new(
        name: &str,
        source: Arc<ExplicitSystem>,
        target: Arc<ExplicitSystem>,
        order: u32,
        components: Vec<Expr>,
        domain: Vec<Constraint>,
    ) -> Result<JetMap> {
        let bad = |reason: String| Error::BadMap {
            name: name.to_string(),
            reason,
        };
        if components.len() != target.n() {
            return Err(bad(format!(
                "{} components given, target has {} states",
                components.len(),
                target.n()
            )));
        }
        let check_vars = |e: &Expr, what: &str| -> Result<()> {
            for v in e.vars() {
                if !source.is_state(v.name.as_ref()) {
                    return Err(bad(format!("unknown variable {v} in {what}")));
                }
                let max = if source.is_control(v.name.as_ref()) {
                    order
                } else {
                    0
                };
                if v.order > max {
                    return Err(bad(format!(
                        "variable {v} in {what} exceeds order {max} (map order {order})"
                    )));
                }
            }
            Ok(())
        };
        let mut components_rat = Vec::with_capacity(components.len());
        for (i, e) in components.iter().enumerate() {
            check_vars(e, &format!("component {}", i + 1))?;
            components_rat.push(e.to_ratfn().map_err(Error::from)?);
        }
        for c in &domain {
            check_vars(c.expr(), "domain constraint")?;
            c.expr().to_ratfn().map_err(Error::from)?;
        }
        Ok(JetMap {
            name: name.to_string(),
            source,
            target,
            order,
            components,
            components_rat,
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &ExplicitSystem {
        &self.source
    }

    pub fn target(&self) -> &ExplicitSystem {
        &self.target
    }

    pub fn source_arc(&self) -> Arc<ExplicitSystem> {
        Arc::clone(&self.source)
    }

    pub fn target_arc(&self) -> Arc<ExplicitSystem> {
        Arc::clone(&self.target)
    }

    /// Declared order K.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub(crate) fn components_rat(&self) -> &[RatFn] {
        &self.components_rat
    }

    pub fn domain(&self) -> &[Constraint] {
        &self.domain
    }

    /// The highest control-derivative order the map actually depends on
    /// (in canonical form). At most the declared order, often smaller.
    pub fn effective_order(&self) -> u32 {
        let mut rho = 0;
        for r in &self.components_rat {
            for v in r.vars() {
                if self.source.is_control(v.name.as_ref()) {
                    rho = rho.max(v.order);
                }
            }
        }
        rho
    }

    /// Exact evaluation of all components at a source jet point.
    pub fn eval(&self, p: &JetPoint) -> Result<Vec<BigRational>> {
        self.components_rat
            .iter()
            .map(|r| r.eval_exact(p.env()).map_err(Error::from))
            .collect()
    }

    /// True when the point satisfies every domain constraint exactly.
    pub fn in_domain(&self, p: &JetPoint) -> Result<bool> {
        for c in &self.domain {
            if !c.holds_exact(p.env())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A claimed equivalence: forward map of order K and backward map of order
/// K', with matching endpoints.
#[derive(Clone, Debug)]
pub struct Certificate {
    name: String,
    forward: JetMap,
    backward: JetMap,
}

impl Certificate {
    pub fn new(name: &str, forward: JetMap, backward: JetMap) -> Result<Certificate> {
        let same = |a: &ExplicitSystem, b: &ExplicitSystem| {
            a.name() == b.name() && a.n() == b.n() && a.m() == b.m()
        };
        if !same(forward.target(), backward.source())
            || !same(forward.source(), backward.target())
        {
            return Err(Error::BadCertificate {
                name: name.to_string(),
                reason: format!(
                    "map endpoints do not match: forward {} -> {}, backward {} -> {}",
                    forward.source().name(),
                    forward.target().name(),
                    backward.source().name(),
                    backward.target().name()
                ),
            });
        }
        Ok(Certificate {
            name: name.to_string(),
            forward,
            backward,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forward(&self) -> &JetMap {
        &self.forward
    }

    pub fn backward(&self) -> &JetMap {
        &self.backward
    }
}

/// One verified condition: an exact identity or a sampled (statistical)
/// check, with the failing residuals or witness points when it does not
/// hold.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub label: String,
    pub passed: bool,
    /// "exact" for canonical identities, "statistical" for sampled checks.
    pub method: &'static str,
    pub detail: String,
    /// Residual expressions that failed to vanish (empty on pass).
    pub residuals: Vec<Expr>,
    /// Sampled points witnessing a failure (empty on pass).
    pub witnesses: Vec<JetPoint>,
}

impl CheckItem {
    fn exact(label: String, passed: bool, detail: String, residuals: Vec<Expr>) -> Self {
        CheckItem {
            label,
            passed,
            method: "exact",
            detail,
            residuals,
            witnesses: Vec::new(),
        }
    }
}

/// Outcome of a family of checks; passes iff every item passes.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.items.extend(other.items);
    }
}

/// Bindings sending the target's jet coordinates (all states, orders
/// `0..=max_order`) to the corresponding prolonged components of the map.
fn image_bindings(
    map: &JetMap,
    levels: &[Vec<RatFn>],
    max_order: u32,
) -> BTreeMap<JetVar, RatFn> {
    let tgt = map.target();
    let mut bindings = BTreeMap::new();
    for (i, s) in tgt.states().iter().enumerate() {
        for k in 0..=max_order {
            bindings.insert(tgt.var(s, k), levels[k as usize][i].clone());
        }
    }
    bindings
}

/// Verify that the map sends solutions of its source into solutions of its
/// target: for each target equation `D(s') = g`, substituting the map's
/// components (and their total derivatives along the source) must make the
/// residual the zero rational function over the source's reduced
/// coordinates.
pub fn check_maps_into(map: &JetMap) -> Result<CheckReport> {
    let src = map.source();
    let tgt = map.target();
    let levels = prolong_components_rat(map.components_rat(), src, 1)?;
    let bindings = image_bindings(map, &levels, 1);
    let mut items = Vec::new();
    if tgt.drift_states().is_empty() {
        items.push(CheckItem::exact(
            format!("{}: target has no equations", map.name()),
            true,
            "vacuously satisfied".into(),
            Vec::new(),
        ));
    }
    for (s, g) in tgt.drift_states().iter().zip(tgt.f_rat()) {
        let idx = tgt
            .states()
            .iter()
            .position(|t| t == s)
            .expect("drift state is a state");
        let rhs = g.substitute(&bindings).map_err(Error::from)?;
        let residual = reduce_rat(&levels[1][idx].sub(&rhs), src)?;
        let ok = residual.is_zero();
        items.push(CheckItem::exact(
            format!("{}: image satisfies target equation for D({s})", map.name()),
            ok,
            if ok {
                "residual is the zero function".into()
            } else {
                "residual is not identically zero".into()
            },
            if ok { Vec::new() } else { vec![residual.to_expr()] },
        ));
    }
    Ok(CheckReport { items })
}

fn roundtrip_direction(
    a: &JetMap,
    b: &JetMap,
    label: &str,
    items: &mut Vec<CheckItem>,
) -> Result<()> {
    let src = a.source();
    let levels = prolong_components_rat(a.components_rat(), src, b.order())?;
    let bindings = image_bindings(a, &levels, b.order());
    for (i, s) in src.states().iter().enumerate() {
        let comp = b.components_rat()[i]
            .substitute(&bindings)
            .map_err(Error::from)?;
        let residual = reduce_rat(&comp.sub(&RatFn::var(src.var(s, 0))), src)?;
        let ok = residual.is_zero();
        items.push(CheckItem::exact(
            format!("{label}: component {s} returns to itself"),
            ok,
            if ok {
                "identity on the solution set".into()
            } else {
                "composition differs from the identity".into()
            },
            if ok { Vec::new() } else { vec![residual.to_expr()] },
        ));
    }
    Ok(())
}

/// Verify both compositions are the identity on base coordinates over the
/// respective solution sets: backward ∘ (prolonged forward) on the source,
/// forward ∘ (prolonged backward) on the target.
pub fn check_roundtrip(cert: &Certificate) -> Result<CheckReport> {
    let mut items = Vec::new();
    roundtrip_direction(
        cert.forward(),
        cert.backward(),
        &format!("{} ∘ prolonged {}", cert.backward().name(), cert.forward().name()),
        &mut items,
    )?;
    roundtrip_direction(
        cert.backward(),
        cert.forward(),
        &format!("{} ∘ prolonged {}", cert.forward().name(), cert.backward().name()),
        &mut items,
    )?;
    Ok(CheckReport { items })
}

fn domain_direction(
    a: &JetMap,
    b: &JetMap,
    samples: u32,
    seed: u64,
    bx: &SampleBox,
    stream_base: u64,
) -> Result<CheckItem> {
    let src = a.source();
    let jet_order = a.order() + b.order();
    let levels = prolong_components_rat(a.components_rat(), src, b.order())?;
    let mut failures: Vec<JetPoint> = Vec::new();
    let mut hit_singular = 0u32;
    for i in 0..samples {
        let p = sample_solution_jet_constrained(
            src,
            jet_order,
            seed,
            stream_base + i as u64,
            bx,
            a.domain(),
        )?;
        // image jet values for all target coordinates up to b's order
        let mut env: BTreeMap<JetVar, BigRational> = BTreeMap::new();
        let mut ok = true;
        'eval: for (si, s) in a.target().states().iter().enumerate() {
            for k in 0..=b.order() {
                match levels[k as usize][si].eval_exact(p.env()) {
                    Ok(q) => {
                        env.insert(a.target().var(s, k), q);
                    }
                    Err(_) => {
                        ok = false;
                        hit_singular += 1;
                        break 'eval;
                    }
                }
            }
        }
        if ok {
            for c in b.domain() {
                match c.holds_exact(&env) {
                    Ok(true) => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if !ok {
            failures.push(p);
        }
    }
    let passed = failures.is_empty();
    Ok(CheckItem {
        label: format!(
            "image of {} lands in the domain of {}",
            a.name(),
            b.name()
        ),
        passed,
        method: "statistical",
        detail: format!(
            "{}/{} sampled solution jets ({} singular evaluations)",
            samples - failures.len() as u32,
            samples,
            hit_singular
        ),
        residuals: Vec::new(),
        witnesses: failures.into_iter().take(3).collect(),
    })
}

/// Sampled check that each map sends its domain into the other's domain:
/// source solution jets in the forward domain must map to target jets
/// satisfying the backward domain, and symmetrically. Statistical, not a
/// proof.
pub fn check_domains(
    cert: &Certificate,
    samples: u32,
    seed: u64,
    bx: &SampleBox,
) -> Result<CheckReport> {
    let fwd = domain_direction(cert.forward(), cert.backward(), samples, seed, bx, 0)?;
    let bwd = domain_direction(
        cert.backward(),
        cert.forward(),
        samples,
        seed,
        bx,
        samples as u64,
    )?;
    Ok(CheckReport {
        items: vec![fwd, bwd],
    })
}

/// Run every certificate check: maps-into both ways, both round trips, and
/// the sampled domain conditions.
pub fn check_certificate(
    cert: &Certificate,
    samples: u32,
    seed: u64,
    bx: &SampleBox,
) -> Result<CheckReport> {
    let mut report = check_maps_into(cert.forward())?;
    report.merge(check_maps_into(cert.backward())?);
    report.merge(check_roundtrip(cert)?);
    report.merge(check_domains(cert, samples, seed, bx)?);
    Ok(report)
}

/// A straight line in a tangent space of the target system, given by an
/// order-1 jet point (the line's base) and a direction over the state
/// coordinates.
#[derive(Clone, Debug)]
pub struct TangentLine {
    pub point: JetPoint,
    pub direction: Vec<BigRational>,
}

/// Build the ruling line a jet map induces in its target's velocity fiber:
/// at a source solution jet `p` (order at least effective order + 1), the
/// image point is (Φ(p), D(Φ)(p)) and the direction is the image of `w`
/// (a direction over the source controls) under the partial of Φ with
/// respect to the top-order control derivatives.
pub fn extract_ruling(map: &JetMap, p: &JetPoint, w: &[BigRational]) -> Result<TangentLine> {
    let rho = map.effective_order();
    if rho == 0 {
        return Err(Error::Invalid(
            "map has effective order 0; it induces no ruling direction".into(),
        ));
    }
    let src = map.source();
    if w.len() != src.m() {
        return Err(Error::DimensionMismatch {
            what: "control direction",
            expected: src.m(),
            got: w.len(),
        });
    }
    let levels = prolong_components_rat(map.components_rat(), src, 1)?;
    let tgt = map.target();
    let mut point = JetPoint::new(1);
    for (i, s) in tgt.states().iter().enumerate() {
        point.insert(tgt.var(s, 0), levels[0][i].eval_exact(p.env())?);
        point.insert(tgt.var(s, 1), levels[1][i].eval_exact(p.env())?);
    }
    let mut direction = vec![BigRational::zero(); tgt.n()];
    for (i, comp) in map.components_rat().iter().enumerate() {
        for (ci, c) in src.controls().iter().enumerate() {
            if w[ci].is_zero() {
                continue;
            }
            let d = comp.derivative(&src.var(c, rho));
            if d.is_zero() {
                continue;
            }
            direction[i] += d.eval_exact(p.env())? * &w[ci];
        }
    }
    if direction.iter().all(|q| q.is_zero()) {
        return Err(Error::ZeroDirection);
    }
    Ok(TangentLine { point, direction })
}
