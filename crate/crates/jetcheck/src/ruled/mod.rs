//! Ruledness of velocity fibers.
//!
//! Fix a base point `x` and consider the set of admissible velocities
//! `{(v_I, v_II) : v_I = f(x, v_II)}` — the fiber of the system over `x`.
//! A system is *ruled* when through every admissible velocity there is a
//! straight line that stays inside the fiber. This module measures the
//! contact order of a candidate line with the fiber ([`contact_order`]),
//! searches for lines with infinite contact ([`find_ruling`]), computes how
//! far a verified line extends before hitting a domain boundary
//! ([`line_extent`]), and aggregates per-point probes into a sampled verdict
//! ([`is_ruled_sampled`]).
//!
//! Substituting `ẋ ← ẋ + λw` into the defining residuals and clearing
//! denominators yields exact polynomials in `λ`; a line lies in the fiber
//! precisely when all their coefficients vanish. The coefficients are
//! polynomial in the direction `w`, so the existence question reduces to
//! exact elimination over a handful of unknowns (see [`solve`]), with a
//! seeded Gauss-Newton search as a fallback when elimination is inconclusive.

mod solve;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use num::{BigRational, FromPrimitive, One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{poly_substitute, ExprError, JetVar, Poly, RatFn};
use crate::system::{
    sample_fiber_point_stream, seeded_rng, ExplicitSystem, JetPoint, SampleBox,
};
use solve::{
    smallest_positive_root, specialize, largest_negative_root, poly_to_uni, solve_conditions,
    udeg, ueval, SolveOutcome,
};

/// Number of random restarts for the Gauss-Newton fallback search.
pub const DEFAULT_SEARCH_RESTARTS: u32 = 64;
/// Iteration budget per restart.
const SEARCH_ITERATIONS: u32 = 50;
/// Convergence threshold on the stacked coefficient system (sup norm).
const SEARCH_TOLERANCE: f64 = 1e-12;
/// Bisection width for isolating domain-boundary roots along a line.
const EXTENT_TOLERANCE: f64 = 1e-10;
/// Largest denominator attempted when reconstructing a rational direction
/// from a numerically converged one.
const RECONSTRUCT_MAX_DEN: u64 = 1 << 20;
/// Absolute tolerance for accepting a reconstructed rational coordinate.
const RECONSTRUCT_TOL: f64 = 1e-9;
/// Dedicated RNG stream for the numeric search (sample streams use indices).
const SEARCH_STREAM: u64 = 0x6e65_7774;

/// Internal variable for the line parameter λ.
fn lambda_var() -> JetVar {
    JetVar::plain("#lambda", 0)
}

/// Internal variable for the i-th coordinate of the unknown direction.
fn w_var(i: usize) -> JetVar {
    JetVar::plain(&format!("#w{i}"), 0)
}

/// State names beginning with `#` would collide with the reserved direction
/// and line-parameter variables.
fn check_reserved(sys: &ExplicitSystem) -> Result<()> {
    for s in sys.states() {
        if s.starts_with('#') {
            return Err(Error::Invalid(format!(
                "state name {s} is reserved: names beginning with '#' are used internally"
            )));
        }
    }
    Ok(())
}

/// How the velocity derivatives move along the candidate line.
enum LineDirection<'a> {
    /// A concrete rational direction.
    Exact(&'a [BigRational]),
    /// Symbolic direction variables `#w0 … #w(n-1)`.
    Symbolic,
}

/// Substitution sending each state to its base value and each first
/// derivative to `value + λ·w_i`.
fn line_bindings(
    sys: &ExplicitSystem,
    p: &JetPoint,
    dir: &LineDirection<'_>,
) -> Result<BTreeMap<JetVar, RatFn>> {
    let lam = RatFn::var(lambda_var());
    let mut bindings = BTreeMap::new();
    for (i, s) in sys.states().iter().enumerate() {
        let v0 = sys.var(s, 0);
        let x0 = p
            .get(&v0)
            .ok_or_else(|| ExprError::UnboundVariable(s.to_string()))?;
        bindings.insert(v0, RatFn::constant(x0.clone()));

        let v1 = sys.var(s, 1);
        let x1 = p
            .get(&v1)
            .ok_or_else(|| ExprError::UnboundVariable(format!("D({s})")))?;
        let w_term = match dir {
            LineDirection::Exact(w) => RatFn::constant(w[i].clone()),
            LineDirection::Symbolic => RatFn::var(w_var(i)),
        };
        bindings.insert(v1, RatFn::constant(x1.clone()).add(&lam.mul(&w_term)));
    }
    Ok(bindings)
}

/// The defining residuals `D(x_I) - f` as rational functions, in drift order.
fn residual_rats(sys: &ExplicitSystem) -> Vec<RatFn> {
    sys.drift_states()
        .iter()
        .zip(sys.f_rat())
        .map(|(s, f)| RatFn::var(sys.var(s, 1)).sub(f))
        .collect()
}

/// Scale a direction so its largest-magnitude coordinate becomes exactly 1
/// (first such coordinate on ties). Errors on the zero vector.
fn normalize_direction(w: &[BigRational]) -> Result<Vec<BigRational>> {
    let mut best: Option<usize> = None;
    for (i, c) in w.iter().enumerate() {
        match best {
            None => {
                if !c.is_zero() {
                    best = Some(i);
                }
            }
            Some(b) => {
                if c.abs() > w[b].abs() {
                    best = Some(i);
                }
            }
        }
    }
    let Some(b) = best else {
        return Err(Error::ZeroDirection);
    };
    let scale = w[b].clone();
    Ok(w.iter().map(|c| c / &scale).collect())
}

/// Verify the base point lies on the fiber; report the first bad residual.
fn require_on_fiber(sys: &ExplicitSystem, p: &JetPoint) -> Result<()> {
    let res = sys.residuals(p)?;
    if let Some(index) = res.iter().position(|r| !r.is_zero()) {
        return Err(Error::PointNotOnFiber { index });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Contact order
// ---------------------------------------------------------------------------

/// Order of contact between a line and the fiber.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactGrade {
    /// Some residual's λ-expansion has a nonzero coefficient: the value is
    /// the smallest exponent `j ≥ 1` at which one appears.
    Finite(u32),
    /// Every coefficient vanishes identically: the line lies in the fiber.
    Infinite,
}

/// Exact λ-expansion of the residuals along a line through a fiber point.
#[derive(Clone, Debug)]
pub struct ContactReport {
    point: JetPoint,
    direction: Vec<BigRational>,
    grade: ContactGrade,
    coefficients: Vec<Vec<BigRational>>,
    order_cap: u32,
}

impl ContactReport {
    pub fn point(&self) -> &JetPoint {
        &self.point
    }

    /// The direction actually expanded: the input scaled so its
    /// largest-magnitude coordinate is 1.
    pub fn direction(&self) -> &[BigRational] {
        &self.direction
    }

    pub fn grade(&self) -> ContactGrade {
        self.grade
    }

    /// λ-expansion coefficients of each residual after clearing its
    /// denominator, ascending from λ⁰ (which is always zero on the fiber).
    pub fn coefficients(&self) -> &[Vec<BigRational>] {
        &self.coefficients
    }

    /// The order that was requested of the probe.
    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    /// Does the line agree with the fiber to order `n` — i.e. do all
    /// coefficients up to and including λⁿ vanish?
    pub fn meets(&self, n: u32) -> bool {
        match self.grade {
            ContactGrade::Infinite => true,
            ContactGrade::Finite(j) => j > n,
        }
    }
}

/// Expand each residual along `ẋ ← ẋ + λw` and report the first failing
/// power of λ. The expansion is an exact polynomial (denominators are
/// cleared), so `Infinite` is a proof that the line lies in the fiber.
pub fn contact_order(
    sys: &ExplicitSystem,
    p: &JetPoint,
    w: &[BigRational],
    order_cap: u32,
) -> Result<ContactReport> {
    check_reserved(sys)?;
    if w.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            what: "fiber direction",
            expected: sys.n(),
            got: w.len(),
        });
    }
    let wn = normalize_direction(w)?;
    require_on_fiber(sys, p)?;

    let bindings = line_bindings(sys, p, &LineDirection::Exact(&wn))?;
    let lam = lambda_var();
    let mut coefficients: Vec<Vec<BigRational>> = Vec::new();
    for r in residual_rats(sys) {
        let s = r.substitute(&bindings)?;
        let den = poly_to_uni(s.den(), &lam)
            .ok_or_else(|| Error::Invalid("line substitution left a free variable".into()))?;
        if ueval(&den, &BigRational::zero()).is_zero() {
            return Err(ExprError::DenominatorVanishes.into());
        }
        let num = poly_to_uni(s.num(), &lam)
            .ok_or_else(|| Error::Invalid("line substitution left a free variable".into()))?;
        coefficients.push(num);
    }

    let mut grade = ContactGrade::Infinite;
    let max_deg = coefficients
        .iter()
        .filter_map(|c| udeg(c))
        .max()
        .unwrap_or(0);
    'scan: for j in 1..=max_deg {
        for c in &coefficients {
            if c.get(j).map(|q| !q.is_zero()).unwrap_or(false) {
                grade = ContactGrade::Finite(j as u32);
                break 'scan;
            }
        }
    }

    Ok(ContactReport {
        point: p.clone(),
        direction: wn,
        grade,
        coefficients,
        order_cap,
    })
}

// ---------------------------------------------------------------------------
// Ruling search
// ---------------------------------------------------------------------------

/// A verified line inside the fiber, with the λ-interval over which it
/// respects the domain constraints.
#[derive(Clone, Debug)]
pub struct RulingCertificate {
    point: JetPoint,
    direction: Vec<BigRational>,
    extent: (f64, f64),
    contact: ContactReport,
    found_by: &'static str,
}

impl RulingCertificate {
    pub fn point(&self) -> &JetPoint {
        &self.point
    }

    pub fn direction(&self) -> &[BigRational] {
        &self.direction
    }

    /// Maximal open λ-interval around 0 on which the line satisfies the
    /// domain constraints (endpoints within `1e-10` of the true boundary;
    /// infinite when unconstrained).
    pub fn extent(&self) -> (f64, f64) {
        self.extent
    }

    pub fn contact(&self) -> &ContactReport {
        &self.contact
    }

    /// `"elimination"` for the exact symbolic path, `"search"` for the
    /// numeric fallback (whose result is still re-verified exactly).
    pub fn found_by(&self) -> &'static str {
        self.found_by
    }

    /// Re-check the certificate: sample `trials` values of λ inside the
    /// extent and confirm zero residuals and satisfied constraints at each.
    pub fn verify(&self, sys: &ExplicitSystem, trials: u32, seed: u64) -> Result<bool> {
        let lo = self.extent.0.max(-10.0);
        let hi = self.extent.1.min(10.0);
        if !(lo < hi) {
            return Ok(false);
        }
        let mut rng = seeded_rng(seed, SEARCH_STREAM ^ 1);
        for _ in 0..trials {
            let t = rand::Rng::random_range(&mut rng, lo..hi);
            let Some(lam) = BigRational::from_f64(t) else {
                continue;
            };
            let q = shift_point(sys, &self.point, &self.direction, &lam);
            match sys.residuals(&q) {
                Ok(res) => {
                    if res.iter().any(|r| !r.is_zero()) {
                        return Ok(false);
                    }
                }
                Err(_) => return Ok(false),
            }
            match sys.in_domain(&q) {
                Ok(true) => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

/// Move a fiber point along a velocity direction: first derivatives gain
/// `λ·w`, base coordinates stay put.
fn shift_point(
    sys: &ExplicitSystem,
    p: &JetPoint,
    w: &[BigRational],
    lam: &BigRational,
) -> JetPoint {
    let mut q = p.clone();
    for (i, s) in sys.states().iter().enumerate() {
        let v1 = sys.var(s, 1);
        if let Some(x1) = p.get(&v1) {
            q.insert(v1, x1 + lam * &w[i]);
        }
    }
    q
}

/// Why no ruling was produced.
#[derive(Clone, Debug)]
pub struct NotFoundReport {
    /// True when symbolic elimination proved that no direction works; false
    /// when only the heuristic numeric search failed.
    pub exact: bool,
    /// Smallest norm of the stacked coefficient system seen during the
    /// numeric search (absent on the exact path).
    pub floor: Option<f64>,
    pub detail: String,
}

/// Result of a per-point ruling search.
#[derive(Clone, Debug)]
pub enum RulingOutcome {
    Found(Box<RulingCertificate>),
    NotFound(NotFoundReport),
}

/// The contact conditions at a point, reduced to the control coordinates of
/// the direction. Drift coordinates enter the defining residuals linearly
/// (with the nonzero constant `den f(p)` as coefficient), so they can be
/// eliminated up front; what remains are polynomial conditions on the
/// control coordinates alone.
struct ContactConditions {
    /// Polynomial conditions that must vanish for infinite contact.
    conditions: Vec<Poly>,
    /// Eliminated drift coordinates: state index → polynomial in the control
    /// direction variables.
    drift_parts: BTreeMap<usize, Poly>,
    /// State indices of the control coordinates.
    control_indices: Vec<usize>,
}

fn build_contact_conditions(sys: &ExplicitSystem, p: &JetPoint) -> Result<ContactConditions> {
    let lam = lambda_var();
    let bindings = line_bindings(sys, p, &LineDirection::Symbolic)?;

    let state_index: BTreeMap<&str, usize> = sys
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_ref(), i))
        .collect();
    let control_indices: Vec<usize> = sys
        .states()
        .iter()
        .enumerate()
        .filter(|(_, s)| sys.is_control(s))
        .map(|(i, _)| i)
        .collect();

    let mut raw_conditions: Vec<Poly> = Vec::new();
    let mut drift_parts: BTreeMap<usize, Poly> = BTreeMap::new();
    let mut drift_bindings: BTreeMap<JetVar, RatFn> = BTreeMap::new();

    for (drift_pos, s) in sys.drift_states().iter().enumerate() {
        let r = RatFn::var(sys.var(s, 1)).sub(&sys.f_rat()[drift_pos]);
        let sub = r.substitute(&bindings)?;
        // The cleared denominator at λ = 0 is den f(p): direction variables
        // always enter multiplied by λ.
        let den0 = specialize(sub.den(), &lam, &BigRational::zero());
        match den0.as_constant() {
            Some(c) if !c.is_zero() => {}
            _ => return Err(ExprError::DenominatorVanishes.into()),
        }
        let coeffs = sub.num().coeffs_in(&lam);
        debug_assert!(
            coeffs.first().map(|c| c.is_zero()).unwrap_or(true),
            "the constant term must vanish at a fiber point"
        );
        let idx = state_index[s.as_ref()];
        let wd = w_var(idx);
        let mut eliminated = false;
        if let Some(c1) = coeffs.get(1) {
            if c1.degree_in(&wd) == 1 {
                let parts = c1.coeffs_in(&wd);
                if let Some(lead) = parts[1].as_constant() {
                    if !lead.is_zero() {
                        let g = parts[0].neg().scale(&lead.recip());
                        drift_bindings.insert(wd.clone(), RatFn::from_poly(g.clone()));
                        drift_parts.insert(idx, g);
                        eliminated = true;
                    }
                }
            }
            if !eliminated {
                raw_conditions.push(c1.clone());
            }
        }
        for c in coeffs.iter().skip(2) {
            raw_conditions.push(c.clone());
        }
    }

    // Apply the drift eliminations to all remaining conditions.
    let mut conditions: Vec<Poly> = Vec::new();
    for c in raw_conditions {
        let reduced = if drift_bindings.is_empty() {
            c
        } else {
            poly_substitute(&c, &drift_bindings)?.num().clone()
        };
        if !reduced.is_zero() {
            conditions.push(reduced);
        }
    }

    Ok(ContactConditions {
        conditions,
        drift_parts,
        control_indices,
    })
}

/// Assemble a full direction vector from a solution over the control
/// coordinates (with coordinate `norm_idx` fixed to 1); eliminated drift
/// coordinates are recovered from their polynomials.
fn assemble_direction(
    sys: &ExplicitSystem,
    cc: &ContactConditions,
    norm_idx: usize,
    sol: &BTreeMap<JetVar, BigRational>,
) -> Vec<BigRational> {
    let mut ctrl_env: BTreeMap<JetVar, BigRational> = BTreeMap::new();
    for &i in &cc.control_indices {
        let v = w_var(i);
        let val = if i == norm_idx {
            BigRational::one()
        } else {
            sol.get(&v).cloned().unwrap_or_else(BigRational::zero)
        };
        ctrl_env.insert(v, val);
    }
    let mut w = vec![BigRational::zero(); sys.n()];
    for (i, s) in sys.states().iter().enumerate() {
        if sys.is_control(s) {
            w[i] = ctrl_env[&w_var(i)].clone();
        } else if let Some(g) = cc.drift_parts.get(&i) {
            w[i] = g
                .eval_exact(&ctrl_env)
                .expect("eliminated drift parts depend only on control coordinates");
        } else {
            w[i] = sol.get(&w_var(i)).cloned().unwrap_or_else(BigRational::zero);
        }
    }
    w
}

/// Exact verification of a candidate: infinite contact plus extent.
fn certify(
    sys: &ExplicitSystem,
    p: &JetPoint,
    w: &[BigRational],
    order_cap: u32,
    found_by: &'static str,
) -> Result<Option<RulingCertificate>> {
    if w.iter().all(|c| c.is_zero()) {
        return Ok(None);
    }
    let contact = contact_order(sys, p, w, order_cap)?;
    if contact.grade() != ContactGrade::Infinite {
        return Ok(None);
    }
    let extent = extent_of_verified_line(sys, p, contact.direction())?;
    Ok(Some(RulingCertificate {
        point: p.clone(),
        direction: contact.direction().to_vec(),
        extent,
        contact,
        found_by,
    }))
}

/// Search for a direction giving a line inside the fiber at `p`.
///
/// The contact conditions are polynomial in the direction; since any line in
/// the fiber must move the control coordinates, each control coordinate is
/// fixed to 1 in turn and the remaining system is handed to exact
/// elimination. If every normalization is refuted the answer `NotFound` is
/// exact. If elimination is inconclusive anywhere, a seeded Gauss-Newton
/// search over the same conditions runs with `attempts` restarts; its
/// converged candidates are reconstructed as rationals and re-verified
/// exactly, so a `Found` answer is always a proof. `order` is the contact
/// order recorded on the certificate's report (default n+1).
pub fn find_ruling(
    sys: &ExplicitSystem,
    p: &JetPoint,
    order: Option<u32>,
    attempts: u32,
    seed: u64,
) -> Result<RulingOutcome> {
    check_reserved(sys)?;
    let order_cap = order.unwrap_or(sys.n() as u32 + 1);
    require_on_fiber(sys, p)?;

    if sys.m() == 0 {
        return Ok(RulingOutcome::NotFound(NotFoundReport {
            exact: true,
            floor: None,
            detail: "the fiber is a single point (no control coordinates), so it contains no lines"
                .into(),
        }));
    }

    let cc = build_contact_conditions(sys, p)?;

    let mut undecided: Vec<String> = Vec::new();
    for &c in &cc.control_indices {
        let wc = w_var(c);
        let specialized: Vec<Poly> = cc
            .conditions
            .iter()
            .map(|q| specialize(q, &wc, &BigRational::one()))
            .collect();
        match solve_conditions(&specialized) {
            SolveOutcome::Solution(sol) => {
                let w = assemble_direction(sys, &cc, c, &sol);
                if let Some(cert) = certify(sys, p, &w, order_cap, "elimination")? {
                    return Ok(RulingOutcome::Found(Box::new(cert)));
                }
                undecided.push("an elimination candidate failed exact re-verification".into());
            }
            SolveOutcome::NoSolution => {}
            SolveOutcome::Undecided(s) => undecided.push(s),
        }
    }

    if undecided.is_empty() {
        return Ok(RulingOutcome::NotFound(NotFoundReport {
            exact: true,
            floor: None,
            detail: format!(
                "exact elimination: the contact conditions over {} normalizations have no \
                 common real zero, so no line through this point stays in the fiber",
                cc.control_indices.len()
            ),
        }));
    }

    newton_search(sys, p, &cc, order_cap, attempts, seed, undecided)
}

/// Gauss-Newton descent on the stacked contact conditions, with random
/// restarts. Purely a search heuristic: any converged direction is
/// reconstructed over small denominators and re-verified exactly before a
/// certificate is issued.
fn newton_search(
    sys: &ExplicitSystem,
    p: &JetPoint,
    cc: &ContactConditions,
    order_cap: u32,
    attempts: u32,
    seed: u64,
    mut notes: Vec<String>,
) -> Result<RulingOutcome> {
    use rand::Rng;

    let mut rng = seeded_rng(seed, SEARCH_STREAM);
    let mut floor = f64::INFINITY;
    let m = cc.control_indices.len();

    for restart in 0..attempts {
        let norm_idx = cc.control_indices[(restart as usize) % m];
        let wc = w_var(norm_idx);
        let specialized: Vec<Poly> = cc
            .conditions
            .iter()
            .map(|q| specialize(q, &wc, &BigRational::one()))
            .filter(|q| !q.is_zero())
            .collect();
        if specialized.is_empty() {
            // No constraints at this normalization: the unit direction works.
            let w = assemble_direction(sys, cc, norm_idx, &BTreeMap::new());
            if let Some(cert) = certify(sys, p, &w, order_cap, "search")? {
                return Ok(RulingOutcome::Found(Box::new(cert)));
            }
            continue;
        }
        let mut unknowns: BTreeSet<JetVar> = BTreeSet::new();
        for q in &specialized {
            unknowns.extend(q.vars());
        }
        let unknowns: Vec<JetVar> = unknowns.into_iter().collect();
        if unknowns.is_empty() {
            // Nonzero constants remain: this normalization is impossible.
            continue;
        }
        let jacobian: Vec<Vec<Poly>> = specialized
            .iter()
            .map(|q| unknowns.iter().map(|u| q.derivative(u)).collect())
            .collect();

        let mut vals: Vec<f64> = unknowns
            .iter()
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        for _ in 0..SEARCH_ITERATIONS {
            let env: BTreeMap<JetVar, f64> = unknowns
                .iter()
                .cloned()
                .zip(vals.iter().copied())
                .collect();
            let mut fvec = Vec::with_capacity(specialized.len());
            for q in &specialized {
                fvec.push(q.eval_f64(&env)?);
            }
            let norm2 = fvec.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm2.is_finite() {
                break;
            }
            floor = floor.min(norm2);
            let sup = fvec.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if sup <= SEARCH_TOLERANCE {
                if let Some(sol) = reconstruct_solution(&unknowns, &vals) {
                    let w = assemble_direction(sys, cc, norm_idx, &sol);
                    if let Some(cert) = certify(sys, p, &w, order_cap, "search")? {
                        return Ok(RulingOutcome::Found(Box::new(cert)));
                    }
                }
                break;
            }
            let jac = DMatrix::from_fn(specialized.len(), unknowns.len(), |r, c| {
                jacobian[r][c].eval_f64(&env).unwrap_or(f64::NAN)
            });
            if jac.iter().any(|x| !x.is_finite()) {
                break;
            }
            let rhs = DVector::from_iterator(fvec.len(), fvec.iter().map(|x| -x));
            let svd = jac.svd(true, true);
            let Ok(delta) = svd.solve(&rhs, 1e-14) else {
                break;
            };
            for (k, d) in delta.iter().enumerate() {
                vals[k] += d;
            }
            if vals.iter().any(|x| !x.is_finite()) {
                break;
            }
        }
    }

    notes.push(format!(
        "numeric search exhausted {attempts} restarts without a verifiable direction"
    ));
    Ok(RulingOutcome::NotFound(NotFoundReport {
        exact: false,
        floor: if floor.is_finite() { Some(floor) } else { None },
        detail: notes.join("; "),
    }))
}

/// Rational reconstruction of every coordinate of a converged iterate.
fn reconstruct_solution(
    unknowns: &[JetVar],
    vals: &[f64],
) -> Option<BTreeMap<JetVar, BigRational>> {
    let mut out = BTreeMap::new();
    for (u, &x) in unknowns.iter().zip(vals) {
        let r = rationalize(x, RECONSTRUCT_MAX_DEN, RECONSTRUCT_TOL)?;
        out.insert(u.clone(), r);
    }
    Some(out)
}

/// Best rational approximation with bounded denominator (continued
/// fractions), accepted only within `tol`.
fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let mut a = x.floor();
    let mut frac = x - a;
    let (mut h0, mut k0) = (1i128, 0i128);
    let (mut h1, mut k1) = (a as i128, 1i128);
    for _ in 0..64 {
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol {
            return Some(BigRational::new(h1.into(), k1.into()));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / frac;
        a = inv.floor();
        frac = inv - a;
        if a.abs() >= i64::MAX as f64 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2.unsigned_abs() > u128::from(max_den) {
            break;
        }
        h0 = h1;
        k0 = k1;
        h1 = h2;
        k1 = k2;
    }
    if k1 == 0 {
        return None;
    }
    let approx = h1 as f64 / k1 as f64;
    if (approx - x).abs() <= tol {
        Some(BigRational::new(h1.into(), k1.into()))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Line extent
// ---------------------------------------------------------------------------

/// Maximal open λ-interval around 0 on which the (infinite-contact) line
/// `ẋ + λw` satisfies every domain constraint and keeps the right-hand
/// sides defined. Finite endpoints are isolated to within `1e-10`; an
/// endpoint is infinite when nothing constrains that side.
pub fn line_extent(
    sys: &ExplicitSystem,
    p: &JetPoint,
    w: &[BigRational],
) -> Result<(f64, f64)> {
    let report = contact_order(sys, p, w, sys.n() as u32 + 1)?;
    if report.grade() != ContactGrade::Infinite {
        return Err(Error::Invalid(
            "line extent requires a direction with verified infinite contact".into(),
        ));
    }
    extent_of_verified_line(sys, p, report.direction())
}

/// Extent computation proper; `wn` must already be normalized and have
/// infinite contact.
fn extent_of_verified_line(
    sys: &ExplicitSystem,
    p: &JetPoint,
    wn: &[BigRational],
) -> Result<(f64, f64)> {
    if !sys.in_domain(p)? {
        return Err(Error::Invalid(
            "the base point violates a domain constraint".into(),
        ));
    }
    let bindings = line_bindings(sys, p, &LineDirection::Exact(wn))?;
    let lam = lambda_var();

    // Everything whose zero or pole bounds the line: each domain constraint's
    // value, and each right-hand side's denominator.
    let mut watched: Vec<RatFn> = Vec::new();
    for c in sys.domain() {
        watched.push(c.expr().to_ratfn()?);
    }
    for f in sys.f_rat() {
        watched.push(RatFn::from_poly(f.den().clone()));
    }

    let mut boundary: Vec<Vec<BigRational>> = Vec::new();
    for r in &watched {
        let s = r.substitute(&bindings)?;
        for q in [s.num(), s.den()] {
            let uni = poly_to_uni(q, &lam)
                .ok_or_else(|| Error::Invalid("line substitution left a free variable".into()))?;
            if udeg(&uni).map(|d| d >= 1).unwrap_or(false) {
                if ueval(&uni, &BigRational::zero()).is_zero() {
                    return Err(Error::Invalid(
                        "a constraint expression vanishes at the base point of the line".into(),
                    ));
                }
                boundary.push(uni);
            }
        }
    }

    let mut hi = f64::INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for q in &boundary {
        if let Some(r) = smallest_positive_root(q, EXTENT_TOLERANCE) {
            hi = hi.min(r);
        }
        if let Some(r) = largest_negative_root(q, EXTENT_TOLERANCE) {
            lo = lo.max(r);
        }
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Sampled ruledness verdict
// ---------------------------------------------------------------------------

/// A fiber point where exact elimination proved no ruling line exists.
#[derive(Clone, Debug)]
pub struct NotRuledWitness {
    pub point: JetPoint,
    pub detail: String,
}

/// Sampled verdict on ruledness over the system's domain.
#[derive(Clone, Debug)]
pub enum Ruledness {
    /// Every sampled point carries a verified ruling line.
    RuledEvidence { rulings: Vec<RulingCertificate> },
    /// At least one sampled point provably has no ruling line.
    NotRuled { witnesses: Vec<NotRuledWitness> },
    /// No exact refutation, but the heuristic search failed somewhere.
    Inconclusive {
        rulings: Vec<RulingCertificate>,
        unresolved: Vec<JetPoint>,
    },
}

impl Ruledness {
    /// Short machine-friendly label for reports.
    pub fn label(&self) -> &'static str {
        match self {
            Ruledness::RuledEvidence { .. } => "RULED_EVIDENCE",
            Ruledness::NotRuled { .. } => "NOT_RULED",
            Ruledness::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }
}

/// Tuning knobs for the sampled ruledness probe.
#[derive(Clone, Debug)]
pub struct RuledParams {
    /// Number of fiber points to sample.
    pub points: u32,
    /// Contact order recorded on certificates (`None` → n+1).
    pub order: Option<u32>,
    /// Restarts for the numeric fallback at each point.
    pub attempts: u32,
    /// Seed for both sampling and the numeric search.
    pub seed: u64,
    /// Coordinate box from which base points are drawn.
    pub sample_box: SampleBox,
}

impl Default for RuledParams {
    fn default() -> Self {
        RuledParams {
            points: 100,
            order: None,
            attempts: DEFAULT_SEARCH_RESTARTS,
            seed: 0,
            sample_box: SampleBox::default(),
        }
    }
}

/// Probe ruledness at seeded sample points (in parallel; the verdict merge
/// is ordered by sample index and does not depend on thread scheduling).
///
/// The merge follows the per-point searches: an exact refutation anywhere
/// gives `NotRuled`; verified rulings everywhere give `RuledEvidence`;
/// otherwise `Inconclusive`.
pub fn is_ruled_sampled(sys: &ExplicitSystem, params: &RuledParams) -> Result<Ruledness> {
    check_reserved(sys)?;
    let probes: Vec<Result<(JetPoint, RulingOutcome)>> = (0..params.points)
        .into_par_iter()
        .map(|i| {
            let p = sample_fiber_point_stream(sys, params.seed, u64::from(i), &params.sample_box)?;
            let point_seed = params.seed.wrapping_add(u64::from(i).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let out = find_ruling(sys, &p, params.order, params.attempts, point_seed)?;
            Ok((p, out))
        })
        .collect();

    let mut rulings: Vec<RulingCertificate> = Vec::new();
    let mut witnesses: Vec<NotRuledWitness> = Vec::new();
    let mut unresolved: Vec<JetPoint> = Vec::new();
    for probe in probes {
        let (point, outcome) = probe?;
        match outcome {
            RulingOutcome::Found(cert) => rulings.push(*cert),
            RulingOutcome::NotFound(nf) if nf.exact => witnesses.push(NotRuledWitness {
                point,
                detail: nf.detail,
            }),
            RulingOutcome::NotFound(_) => unresolved.push(point),
        }
    }

    if !witnesses.is_empty() {
        Ok(Ruledness::NotRuled { witnesses })
    } else if unresolved.is_empty() {
        Ok(Ruledness::RuledEvidence { rulings })
    } else {
        Ok(Ruledness::Inconclusive {
            rulings,
            unresolved,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        affine3, affine3_constrained, fiber_point, hyperbola2, power1, power2, rat, trivial2,
    };

    #[test]
    fn affine_fiber_has_infinite_contact_when_drift_component_matches() {
        let sys = affine3();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 1, 1),
                ("x2", 0, 1, 2),
                ("x3", 0, -1, 1),
                ("x2", 1, 2, 1),
                ("x3", 1, 3, 1),
            ],
        );
        // The residual is D(x1) - x2: any direction with zero first
        // coordinate leaves it unchanged.
        let w = vec![rat(0, 1), rat(5, 1), rat(-7, 1)];
        let rep = contact_order(&sys, &p, &w, 4).unwrap();
        assert_eq!(rep.grade(), ContactGrade::Infinite);
        // A drift-only direction leaves the fiber at first order.
        let w_bad = vec![rat(1, 1), rat(0, 1), rat(0, 1)];
        let rep_bad = contact_order(&sys, &p, &w_bad, 4).unwrap();
        assert_eq!(rep_bad.grade(), ContactGrade::Finite(1));
        assert!(!rep_bad.meets(4));
        assert!(rep.meets(4));
    }

    #[test]
    fn contact_grade_is_invariant_under_rescaling() {
        let sys = power2();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 1, 1),
                ("x3", 1, 1, 1),
            ],
        );
        let w = vec![rat(0, 1), rat(1, 1), rat(0, 1)];
        let scaled: Vec<_> = w.iter().map(|c| c * rat(-3, 7)).collect();
        let a = contact_order(&sys, &p, &w, 4).unwrap();
        let b = contact_order(&sys, &p, &scaled, 4).unwrap();
        assert_eq!(a.grade(), b.grade());
        assert_eq!(a.direction(), b.direction());
        assert_eq!(a.coefficients(), b.coefficients());
    }

    #[test]
    fn quartic_fiber_refuses_lines_exactly() {
        let sys = power2();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 1, 1),
                ("x3", 1, 1, 1),
            ],
        );
        let w = vec![rat(0, 1), rat(1, 1), rat(0, 1)];
        let rep = contact_order(&sys, &p, &w, 4).unwrap();
        match rep.grade() {
            ContactGrade::Finite(j) => assert!(j <= 2, "expected low finite contact, got {j}"),
            ContactGrade::Infinite => panic!("the quartic fiber contains no such line"),
        }
        match find_ruling(&sys, &p, None, 8, 0).unwrap() {
            RulingOutcome::NotFound(nf) => {
                assert!(nf.exact, "elimination should refute exactly: {}", nf.detail);
                assert!(nf.floor.is_none());
            }
            RulingOutcome::Found(cert) => {
                panic!("spurious ruling with direction {:?}", cert.direction())
            }
        }
    }

    #[test]
    fn cubic_fiber_yields_the_known_ruling_family() {
        let sys = power1();
        // y1 = 2, D(y2) = 1, D(y3) = 1, so A = 1 - 2 = -1 and the family
        // direction (A², y1, 1) = (1, 2, 1) normalizes to (1/2, 1, 1/2).
        let p = fiber_point(
            &sys,
            &[
                ("y1", 0, 2, 1),
                ("y2", 0, 0, 1),
                ("y3", 0, 0, 1),
                ("y2", 1, 1, 1),
                ("y3", 1, 1, 1),
            ],
        );
        match find_ruling(&sys, &p, None, 8, 0).unwrap() {
            RulingOutcome::Found(cert) => {
                assert_eq!(cert.found_by(), "elimination");
                assert_eq!(
                    cert.direction(),
                    &[rat(1, 2), rat(1, 1), rat(1, 2)],
                    "direction should be proportional to (A², y1, 1)"
                );
                assert_eq!(cert.extent(), (f64::NEG_INFINITY, f64::INFINITY));
                assert!(cert.verify(&sys, 20, 7).unwrap());
            }
            RulingOutcome::NotFound(nf) => panic!("ruling not found: {}", nf.detail),
        }
    }

    #[test]
    fn rational_rhs_fiber_is_a_hyperbola_without_lines() {
        let sys = hyperbola2();
        let p = fiber_point(&sys, &[("x1", 0, 0, 1), ("x2", 0, 3, 1), ("x2", 1, 2, 1)]);
        match find_ruling(&sys, &p, None, 8, 0).unwrap() {
            RulingOutcome::NotFound(nf) => assert!(nf.exact, "{}", nf.detail),
            RulingOutcome::Found(cert) => {
                panic!("hyperbola cannot contain a line: {:?}", cert.direction())
            }
        }
    }

    #[test]
    fn trivial_fiber_is_all_of_velocity_space() {
        let sys = trivial2();
        let p = fiber_point(
            &sys,
            &[
                ("u1", 0, 1, 1),
                ("u2", 0, 2, 1),
                ("u1", 1, 3, 1),
                ("u2", 1, 4, 1),
            ],
        );
        match find_ruling(&sys, &p, None, 8, 0).unwrap() {
            RulingOutcome::Found(cert) => {
                assert_eq!(cert.extent(), (f64::NEG_INFINITY, f64::INFINITY));
            }
            RulingOutcome::NotFound(nf) => panic!("trivial system must be ruled: {}", nf.detail),
        }
    }

    #[test]
    fn extent_stops_at_the_domain_boundary() {
        let sys = affine3_constrained();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 0, 1),
                ("x3", 1, 0, 1),
            ],
        );
        let w = vec![rat(0, 1), rat(1, 1), rat(0, 1)];
        let (lo, hi) = line_extent(&sys, &p, &w).unwrap();
        assert_eq!(lo, f64::NEG_INFINITY);
        assert!((hi - 1.0).abs() <= 1e-9, "boundary at 1 - λ = 0, got {hi}");
        assert!(hi <= 1.0, "endpoint must not overshoot the boundary");
    }

    #[test]
    fn extent_requires_infinite_contact() {
        let sys = power2();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 1, 1),
                ("x3", 1, 1, 1),
            ],
        );
        let w = vec![rat(0, 1), rat(1, 1), rat(0, 1)];
        assert!(matches!(
            line_extent(&sys, &p, &w),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn off_fiber_points_are_rejected() {
        let sys = affine3();
        let mut p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 0, 1),
                ("x3", 1, 0, 1),
            ],
        );
        p.insert(sys.var("x1", 1), rat(1, 1));
        let w = vec![rat(0, 1), rat(1, 1), rat(0, 1)];
        assert!(matches!(
            contact_order(&sys, &p, &w, 4),
            Err(Error::PointNotOnFiber { index: 0 })
        ));
    }

    #[test]
    fn zero_directions_are_rejected() {
        let sys = affine3();
        let p = fiber_point(
            &sys,
            &[
                ("x1", 0, 0, 1),
                ("x2", 0, 0, 1),
                ("x3", 0, 0, 1),
                ("x2", 1, 0, 1),
                ("x3", 1, 0, 1),
            ],
        );
        let w = vec![rat(0, 1), rat(0, 1), rat(0, 1)];
        assert!(matches!(
            contact_order(&sys, &p, &w, 4),
            Err(Error::ZeroDirection)
        ));
        let short = vec![rat(1, 1)];
        assert!(matches!(
            contact_order(&sys, &p, &short, 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampled_verdicts_separate_the_power_pair() {
        let params = RuledParams {
            points: 20,
            ..RuledParams::default()
        };
        match is_ruled_sampled(&power1(), &params).unwrap() {
            Ruledness::RuledEvidence { rulings } => {
                assert_eq!(rulings.len(), 20);
                for cert in &rulings {
                    assert_eq!(cert.contact().grade(), ContactGrade::Infinite);
                }
            }
            other => panic!("expected ruled evidence, got {}", other.label()),
        }
        match is_ruled_sampled(&power2(), &params).unwrap() {
            Ruledness::NotRuled { witnesses } => {
                assert_eq!(witnesses.len(), 20, "every admissible point is a witness");
            }
            other => panic!("expected a non-ruled verdict, got {}", other.label()),
        }
        match is_ruled_sampled(&affine3(), &params).unwrap() {
            Ruledness::RuledEvidence { rulings } => assert_eq!(rulings.len(), 20),
            other => panic!("expected ruled evidence, got {}", other.label()),
        }
    }
}
