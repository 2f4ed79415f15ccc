//! Explicit systems, jet points, and control-form elimination.
//!
//! An explicit system splits its state list into a drift block (here block
//! I) and a control block (block II, named by `controls`). The dynamics are
//! first-order equations for the drift states only: each right-hand side is
//! a rational expression in the full state and the first derivatives of the
//! control states. Control states have no equations; their derivatives of
//! any order are free jet coordinates. The degenerate case
//! `controls == states` (no equations at all) is allowed and plays the role
//! of the trivial system.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Block, Expr, ExprError, JetVar, RatFn};

/// A domain constraint over jet coordinates, either an inequation or a
/// strict sign condition. Conjunctions are plain lists of these.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    NonZero(Expr),
    Positive(Expr),
}

impl Constraint {
    pub fn expr(&self) -> &Expr {
        match self {
            Constraint::NonZero(e) | Constraint::Positive(e) => e,
        }
    }

    /// Exact check at a rational point.
    pub fn holds_exact(&self, env: &BTreeMap<JetVar, BigRational>) -> Result<bool> {
        let v = self.expr().eval_exact(env)?;
        Ok(match self {
            Constraint::NonZero(_) => !v.is_zero(),
            Constraint::Positive(_) => v.is_positive(),
        })
    }

    /// Floating check with a margin: NonZero demands |value| > margin,
    /// Positive demands value > margin.
    pub fn holds_f64(&self, env: &BTreeMap<JetVar, f64>, margin: f64) -> Result<bool> {
        let v = self.expr().eval_f64(env)?;
        if !v.is_finite() {
            return Ok(false);
        }
        Ok(match self {
            Constraint::NonZero(_) => v.abs() > margin,
            Constraint::Positive(_) => v > margin,
        })
    }
}

/// A system in explicit form. Construction validates the shape; all
/// analysis code may assume the invariants afterward.
#[derive(Clone, Debug)]
pub struct ExplicitSystem {
    name: String,
    states: Vec<Arc<str>>,
    controls: Vec<Arc<str>>,
    drift: Vec<Arc<str>>,
    /// Right-hand sides, one per drift state, as written.
    f: Vec<Expr>,
    /// Canonical forms of `f`, validated at construction.
    f_rat: Vec<RatFn>,
    domain: Vec<Constraint>,
}

impl ExplicitSystem {
    /// `equations` maps a drift-state name to its right-hand side. Every
    /// non-control state must have exactly one equation; control states
    /// must have none. Right-hand sides may mention any state at order 0
    /// and control states at order 1.
    pub fn new(
        name: &str,
        states: Vec<String>,
        controls: Vec<String>,
        equations: Vec<(String, Expr)>,
        domain: Vec<Constraint>,
    ) -> Result<Self> {
        let bad = |reason: String| Error::BadSystem {
            name: name.to_string(),
            reason,
        };
        if states.is_empty() {
            return Err(bad("state list is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(bad(format!("duplicate state {s}")));
            }
        }
        // controls must be a subsequence of states (same relative order)
        let mut si = states.iter();
        for c in &controls {
            if !si.any(|s| s == c) {
                if states.contains(c) {
                    return Err(bad(format!(
                        "controls must be listed in state order ({c} is out of order)"
                    )));
                }
                return Err(bad(format!("control {c} is not a state")));
            }
        }
        let control_set: BTreeSet<&String> = controls.iter().collect();
        if control_set.len() != controls.len() {
            return Err(bad("duplicate control".into()));
        }
        let drift: Vec<String> = states
            .iter()
            .filter(|s| !control_set.contains(s))
            .cloned()
            .collect();

        let mut rhs_by_state: BTreeMap<String, Expr> = BTreeMap::new();
        for (s, e) in equations {
            if control_set.contains(&s) {
                return Err(bad(format!("control state {s} cannot carry an equation")));
            }
            if !states.contains(&s) {
                return Err(bad(format!("equation for unknown state {s}")));
            }
            if rhs_by_state.insert(s.clone(), e).is_some() {
                return Err(bad(format!("duplicate equation for {s}")));
            }
        }
        let mut f = Vec::with_capacity(drift.len());
        for s in &drift {
            match rhs_by_state.remove(s) {
                Some(e) => f.push(e),
                None => return Err(bad(format!("missing equation for state {s}"))),
            }
        }

        // explicit form: right-hand sides live on (states, control derivatives)
        let mut f_rat = Vec::with_capacity(f.len());
        for (i, e) in f.iter().enumerate() {
            for v in e.vars() {
                let vname = v.name.as_ref();
                if !states.iter().any(|s| s == vname) {
                    return Err(bad(format!("unknown variable {v} in equation for {}", drift[i])));
                }
                let is_control = control_set.contains(&vname.to_string());
                let max_order = if is_control { 1 } else { 0 };
                if v.order > max_order {
                    return Err(bad(format!(
                        "variable {v} exceeds order {max_order} allowed in an explicit right-hand side"
                    )));
                }
            }
            f_rat.push(e.to_ratfn().map_err(Error::from)?);
        }

        for c in &domain {
            for v in c.expr().vars() {
                if !states.iter().any(|s| s.as_str() == v.name.as_ref()) {
                    return Err(bad(format!("unknown variable {v} in domain constraint")));
                }
                if v.order > 1 {
                    return Err(bad(format!(
                        "domain constraints are over coordinates of order at most 1, got {v}"
                    )));
                }
            }
            c.expr().to_ratfn().map_err(Error::from)?;
        }

        Ok(ExplicitSystem {
            name: name.to_string(),
            states: states.iter().map(|s| Arc::from(s.as_str())).collect(),
            controls: controls.iter().map(|s| Arc::from(s.as_str())).collect(),
            drift: drift.iter().map(|s| Arc::from(s.as_str())).collect(),
            f,
            f_rat,
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Full state dimension.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Control-block dimension (the fiber dimension of the velocity set).
    pub fn m(&self) -> usize {
        self.controls.len()
    }

    pub fn states(&self) -> &[Arc<str>] {
        &self.states
    }

    pub fn controls(&self) -> &[Arc<str>] {
        &self.controls
    }

    /// Drift states (block I), in state order.
    pub fn drift_states(&self) -> &[Arc<str>] {
        &self.drift
    }

    pub fn is_control(&self, name: &str) -> bool {
        self.controls.iter().any(|c| c.as_ref() == name)
    }

    pub fn is_state(&self, name: &str) -> bool {
        self.states.iter().any(|c| c.as_ref() == name)
    }

    /// Right-hand sides in drift order, as written.
    pub fn f(&self) -> &[Expr] {
        &self.f
    }

    pub(crate) fn f_rat(&self) -> &[RatFn] {
        &self.f_rat
    }

    pub fn domain(&self) -> &[Constraint] {
        &self.domain
    }

    /// A jet variable of this system, with the block filled in.
    pub fn var(&self, name: &str, order: u32) -> JetVar {
        let block = if self.is_control(name) {
            Block::StateII
        } else {
            Block::StateI
        };
        JetVar::new(name, block, order)
    }

    /// The defining residuals D(x_I) - f as expression trees.
    pub fn residual_exprs(&self) -> Vec<Expr> {
        self.drift
            .iter()
            .zip(&self.f)
            .map(|(s, rhs)| Expr::sub(Expr::var(self.var(s, 1)), rhs.clone()))
            .collect()
    }

    /// Free reduced coordinates up to `order`: drift states at order 0,
    /// control states at all orders `0..=order`.
    pub fn reduced_coords(&self, order: u32) -> Vec<JetVar> {
        let mut out = Vec::new();
        for s in &self.states {
            if self.is_control(s) {
                for k in 0..=order {
                    out.push(self.var(s, k));
                }
            } else {
                out.push(self.var(s, 0));
            }
        }
        out
    }

    /// Exact defining residuals at a point carrying values for the full
    /// order-1 jet.
    pub fn residuals(&self, p: &JetPoint) -> Result<Vec<BigRational>> {
        let mut out = Vec::with_capacity(self.drift.len());
        for (s, rhs) in self.drift.iter().zip(&self.f_rat) {
            let lhs = p
                .get(&self.var(s, 1))
                .ok_or_else(|| ExprError::UnboundVariable(format!("D({s})")))?;
            out.push(lhs - rhs.eval_exact(p.env())?);
        }
        Ok(out)
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

impl fmt::Display for ExplicitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (n = {}, m = {})",
            self.name,
            self.n(),
            self.m()
        )
    }
}

/// An exact assignment of rational values to jet coordinates.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct JetPoint {
    vals: BTreeMap<JetVar, BigRational>,
    order: u32,
}

impl JetPoint {
    pub fn new(order: u32) -> Self {
        JetPoint {
            vals: BTreeMap::new(),
            order,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn insert(&mut self, v: JetVar, value: BigRational) {
        self.vals.insert(v, value);
    }

    pub fn get(&self, v: &JetVar) -> Option<&BigRational> {
        self.vals.get(v)
    }

    pub fn env(&self) -> &BTreeMap<JetVar, BigRational> {
        &self.vals
    }

    pub fn env_f64(&self) -> BTreeMap<JetVar, f64> {
        self.vals
            .iter()
            .map(|(v, q)| (v.clone(), q.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JetVar, &BigRational)> {
        self.vals.iter()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }
}

impl fmt::Display for JetPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, q) in &self.vals {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{v} = {q}")?;
            first = false;
        }
        Ok(())
    }
}

/// A classical control system `dx = F(x, u)` with the controls in their own
/// namespace, used as input to triangular-form elimination.
#[derive(Clone, Debug)]
pub struct ControlForm {
    name: String,
    states: Vec<Arc<str>>,
    controls: Vec<Arc<str>>,
    f: Vec<Expr>,
}

impl ControlForm {
    /// `f` has one component per state, over state variables and control
    /// variables, both at order 0.
    pub fn new(
        name: &str,
        states: Vec<String>,
        controls: Vec<String>,
        f: Vec<Expr>,
    ) -> Result<Self> {
        let bad = |reason: String| Error::BadSystem {
            name: name.to_string(),
            reason,
        };
        if f.len() != states.len() {
            return Err(Error::DimensionMismatch {
                what: "control-form right-hand side",
                expected: states.len(),
                got: f.len(),
            });
        }
        if controls.len() > states.len() {
            return Err(bad("more controls than states".into()));
        }
        let mut seen = BTreeSet::new();
        for s in states.iter().chain(controls.iter()) {
            if !seen.insert(s.clone()) {
                return Err(bad(format!("duplicate name {s}")));
            }
        }
        for e in &f {
            for v in e.vars() {
                let known = states.iter().chain(controls.iter()).any(|s| s.as_str() == v.name.as_ref());
                if !known {
                    return Err(bad(format!("unknown variable {v}")));
                }
                if v.order > 0 {
                    return Err(bad(format!(
                        "control-form right-hand sides are order 0 expressions, got {v}"
                    )));
                }
            }
            e.to_ratfn().map_err(Error::from)?;
        }
        Ok(ControlForm {
            name: name.to_string(),
            states: states.iter().map(|s| Arc::from(s.as_str())).collect(),
            controls: controls.iter().map(|s| Arc::from(s.as_str())).collect(),
            f,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.controls.len()
    }

    pub fn states(&self) -> &[Arc<str>] {
        &self.states
    }

    pub fn controls(&self) -> &[Arc<str>] {
        &self.controls
    }

    pub fn f(&self) -> &[Expr] {
        &self.f
    }

    /// Numeric rank test of the control Jacobian dF/du at a point given as
    /// values for states and controls: full rank m means the smallest
    /// singular value exceeds 1e-9 times the largest.
    pub fn check_rank(&self, env: &BTreeMap<JetVar, f64>) -> Result<bool> {
        let n = self.n();
        let m = self.m();
        if m == 0 {
            return Ok(true);
        }
        let mut data = Vec::with_capacity(n * m);
        for fi in &self.f {
            for u in &self.controls {
                let d = fi.differentiate(&JetVar::plain(u, 0));
                data.push(d.eval_f64(env).map_err(Error::from)?);
            }
        }
        let jac = nalgebra::DMatrix::from_row_slice(n, m, &data);
        let svals = jac.svd(false, false).singular_values;
        let smax = svals.iter().cloned().fold(0.0, f64::max);
        let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
        if smax == 0.0 {
            return Ok(false);
        }
        Ok(smin > 1e-9 * smax)
    }
}

/// Eliminate the controls of a system in triangular form: the last m state
/// equations must read `D(x) = u` identically, one control each, in order.
/// The controls are then renamed into the derivatives of those states and
/// the result is an explicit system whose control block is the last m
/// states.
pub fn from_control_form(cf: &ControlForm) -> Result<ExplicitSystem> {
    let n = cf.n();
    let m = cf.m();
    if m > n {
        return Err(Error::BadSystem {
            name: cf.name.to_string(),
            reason: "more controls than states".into(),
        });
    }
    let tail = &cf.states[n - m..];
    for (j, s) in tail.iter().enumerate() {
        let u = JetVar::plain(&cf.controls[j], 0);
        let diff = Expr::sub(cf.f[n - m + j].clone(), Expr::var(u));
        if !diff.is_zero().map_err(Error::from)? {
            return Err(Error::NotInTriangularForm {
                state: s.to_string(),
                control: cf.controls[j].to_string(),
            });
        }
    }
    // substitute u_j by D(x_IIj) in the drift equations
    let mut bindings = BTreeMap::new();
    for (j, s) in tail.iter().enumerate() {
        bindings.insert(
            JetVar::plain(&cf.controls[j], 0),
            Expr::var(JetVar::new(s, Block::StateII, 1)),
        );
    }
    let mut equations = Vec::new();
    for i in 0..n - m {
        let rhs = cf.f[i].substitute(&bindings).map_err(Error::from)?;
        equations.push((cf.states[i].to_string(), rhs));
    }
    ExplicitSystem::new(
        &cf.name,
        cf.states.iter().map(|s| s.to_string()).collect(),
        tail.iter().map(|s| s.to_string()).collect(),
        equations,
        Vec::new(),
    )
}

/// A closed box `[lo, hi]` applied to every sampled coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { lo: -2.0, hi: 2.0 }
    }
}

/// Sampling grid denominator: drawn values are integers over this, so all
/// downstream arithmetic stays exact.
const SAMPLE_DEN: i64 = 1024;
const SAMPLE_ATTEMPTS: u32 = 1000;

pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_rational(rng: &mut ChaCha8Rng, bx: &SampleBox) -> Option<BigRational> {
    let lo = (bx.lo * SAMPLE_DEN as f64).ceil();
    let hi = (bx.hi * SAMPLE_DEN as f64).floor();
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return None;
    }
    let (lo, hi) = (lo as i64, hi as i64);
    let n = rng.random_range(lo..=hi);
    Some(BigRational::new(BigInt::from(n), BigInt::from(SAMPLE_DEN)))
}

/// Draw a point on the order-1 solution fiber: free coordinates (states at
/// order 0, control derivatives) from the box, drift derivatives computed
/// from the right-hand sides, domain constraints enforced by rejection.
/// Residuals at the result are exactly zero by construction.
pub fn sample_fiber_point(
    sys: &ExplicitSystem,
    seed: u64,
    bx: &SampleBox,
) -> Result<JetPoint> {
    sample_solution_jet_with(sys, 1, seed, 0, bx, &[], &|_| Ok(()))
}

/// Like [`sample_fiber_point`] with an explicit RNG stream, so indexed
/// batches of points can be drawn independently from one seed.
pub fn sample_fiber_point_stream(
    sys: &ExplicitSystem,
    seed: u64,
    stream: u64,
    bx: &SampleBox,
) -> Result<JetPoint> {
    sample_solution_jet_with(sys, 1, seed, stream, bx, &[], &|_| Ok(()))
}

/// Shared sampler: draws the free reduced coordinates up to `order`, fills
/// drift derivatives of order 1 via the right-hand sides, and rejects until
/// the system domain plus `extra` constraints hold. `fill` may derive
/// higher drift derivatives before the constraints are checked.
pub(crate) fn sample_solution_jet_with(
    sys: &ExplicitSystem,
    order: u32,
    seed: u64,
    stream: u64,
    bx: &SampleBox,
    extra: &[Constraint],
    fill: &dyn Fn(&mut JetPoint) -> Result<()>,
) -> Result<JetPoint> {
    let mut rng = seeded_rng(seed, stream);
    let mut attempts = 0;
    'draw: while attempts < SAMPLE_ATTEMPTS {
        attempts += 1;
        let mut p = JetPoint::new(order);
        for v in sys.reduced_coords(order) {
            match draw_rational(&mut rng, bx) {
                Some(q) => p.insert(v, q),
                None => return Err(Error::RegionExhausted { attempts: 0 }),
            }
        }
        // drift derivatives from the right-hand sides
        for (s, rhs) in sys.drift_states().iter().zip(sys.f_rat()) {
            match rhs.eval_exact(p.env()) {
                Ok(q) => p.insert(sys.var(s, 1), q),
                Err(ExprError::DenominatorVanishes) => continue 'draw,
                Err(e) => return Err(e.into()),
            }
        }
        if fill(&mut p).is_err() {
            continue 'draw;
        }
        for c in sys.domain().iter().chain(extra.iter()) {
            match c.holds_exact(p.env()) {
                Ok(true) => {}
                Ok(false) => continue 'draw,
                Err(Error::Expr(ExprError::DenominatorVanishes)) => continue 'draw,
                Err(e) => return Err(e),
            }
        }
        return Ok(p);
    }
    Err(Error::RegionExhausted { attempts })
}
