//! Prolongation of systems and of maps, reduction of jets to solution
//! coordinates, and the total derivative along a system.
//!
//! On solutions, every derivative of a drift state is determined by the
//! system: differentiating the defining equations repeatedly gives the
//! prolonged right-hand sides `f_k` with `D^{k+1}(x_I) = f_k`. Working in
//! *reduced coordinates* — drift states at order 0, control states at all
//! orders — turns statements "for all jets of solutions" into identities of
//! rational functions, which the expression kernel decides exactly.

use num::BigRational;

use crate::equiv::JetMap;
use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, RatFn};
use crate::system::{
    sample_solution_jet_with, ExplicitSystem, JetPoint, SampleBox,
};

/// Cap on prolongation order, bounding expression swell.
pub const DEFAULT_MAX_PROLONG: u32 = 8;

fn drift_index(sys: &ExplicitSystem, v: &JetVar) -> Option<usize> {
    sys.drift_states()
        .iter()
        .position(|s| s.as_ref() == v.name.as_ref())
}

/// Total derivative of a *reduced* rational function along the system:
/// drift states at order 0 differentiate to their right-hand sides, every
/// other coordinate to the next-order coordinate.
fn td_reduced(g: &RatFn, sys: &ExplicitSystem) -> RatFn {
    let mut out = RatFn::zero();
    for v in g.vars() {
        let d = g.derivative(&v);
        if d.is_zero() {
            continue;
        }
        let vdot = match drift_index(sys, &v) {
            Some(idx) if v.order == 0 => sys.f_rat()[idx].clone(),
            _ => RatFn::var(v.up()),
        };
        out = out.add(&d.mul(&vdot));
    }
    out
}

/// Prolonged right-hand sides `f_0 .. f_i` (levels 0 through `i`), where
/// `f_0` is the system right-hand side and `f_k` its k-fold total
/// derivative along the system. Level k involves control derivatives up to
/// order k + 1 and drift states at order 0 only.
pub(crate) fn prolong_f_levels(
    sys: &ExplicitSystem,
    i: u32,
) -> Result<Vec<Vec<RatFn>>> {
    if i > DEFAULT_MAX_PROLONG {
        return Err(Error::ProlongationOrderExceeded {
            requested: i,
            limit: DEFAULT_MAX_PROLONG,
        });
    }
    let mut levels = Vec::with_capacity(i as usize + 1);
    levels.push(sys.f_rat().to_vec());
    for _ in 0..i {
        let prev = levels.last().expect("at least one level");
        let next: Vec<RatFn> = prev.iter().map(|g| td_reduced(g, sys)).collect();
        levels.push(next);
    }
    Ok(levels)
}

/// The i-th prolonged right-hand side `f_i`, one expression per drift
/// state. `f_0` is the system right-hand side itself.
pub fn prolong_f(sys: &ExplicitSystem, i: u32) -> Result<Vec<Expr>> {
    let levels = prolong_f_levels(sys, i)?;
    Ok(levels[i as usize].iter().map(|r| r.to_expr()).collect())
}

/// A system together with its defining equations differentiated up to a
/// given order: `D^k(x_I) = f_{k-1}` for `1 <= k <= order`.
#[derive(Clone, Debug)]
pub struct ProlongedSystem {
    base: ExplicitSystem,
    order: u32,
    levels: Vec<Vec<RatFn>>,
}

impl ProlongedSystem {
    pub fn base(&self) -> &ExplicitSystem {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// All equations, as (left-hand jet variable, right-hand side) pairs:
    /// for each drift state s and each 1 <= k <= order, `D^k(s) = f_{k-1}`.
    pub fn equations(&self) -> Vec<(JetVar, Expr)> {
        let mut out = Vec::new();
        for k in 1..=self.order {
            for (s, rhs) in self
                .base
                .drift_states()
                .iter()
                .zip(&self.levels[(k - 1) as usize])
            {
                out.push((self.base.var(s, k), rhs.to_expr()));
            }
        }
        out
    }

    /// Exact residuals `D^k(x_I) - f_{k-1}` at a jet point carrying values
    /// for all involved coordinates.
    pub fn residuals(&self, p: &JetPoint) -> Result<Vec<BigRational>> {
        let mut out = Vec::new();
        for k in 1..=self.order {
            for (s, rhs) in self
                .base
                .drift_states()
                .iter()
                .zip(&self.levels[(k - 1) as usize])
            {
                let v = self.base.var(s, k);
                let lhs = p.get(&v).ok_or_else(|| {
                    crate::expr::ExprError::UnboundVariable(v.to_string())
                })?;
                out.push(lhs - rhs.eval_exact(p.env())?);
            }
        }
        Ok(out)
    }
}

/// Differentiate the defining equations up to order `k` (`k = 1` returns
/// the system's own equations). The domain is inherited unchanged.
pub fn prolong_system(sys: &ExplicitSystem, k: u32) -> Result<ProlongedSystem> {
    if k == 0 {
        return Err(Error::Invalid(
            "prolongation order must be at least 1".into(),
        ));
    }
    let levels = prolong_f_levels(sys, k - 1)?;
    Ok(ProlongedSystem {
        base: sys.clone(),
        order: k,
        levels,
    })
}

/// Reduce a rational function to solution coordinates: every drift-state
/// derivative `D^k(x_I)` is replaced by the prolonged right-hand side
/// `f_{k-1}`. The result involves drift states at order 0 and control
/// derivatives only, and agrees with the input on all jets of solutions.
pub(crate) fn reduce_rat(g: &RatFn, sys: &ExplicitSystem) -> Result<RatFn> {
    let mut kmax = 0;
    for v in g.vars() {
        if drift_index(sys, &v).is_some() {
            kmax = kmax.max(v.order);
        }
    }
    if kmax == 0 {
        return Ok(g.clone());
    }
    let levels = prolong_f_levels(sys, kmax - 1)?;
    let mut bindings = std::collections::BTreeMap::new();
    for (idx, s) in sys.drift_states().iter().enumerate() {
        for k in 1..=kmax {
            bindings.insert(sys.var(s, k), levels[(k - 1) as usize][idx].clone());
        }
    }
    g.substitute(&bindings).map_err(Error::from)
}

/// Reduce an expression to solution coordinates (see [`reduce_rat`]);
/// returns the canonical form.
pub fn reduce(e: &Expr, sys: &ExplicitSystem) -> Result<Expr> {
    let r = e.to_ratfn().map_err(Error::from)?;
    Ok(reduce_rat(&r, sys)?.to_expr())
}

/// Total derivative along the system, on reduced coordinates: drift states
/// differentiate to their right-hand sides, control derivatives shift up
/// one order. Inputs that still mention drift derivatives are reduced
/// first, so this always equals `reduce(free_total_derivative(e))`.
pub(crate) fn sys_total_derivative_rat(
    g: &RatFn,
    sys: &ExplicitSystem,
) -> Result<RatFn> {
    let reduced = reduce_rat(g, sys)?;
    Ok(td_reduced(&reduced, sys))
}

/// Total derivative along the system (see [`sys_total_derivative_rat`]).
pub fn sys_total_derivative(e: &Expr, sys: &ExplicitSystem) -> Result<Expr> {
    let r = e.to_ratfn().map_err(Error::from)?;
    Ok(sys_total_derivative_rat(&r, sys)?.to_expr())
}

/// Prolong a tuple of reduced expressions over `sys` to `r` levels: level 0
/// is the tuple itself, level l its l-fold total derivative along the
/// system.
pub(crate) fn prolong_components_rat(
    components: &[RatFn],
    sys: &ExplicitSystem,
    r: u32,
) -> Result<Vec<Vec<RatFn>>> {
    let mut levels = Vec::with_capacity(r as usize + 1);
    let mut base = Vec::with_capacity(components.len());
    for c in components {
        base.push(reduce_rat(c, sys)?);
    }
    levels.push(base);
    for _ in 0..r {
        let prev = levels.last().expect("at least one level");
        let next: Vec<RatFn> = prev.iter().map(|g| td_reduced(g, sys)).collect();
        levels.push(next);
    }
    Ok(levels)
}

/// Prolongation of a map to order `r`: level l (0 <= l <= r) holds the
/// l-fold total derivative of each component along the map's source
/// system. Truncating the result to a smaller order equals prolonging to
/// that order directly.
pub fn prolong_map(map: &JetMap, r: u32) -> Result<Vec<Vec<Expr>>> {
    let levels = prolong_components_rat(map.components_rat(), map.source(), r)?;
    Ok(levels
        .into_iter()
        .map(|lv| lv.iter().map(|g| g.to_expr()).collect())
        .collect())
}

/// Draw a point on the order-`order` solution locus: free coordinates from
/// the box, drift derivatives of every order computed from the prolonged
/// right-hand sides, domain enforced by rejection. Deterministic per seed
/// and stream.
pub fn sample_solution_jet(
    sys: &ExplicitSystem,
    order: u32,
    seed: u64,
    stream: u64,
    bx: &SampleBox,
) -> Result<JetPoint> {
    sample_solution_jet_constrained(sys, order, seed, stream, bx, &[])
}

/// [`sample_solution_jet`] with additional rejection constraints beyond
/// the system's own domain (for example a map's domain).
pub(crate) fn sample_solution_jet_constrained(
    sys: &ExplicitSystem,
    order: u32,
    seed: u64,
    stream: u64,
    bx: &SampleBox,
    extra: &[crate::system::Constraint],
) -> Result<JetPoint> {
    let levels = if order >= 2 {
        prolong_f_levels(sys, order - 1)?
    } else {
        Vec::new()
    };
    sample_solution_jet_with(sys, order, seed, stream, bx, extra, &|p| {
        for k in 2..=order {
            let level = &levels[(k - 1) as usize];
            for (idx, s) in sys.drift_states().iter().enumerate() {
                let q = level[idx].eval_exact(p.env())?;
                p.insert(sys.var(s, k), q);
            }
        }
        Ok(())
    })
}
