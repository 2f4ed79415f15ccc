//! Shared example systems for unit tests.
//!
//! The same handful of three-state systems exercises most of the library:
//! an affine system whose fiber is a line, a quadric whose fiber is ruled,
//! a pair of cubic/quartic systems of which exactly one is ruled, and small
//! trivial/integrator systems.

use num::{BigInt, BigRational};

use crate::expr::{Expr, JetVar};
use crate::system::{Constraint, ExplicitSystem, JetPoint};

pub(crate) fn v(name: &str, order: u32) -> Expr {
    Expr::var(JetVar::plain(name, order))
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Affine system: D(x1) = x2, controls (x2, x3). Its fibers are lines.
pub(crate) fn affine3() -> ExplicitSystem {
    ExplicitSystem::new(
        "Affine3",
        names(&["x1", "x2", "x3"]),
        names(&["x2", "x3"]),
        vec![("x1".to_string(), v("x2", 0))],
        vec![],
    )
    .expect("valid system")
}

/// Affine system with a velocity-domain constraint excluding D(x2) = 1.
pub(crate) fn affine3_constrained() -> ExplicitSystem {
    let guard = Expr::sub(Expr::one(), v("x2", 1));
    ExplicitSystem::new(
        "Affine3Guarded",
        names(&["x1", "x2", "x3"]),
        names(&["x2", "x3"]),
        vec![("x1".to_string(), v("x2", 0))],
        vec![Constraint::NonZero(guard)],
    )
    .expect("valid system")
}

/// Quadric system: D(y1) = y2 + (D(y2) − y1·D(y3))·D(y3). Ruled fibers.
pub(crate) fn quadric3() -> ExplicitSystem {
    let a = Expr::sub(v("y2", 1), Expr::mul(vec![v("y1", 0), v("y3", 1)]));
    let rhs = Expr::add(vec![v("y2", 0), Expr::mul(vec![a, v("y3", 1)])]);
    ExplicitSystem::new(
        "Quadric3",
        names(&["y1", "y2", "y3"]),
        names(&["y2", "y3"]),
        vec![("y1".to_string(), rhs)],
        vec![],
    )
    .expect("valid system")
}

/// Cubic system: D(y1) = y2 + (D(y2) − y1·D(y3))²·D(y3). Its fibers are
/// ruled by the family w = (A², y1, 1) with A = D(y2) − y1·D(y3).
pub(crate) fn power1() -> ExplicitSystem {
    let a = Expr::sub(v("y2", 1), Expr::mul(vec![v("y1", 0), v("y3", 1)]));
    let rhs = Expr::add(vec![
        v("y2", 0),
        Expr::mul(vec![Expr::pow(a, 2), v("y3", 1)]),
    ]);
    ExplicitSystem::new(
        "Power1",
        names(&["y1", "y2", "y3"]),
        names(&["y2", "y3"]),
        vec![("y1".to_string(), rhs)],
        vec![],
    )
    .expect("valid system")
}

/// Quartic system: D(x1) = x2 + (D(x2) − x1·D(x3))²·D(x3)². Away from the
/// locus (D(x2) − x1·D(x3))·D(x3) = 0 its fibers contain no lines, which the
/// domain constraint pins as the region of interest.
pub(crate) fn power2() -> ExplicitSystem {
    let a = || Expr::sub(v("x2", 1), Expr::mul(vec![v("x1", 0), v("x3", 1)]));
    let rhs = Expr::add(vec![
        v("x2", 0),
        Expr::mul(vec![Expr::pow(a(), 2), Expr::pow(v("x3", 1), 2)]),
    ]);
    ExplicitSystem::new(
        "Power2",
        names(&["x1", "x2", "x3"]),
        names(&["x2", "x3"]),
        vec![("x1".to_string(), rhs)],
        vec![Constraint::NonZero(Expr::mul(vec![a(), v("x3", 1)]))],
    )
    .expect("valid system")
}

/// Trivial system with two states and no equations.
pub(crate) fn trivial2() -> ExplicitSystem {
    ExplicitSystem::new(
        "Trivial2",
        names(&["u1", "u2"]),
        names(&["u1", "u2"]),
        vec![],
        vec![],
    )
    .expect("valid system")
}

/// Five-state integrator tower: D(y1) = y2, D(y2) = y4, D(y3) = y5.
pub(crate) fn integrator5() -> ExplicitSystem {
    ExplicitSystem::new(
        "Integrator5",
        names(&["y1", "y2", "y3", "y4", "y5"]),
        names(&["y4", "y5"]),
        vec![
            ("y1".to_string(), v("y2", 0)),
            ("y2".to_string(), v("y4", 0)),
            ("y3".to_string(), v("y5", 0)),
        ],
        vec![],
    )
    .expect("valid system")
}

/// System with a rational right-hand side: D(x1) = 1 / D(x2). Its fiber is
/// a hyperbola, which contains no line segment.
pub(crate) fn hyperbola2() -> ExplicitSystem {
    ExplicitSystem::new(
        "Hyperbola2",
        names(&["x1", "x2"]),
        names(&["x2"]),
        vec![("x1".to_string(), Expr::div(Expr::one(), v("x2", 1)))],
        vec![],
    )
    .expect("valid system")
}

/// Build an order-1 fiber point from the free coordinates (drift states at
/// order 0, control states at orders 0 and 1); drift derivatives are filled
/// in from the right-hand sides so the residuals vanish exactly.
pub(crate) fn fiber_point(sys: &ExplicitSystem, free: &[(&str, u32, i64, i64)]) -> JetPoint {
    let mut p = JetPoint::new(1);
    for &(name, order, n, d) in free {
        p.insert(sys.var(name, order), rat(n, d));
    }
    for (s, f) in sys.drift_states().iter().zip(sys.f_rat()) {
        let val = f.eval_exact(p.env()).expect("right-hand side defined at the point");
        p.insert(sys.var(s, 1), val);
    }
    p
}
