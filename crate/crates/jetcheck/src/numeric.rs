//! Trajectory-level numeric validation: fixed-step integration with
//! polynomial control signals, exact control jets, drift jets from the
//! prolonged right-hand sides, centered finite differences, and
//! certificate validation along trajectories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num::ToPrimitive;

use crate::equiv::Certificate;
use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, Poly, RatFn};
use crate::prolong::{prolong_components_rat, prolong_f_levels};
use crate::system::ExplicitSystem;

/// A certificate denominator magnitude below this along a trajectory
/// aborts numeric validation.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Polynomial control signals
// ---------------------------------------------------------------------------

/// A control signal that is polynomial in time, so that all its time
/// derivatives are available exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPoly {
    /// Coefficients in ascending powers of `t`.
    coeffs: Vec<f64>,
}

impl ControlPoly {
    pub fn new(coeffs: Vec<f64>) -> ControlPoly {
        ControlPoly { coeffs }
    }

    pub fn constant(c: f64) -> ControlPoly {
        ControlPoly { coeffs: vec![c] }
    }

    /// Read a polynomial in the time variable `t` from an expression.
    pub fn from_expr(e: &Expr) -> Result<ControlPoly> {
        let r = e.to_ratfn().map_err(Error::from)?;
        let t = JetVar::plain("t", 0);
        for v in r.vars() {
            if v != t {
                return Err(Error::Invalid(format!(
                    "control signal may only depend on t, found {v}"
                )));
            }
        }
        let den = r
            .den()
            .as_constant()
            .cloned()
            .ok_or_else(|| Error::Invalid("control signal must be polynomial in t".into()))?;
        let mut coeffs = Vec::new();
        for c in r.num().coeffs_in(&t) {
            let v = if c.is_zero() {
                num::BigRational::from_integer(0.into())
            } else {
                c.as_constant()
                    .cloned()
                    .ok_or_else(|| Error::Invalid("control signal must be polynomial in t".into()))?
            };
            let ratio = v / den.clone();
            coeffs.push(ratio.to_f64().ok_or_else(|| {
                Error::Invalid("control coefficient is not representable as f64".into())
            })?);
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Ok(ControlPoly { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> ControlPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect::<Vec<_>>();
        ControlPoly {
            coeffs: if coeffs.is_empty() { vec![0.0] } else { coeffs },
        }
    }

    /// Value and time derivatives `[c(t), c'(t), ..., c^(order)(t)]`.
    pub fn jet(&self, t: f64, order: u32) -> Vec<f64> {
        let mut out = Vec::with_capacity(order as usize + 1);
        let mut p = self.clone();
        out.push(p.eval(t));
        for _ in 0..order {
            p = p.derivative();
            out.push(p.eval(t));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// A numerically integrated solution on a uniform time grid, carrying the
/// time derivatives of every state up to a requested order: control jets
/// exactly from the control polynomials, drift jets from the prolonged
/// right-hand sides.
#[derive(Clone, Debug)]
pub struct Trajectory {
    system: String,
    states: Vec<Arc<str>>,
    t0: f64,
    h: f64,
    order: u32,
    /// `jets[k][step][state]` is the k-th time derivative at a grid point.
    jets: Vec<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn states(&self) -> &[Arc<str>] {
        &self.states
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.jets[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets[0].is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn t(&self, step: usize) -> f64 {
        self.t0 + self.h * step as f64
    }

    /// k-th derivative of one state at one grid point.
    pub fn jet(&self, k: u32, step: usize, state: usize) -> f64 {
        self.jets[k as usize][step][state]
    }

    pub fn value(&self, step: usize, state: usize) -> f64 {
        self.jets[0][step][state]
    }

    /// One state's k-th derivative as a time series.
    pub fn column(&self, k: u32, state: usize) -> Vec<f64> {
        self.jets[k as usize].iter().map(|row| row[state]).collect()
    }

    /// All jet coordinates at a grid point, keyed by variable.
    pub fn jet_env(&self, step: usize) -> BTreeMap<JetVar, f64> {
        let mut env = BTreeMap::new();
        for (k, level) in self.jets.iter().enumerate() {
            for (i, name) in self.states.iter().enumerate() {
                env.insert(JetVar::plain(name, k as u32), level[step][i]);
            }
        }
        env
    }

    /// Delimited text: header line, then one row per grid point with the
    /// time, the state values, and the higher derivatives.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("t");
        for name in &self.states {
            write!(out, ",{name}").unwrap();
        }
        for k in 1..=self.order {
            for name in &self.states {
                write!(out, ",D{k}({name})").unwrap();
            }
        }
        out.push('\n');
        for step in 0..self.len() {
            write!(out, "{:.15e}", self.t(step)).unwrap();
            for level in &self.jets {
                for v in &level[step] {
                    write!(out, ",{v:.15e}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Integrate the drift equations with prescribed polynomial controls by
/// the classical fourth-order Runge–Kutta method on a fixed grid, deriving
/// state jets up to `order` at every grid point.
///
/// `x0` gives the drift states' initial values (in drift-state order);
/// control values come from the polynomials. Domain constraints are
/// checked at every grid point.
pub fn integrate(
    sys: &ExplicitSystem,
    x0: &[f64],
    controls: &[ControlPoly],
    t_span: (f64, f64),
    h: f64,
    order: u32,
) -> Result<Trajectory> {
    let d = sys.n() - sys.m();
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            what: "drift initial values",
            expected: d,
            got: x0.len(),
        });
    }
    if controls.len() != sys.m() {
        return Err(Error::DimensionMismatch {
            what: "control polynomials",
            expected: sys.m(),
            got: controls.len(),
        });
    }
    let (t0, t1) = t_span;
    if !(h > 0.0 && h.is_finite() && t1 > t0) {
        return Err(Error::Invalid(format!(
            "invalid time grid: span ({t0}, {t1}), step {h}"
        )));
    }
    let steps = ((t1 - t0) / h).round().max(1.0) as usize;

    // f, Df, DDf, ...: level k gives the (k+1)-th drift derivative.
    let f_levels = if order == 0 {
        Vec::new()
    } else {
        prolong_f_levels(sys, order - 1)?
    };

    let drift_names: Vec<Arc<str>> = sys.drift_states().to_vec();
    let control_names: Vec<Arc<str>> = sys.controls().to_vec();

    // Base environment: control jets at time t up to `ctrl_order`.
    let control_env = |t: f64, ctrl_order: u32| -> BTreeMap<JetVar, f64> {
        let mut env = BTreeMap::new();
        for (j, c) in controls.iter().enumerate() {
            for (k, v) in c.jet(t, ctrl_order).into_iter().enumerate() {
                env.insert(JetVar::plain(&control_names[j], k as u32), v);
            }
        }
        env
    };

    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let mut env = control_env(t, 1);
        for (i, name) in drift_names.iter().enumerate() {
            env.insert(JetVar::plain(name, 0), y[i]);
        }
        let mut out = Vec::with_capacity(d);
        for f in sys.f_rat() {
            match f.eval_f64(&env) {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return Err(Error::StepUnstable { t }),
            }
        }
        Ok(out)
    };

    let mut jets = vec![vec![Vec::new(); 0]; order as usize + 1];
    let mut y = x0.to_vec();
    for step in 0..=steps {
        let t = t0 + h * step as f64;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepUnstable { t });
        }

        // Full jet environment at this grid point.
        let mut env = control_env(t, order.max(1));
        for (i, name) in drift_names.iter().enumerate() {
            env.insert(JetVar::plain(name, 0), y[i]);
        }
        for c in sys.domain() {
            if !c.holds_f64(&env, 0.0).map_err(Error::from)? {
                return Err(Error::DomainViolated { t });
            }
        }
        for k in 1..=order {
            for (i, name) in drift_names.iter().enumerate() {
                let v = f_levels[k as usize - 1][i]
                    .eval_f64(&env)
                    .map_err(Error::from)?;
                if !v.is_finite() {
                    return Err(Error::StepUnstable { t });
                }
                env.insert(JetVar::plain(name, k), v);
            }
        }

        // Store the row in state order at every level.
        for (k, level) in jets.iter_mut().enumerate() {
            let row: Vec<f64> = sys
                .states()
                .iter()
                .map(|s| env[&JetVar::plain(s, k as u32)])
                .collect();
            level.push(row);
        }

        if step < steps {
            let k1 = rhs(t, &y)?;
            let mid = |base: &[f64], k: &[f64], w: f64| -> Vec<f64> {
                base.iter().zip(k).map(|(b, ki)| b + w * ki).collect()
            };
            let k2 = rhs(t + h / 2.0, &mid(&y, &k1, h / 2.0))?;
            let k3 = rhs(t + h / 2.0, &mid(&y, &k2, h / 2.0))?;
            let k4 = rhs(t + h, &mid(&y, &k3, h))?;
            for i in 0..d {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }

    Ok(Trajectory {
        system: sys.name().to_string(),
        states: sys.states().to_vec(),
        t0,
        h,
        order,
        jets,
    })
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Centered finite-difference derivative estimates up to `order`, built by
/// repeated application of the centered first difference (each application
/// keeps O(h²) accuracy and trims one sample from each end).
///
/// `result[k]` has length `values.len() - 2k`; `result[k][i]` estimates the
/// k-th derivative at original index `i + k`.
pub fn fd_jet(values: &[f64], order: u32, h: f64) -> Result<Vec<Vec<f64>>> {
    let needed = 2 * order as usize + 1;
    if values.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: values.len(),
        });
    }
    let mut out = Vec::with_capacity(order as usize + 1);
    out.push(values.to_vec());
    for k in 0..order as usize {
        let prev = &out[k];
        let next: Vec<f64> = (1..prev.len() - 1)
            .map(|i| (prev[i + 1] - prev[i - 1]) / (2.0 * h))
            .collect();
        out.push(next);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Numeric reports
// ---------------------------------------------------------------------------

/// One numeric check: a maximum observed error against a tolerance.
#[derive(Clone, Debug)]
pub struct NumericCheck {
    pub label: String,
    pub passed: bool,
    pub max_error: f64,
    pub tol: f64,
    pub detail: String,
}

impl NumericCheck {
    fn new(label: String, max_error: f64, tol: f64, detail: String) -> NumericCheck {
        NumericCheck {
            label,
            passed: max_error <= tol,
            max_error,
            tol,
            detail,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NumericReport {
    pub items: Vec<NumericCheck>,
}

impl NumericReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

/// Check that the stored drift jets agree with centered finite differences
/// of the integrated values — the defining consistency of a [`Trajectory`].
pub fn fd_consistency(traj: &Trajectory, tol: f64) -> Result<NumericCheck> {
    if traj.order() == 0 {
        return Err(Error::Invalid(
            "trajectory carries no derivatives to compare".into(),
        ));
    }
    let mut max_error: f64 = 0.0;
    for s in 0..traj.states().len() {
        let fd = fd_jet(&traj.column(0, s), 1, traj.h())?;
        for (i, est) in fd[1].iter().enumerate() {
            let stored = traj.jet(1, i + 1, s);
            max_error = max_error.max((est - stored).abs());
        }
    }
    Ok(NumericCheck::new(
        "first derivatives match finite differences of the values".into(),
        max_error,
        tol,
        format!("{} states over {} grid points", traj.states().len(), traj.len()),
    ))
}

fn eval_or_invalid(r: &RatFn, env: &BTreeMap<JetVar, f64>, what: &str) -> Result<f64> {
    let v = r.eval_f64(env).map_err(Error::from)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Invalid(format!("{what} evaluated to a non-finite value")))
    }
}

fn check_denominators(
    dens: &[&Poly],
    env: &BTreeMap<JetVar, f64>,
    t: f64,
) -> Result<()> {
    for den in dens {
        if den.as_constant().is_some() {
            continue;
        }
        let v = den.eval_f64(env).map_err(Error::from)?;
        if !(v.abs() >= SINGULAR_THRESHOLD) {
            return Err(Error::SingularLocusHit { t, value: v.abs() });
        }
    }
    Ok(())
}

/// Validate an equivalence certificate along an integrated trajectory of
/// its source system: push the trajectory through the forward map, check
/// the target equations with both symbolically prolonged derivatives and
/// centered finite differences, and check the round trip through the
/// backward map. Aborts with [`Error::SingularLocusHit`] if any map or
/// target denominator gets within [`SINGULAR_THRESHOLD`] of zero.
pub fn validate_certificate_numeric(
    cert: &Certificate,
    traj: &Trajectory,
    tol: f64,
) -> Result<NumericReport> {
    let fwd = cert.forward();
    let bwd = cert.backward();
    let src = fwd.source();
    let tgt = fwd.target();
    if traj.system() != src.name() {
        return Err(Error::Invalid(format!(
            "trajectory integrates {} but the certificate starts from {}",
            traj.system(),
            src.name()
        )));
    }
    let kp = bwd.order();
    let need = fwd.order().max(kp) + 1;
    if traj.order() < need {
        return Err(Error::Invalid(format!(
            "trajectory carries jets to order {} but validation needs {need}",
            traj.order()
        )));
    }

    // Forward components prolonged far enough for the round trip (levels
    // 0..=K') and the target residuals (level 1).
    let fwd_levels = prolong_components_rat(fwd.components_rat(), src, kp.max(1))?;
    for level in &fwd_levels {
        for comp in level {
            for v in comp.vars() {
                if v.order > traj.order() {
                    return Err(Error::Invalid(format!(
                        "prolonged forward map needs {v} beyond the trajectory's jet order {}",
                        traj.order()
                    )));
                }
            }
        }
    }

    let steps = traj.len();
    if steps < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: steps,
        });
    }
    let n2 = tgt.n();
    let tgt_drift_idx: Vec<usize> = tgt
        .drift_states()
        .iter()
        .map(|s| tgt.states().iter().position(|x| x == s).unwrap())
        .collect();

    let fwd_dens: Vec<&Poly> = fwd_levels
        .iter()
        .flat_map(|lv| lv.iter().map(|c| c.den()))
        .collect();
    let bwd_dens: Vec<&Poly> = bwd.components_rat().iter().map(|c| c.den()).collect();
    let f2_dens: Vec<&Poly> = tgt.f_rat().iter().map(|c| c.den()).collect();

    // Push the trajectory through the forward map.
    let mut zjets: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(steps); kp.max(1) as usize + 1];
    let mut max_sym: f64 = 0.0;
    let mut max_round: f64 = 0.0;
    for step in 0..steps {
        let t = traj.t(step);
        let env_x = traj.jet_env(step);
        check_denominators(&fwd_dens, &env_x, t)?;
        for (k, level) in fwd_levels.iter().enumerate() {
            let row: Result<Vec<f64>> = level
                .iter()
                .map(|c| eval_or_invalid(c, &env_x, "prolonged forward component"))
                .collect();
            zjets[k].push(row?);
        }

        // Target residuals with the symbolic derivative of the image.
        let mut env_z: BTreeMap<JetVar, f64> = BTreeMap::new();
        for (k, level) in zjets.iter().enumerate() {
            for (j, name) in tgt.states().iter().enumerate() {
                env_z.insert(JetVar::plain(name, k as u32), level[step][j]);
            }
        }
        check_denominators(&f2_dens, &env_z, t)?;
        for (i, &j) in tgt_drift_idx.iter().enumerate() {
            let fv = eval_or_invalid(&tgt.f_rat()[i], &env_z, "target right-hand side")?;
            max_sym = max_sym.max((zjets[1][step][j] - fv).abs());
        }

        // Round trip through the backward map.
        check_denominators(&bwd_dens, &env_z, t)?;
        for (s, comp) in bwd.components_rat().iter().enumerate() {
            let back = eval_or_invalid(comp, &env_z, "backward component")?;
            max_round = max_round.max((back - traj.value(step, s)).abs());
        }
    }

    // Target residuals with finite differences of the image trajectory.
    let mut max_fd: f64 = 0.0;
    let mut fd1: Vec<Vec<f64>> = Vec::with_capacity(n2);
    for j in 0..n2 {
        let series: Vec<f64> = (0..steps).map(|s| zjets[0][s][j]).collect();
        fd1.push(fd_jet(&series, 1, traj.h())?.swap_remove(1));
    }
    for step in 1..steps - 1 {
        let mut env_z: BTreeMap<JetVar, f64> = BTreeMap::new();
        for (j, name) in tgt.states().iter().enumerate() {
            env_z.insert(JetVar::plain(name, 0), zjets[0][step][j]);
            env_z.insert(JetVar::plain(name, 1), fd1[j][step - 1]);
        }
        for (i, &j) in tgt_drift_idx.iter().enumerate() {
            let fv = eval_or_invalid(&tgt.f_rat()[i], &env_z, "target right-hand side")?;
            max_fd = max_fd.max((fd1[j][step - 1] - fv).abs());
        }
    }

    let mut report = NumericReport::default();
    report.items.push(NumericCheck::new(
        format!("{}: target equations along the image (symbolic derivatives)", cert.name()),
        max_sym,
        tol,
        format!("{} grid points", steps),
    ));
    report.items.push(NumericCheck::new(
        format!("{}: target equations along the image (finite differences)", cert.name()),
        max_fd,
        tol,
        format!("{} interior grid points", steps - 2),
    ));
    report.items.push(NumericCheck::new(
        format!("{}: round trip through the backward map", cert.name()),
        max_round,
        tol,
        format!("{} grid points", steps),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::JetMap;
    use crate::fixtures::{affine3, power2, trivial2, v};
    use crate::system::Constraint;

    #[test]
    fn linear_control_gives_the_parabolic_solution() {
        // D(x1) = x2 with x2(t) = t, x3(t) = 0 and x1(0) = 0 has the
        // closed-form solution x1(t) = t^2/2.
        let sys = affine3();
        let traj = integrate(
            &sys,
            &[0.0],
            &[ControlPoly::new(vec![0.0, 1.0]), ControlPoly::constant(0.0)],
            (0.0, 1.0),
            1e-3,
            2,
        )
        .unwrap();
        assert_eq!(traj.len(), 1001);
        for step in (0..traj.len()).step_by(100) {
            let t = traj.t(step);
            assert!((traj.value(step, 0) - t * t / 2.0).abs() <= 1e-10);
            // Drift jets come from the right-hand side: D(x1) = x2 = t.
            assert!((traj.jet(1, step, 0) - t).abs() <= 1e-10);
            assert!((traj.jet(2, step, 0) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn trivial_systems_replay_their_controls() {
        let sys = trivial2();
        let traj = integrate(
            &sys,
            &[],
            &[
                ControlPoly::new(vec![1.0, 2.0]),
                ControlPoly::new(vec![-1.0, 0.5]),
            ],
            (0.0, 2.0),
            0.1,
            1,
        )
        .unwrap();
        for step in 0..traj.len() {
            let t = traj.t(step);
            assert!((traj.value(step, 0) - (1.0 + 2.0 * t)).abs() <= 1e-12);
            assert!((traj.value(step, 1) - (-1.0 + 0.5 * t)).abs() <= 1e-12);
            assert!((traj.jet(1, step, 0) - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn initial_domain_violations_are_reported_at_time_zero() {
        // Power2 requires (D(x2) - x1 D(x3)) D(x3) != 0; a constant third
        // control makes D(x3) = 0 identically.
        let sys = power2();
        let err = integrate(
            &sys,
            &[0.0],
            &[ControlPoly::constant(1.0), ControlPoly::constant(1.0)],
            (0.0, 1.0),
            1e-2,
            1,
        )
        .unwrap_err();
        assert_eq!(err, Error::DomainViolated { t: 0.0 });
    }

    #[test]
    fn blowups_are_reported_as_unstable() {
        // D(x1) = x1^2 from x1(0) = 1 blows up at t = 1.
        let sys = ExplicitSystem::new(
            "Blowup",
            vec!["x1".into(), "x2".into()],
            vec!["x2".into()],
            vec![("x1".to_string(), Expr::mul(vec![v("x1", 0), v("x1", 0)]))],
            vec![],
        )
        .unwrap();
        let err = integrate(
            &sys,
            &[1.0],
            &[ControlPoly::constant(0.0)],
            (0.0, 2.0),
            1e-2,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepUnstable { .. }));
    }

    #[test]
    fn control_polynomials_parse_from_expressions() {
        // 3 + t^2/2, written as an expression in t.
        let t = || Expr::var(JetVar::plain("t", 0));
        let e = Expr::add(vec![
            Expr::int(3),
            Expr::div(Expr::mul(vec![t(), t()]), Expr::int(2)),
        ]);
        let c = ControlPoly::from_expr(&e).unwrap();
        assert_eq!(c.coeffs(), &[3.0, 0.0, 0.5]);
        assert!((c.eval(2.0) - 5.0).abs() <= 1e-12);
        assert_eq!(c.jet(0.0, 2), vec![3.0, 0.0, 1.0]);

        let bad = Expr::div(Expr::int(1), t());
        assert!(ControlPoly::from_expr(&bad).is_err());

        let non_t = Expr::var(JetVar::plain("x1", 0));
        assert!(ControlPoly::from_expr(&non_t).is_err());
    }

    #[test]
    fn centered_differences_recover_polynomial_jets() {
        let h = 1e-3;
        let ts: Vec<f64> = (0..101).map(|i| i as f64 * h).collect();
        let sq: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let fd = fd_jet(&sq, 1, h).unwrap();
        for (i, est) in fd[1].iter().enumerate() {
            assert!((est - 2.0 * ts[i + 1]).abs() <= 1e-6);
        }
        let cube: Vec<f64> = ts.iter().map(|t| t * t * t).collect();
        let fd = fd_jet(&cube, 2, h).unwrap();
        for (i, est) in fd[2].iter().enumerate() {
            assert!((est - 6.0 * ts[i + 2]).abs() <= 1e-5);
        }
        assert!(matches!(
            fd_jet(&[1.0], 1, h),
            Err(Error::InsufficientSamples { needed: 3, got: 1 })
        ));
    }

    #[test]
    fn trajectory_jets_agree_with_finite_differences() {
        let sys = power2();
        // Controls keeping (D(x2) - x1 D(x3)) D(x3) away from zero.
        let traj = integrate(
            &sys,
            &[0.0],
            &[
                ControlPoly::new(vec![0.0, 1.0, 0.1]),
                ControlPoly::new(vec![0.0, 0.5]),
            ],
            (0.0, 1.0),
            1e-3,
            2,
        )
        .unwrap();
        let check = fd_consistency(&traj, 1e-5).unwrap();
        assert!(check.passed, "max error {}", check.max_error);
    }

    fn shear_certificate() -> (Certificate, ExplicitSystem) {
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
            vec![v("z1", 0), Expr::sub(v("z2", 0), v("z1", 0)), v("z3", 0)],
            vec![],
        )
        .unwrap();
        let cert = Certificate::new("ShearCert", fwd, bwd).unwrap();
        (cert, affine3())
    }

    #[test]
    fn valid_certificates_validate_along_trajectories() {
        let (cert, sys) = shear_certificate();
        let traj = integrate(
            &sys,
            &[0.25],
            &[
                ControlPoly::new(vec![0.0, 0.0, 0.0, 0.5]),
                ControlPoly::new(vec![1.0, -0.5]),
            ],
            (0.0, 1.0),
            1e-3,
            1,
        )
        .unwrap();
        let report = validate_certificate_numeric(&cert, &traj, 1e-6).unwrap();
        assert!(
            report.passed(),
            "items: {:?}",
            report
                .items
                .iter()
                .map(|i| (i.label.clone(), i.max_error))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn finite_difference_residuals_shrink_at_second_order() {
        // With x2(t) = t^3 the image z1 = x1 has a nonzero third
        // derivative, so the centered-difference residual is O(h^2).
        let (cert, sys) = shear_certificate();
        let run = |h: f64| -> f64 {
            let traj = integrate(
                &sys,
                &[0.25],
                &[
                    ControlPoly::new(vec![0.0, 0.0, 0.0, 1.0]),
                    ControlPoly::constant(0.0),
                ],
                (0.0, 1.0),
                h,
                1,
            )
            .unwrap();
            let report = validate_certificate_numeric(&cert, &traj, 1.0).unwrap();
            report.items[1].max_error
        };
        let coarse = run(1e-2);
        let fine = run(5e-3);
        assert!(
            coarse / fine >= 3.5,
            "residuals {coarse} -> {fine} shrank by less than 3.5x"
        );
    }

    #[test]
    fn singular_certificates_abort_validation() {
        // A certificate whose forward map divides by x1, validated along a
        // trajectory where x1 crosses zero.
        let src = Arc::new(affine3());
        let fwd = JetMap::new(
            "Inv",
            Arc::clone(&src),
            Arc::clone(&src),
            0,
            vec![
                Expr::div(Expr::int(1), v("x1", 0)),
                v("x2", 0),
                v("x3", 0),
            ],
            vec![Constraint::NonZero(v("x1", 0))],
        )
        .unwrap();
        let bwd = JetMap::new(
            "InvBack",
            Arc::clone(&src),
            Arc::clone(&src),
            0,
            vec![
                Expr::div(Expr::int(1), v("x1", 0)),
                v("x2", 0),
                v("x3", 0),
            ],
            vec![Constraint::NonZero(v("x1", 0))],
        )
        .unwrap();
        let cert = Certificate::new("InvCert", fwd, bwd).unwrap();
        let traj = integrate(
            &affine3(),
            &[-0.5],
            &[ControlPoly::constant(1.0), ControlPoly::constant(0.0)],
            (0.0, 1.0),
            1e-2,
            1,
        )
        .unwrap();
        let err = validate_certificate_numeric(&cert, &traj, 1e-6).unwrap_err();
        assert!(matches!(err, Error::SingularLocusHit { .. }));
    }

    #[test]
    fn trajectory_export_is_tabular() {
        let sys = affine3();
        let traj = integrate(
            &sys,
            &[0.0],
            &[ControlPoly::new(vec![0.0, 1.0]), ControlPoly::constant(0.0)],
            (0.0, 0.1),
            0.05,
            1,
        )
        .unwrap();
        let text = traj.to_delimited();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,x3,D1(x1),D1(x2),D1(x3)"));
        assert_eq!(lines.count(), 3);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 7);
        }
    }
}
