//! From classical control form to explicit form. A system given as
//! ẋ = F(x, u) with separate control inputs converts to the explicit form
//! used everywhere else in this library — provided the controls enter
//! triangularly (the last m equations read ẋ = u). The controls are then
//! eliminated in favor of the derivatives of the last m states. Run with
//! `cargo run --example control_form`.

use std::collections::BTreeMap;

use jetcheck::{from_control_form, ControlForm, Error, Expr, JetVar, Result};

fn var(name: &str) -> Expr {
    Expr::var(JetVar::plain(name, 0))
}

fn main() -> Result<()> {
    // ẋ1 = x2 + u1², ẋ2 = u1, ẋ3 = u2 — triangular in (u1, u2).
    let cf = ControlForm::new(
        "Crane",
        vec!["x1".into(), "x2".into(), "x3".into()],
        vec!["u1".into(), "u2".into()],
        vec![
            Expr::add(vec![var("x2"), Expr::pow(var("u1"), 2)]),
            var("u1"),
            var("u2"),
        ],
    )?;

    // The control Jacobian has full rank (here trivially: dF/du is
    // triangular with unit diagonal), so the elimination is legitimate.
    let mut env: BTreeMap<JetVar, f64> = BTreeMap::new();
    for name in ["x1", "x2", "x3", "u1", "u2"] {
        env.insert(JetVar::plain(name, 0), 0.5);
    }
    println!("control Jacobian full rank: {}", cf.check_rank(&env)?);

    let sys = from_control_form(&cf)?;
    println!(
        "explicit form: states ({}), controls ({})",
        sys.states().join(", "),
        sys.controls().join(", ")
    );
    for (s, rhs) in sys.drift_states().iter().zip(sys.f()) {
        println!("  D({s}) = {}", jetcheck::expr_to_string(rhs));
    }

    // Non-triangular systems are rejected rather than silently mangled.
    let skew = ControlForm::new(
        "Skew",
        vec!["x1".into(), "x2".into()],
        vec!["u1".into()],
        vec![var("u1"), Expr::mul(vec![Expr::int(2), var("u1")])],
    )?;
    match from_control_form(&skew) {
        Err(Error::NotInTriangularForm { state, control }) => {
            println!("Skew rejected: D({state}) is not identically {control}");
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
