//! Prolongation in two guises. First symbolically: the k-th order
//! prolongation of a system expresses all higher drift derivatives through
//! the original right-hand sides, and `reduce` rewrites any expression
//! modulo those equations. Then as an equivalence: appending an integrator
//! in front of every control gives a bigger system that is certified
//! equivalent to the original. Run with
//! `cargo run --example integrator_prolongation`.

use jetcheck::{
    check_certificate, expr_to_string, load_str, parse_expr, prolong_system, reduce, Error,
    Result, SampleBox,
};

fn main() -> Result<()> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/integrator.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let sigma = program.system("Sigma")?;

    // Symbolic prolongation: new equations for D2(x1), D3(x1), ...
    let prolonged = prolong_system(sigma, 3)?;
    println!("prolongation of {} to order 3:", sigma.name());
    for (lhs, rhs) in prolonged.equations() {
        println!("  {lhs} = {}", expr_to_string(&rhs));
    }

    // Reduction modulo the system: drift derivatives disappear.
    for input in ["D(x1)*x3", "D2(x1) + x1", "D(x1) - x2"] {
        let e = parse_expr(input).map_err(|e| Error::Parse(e.to_string()))?;
        let r = reduce(&e, sigma)?;
        println!("reduce({input}) = {}", expr_to_string(&r));
    }

    // The integrator tower is equivalent to the original system.
    let cert = program.certificate("T1")?;
    let report = check_certificate(cert, 25, 0, &SampleBox::default())?;
    println!(
        "{} ({} states) ~ {} ({} states): certificate {} {}",
        cert.forward().source().name(),
        cert.forward().source().n(),
        cert.forward().target().name(),
        cert.forward().target().n(),
        cert.name(),
        if report.passed() { "verified" } else { "REFUTED" }
    );
    Ok(())
}
