//! Two sides of flatness. A system is flat when it is equivalent to a
//! trivial system (one with no equations); the certificate direction is
//! verified exactly. In the other direction, a velocity fiber that
//! provably contains no straight line refutes flatness outright. Run with
//! `cargo run --example flatness_certificate`.

use jetcheck::{check_certificate, flatness_verdict, load_str, Result, RuledParams, SampleBox};

fn main() -> Result<()> {
    // Positive side: Sigma is flat, with flat outputs (x1, x3).
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx1.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let cert = program.certificate("F1")?;
    let report = check_certificate(cert, 25, 0, &SampleBox::default())?;
    println!(
        "{} -> {} via {}: {}",
        cert.forward().source().name(),
        cert.forward().target().name(),
        cert.name(),
        if report.passed() {
            "equivalent to the trivial system (flat)"
        } else {
            "certificate REFUTED"
        }
    );

    // Negative side: the quartic-fiber system cannot be flat, because some
    // of its velocity fibers provably contain no line at all.
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx2.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let sigma = program.system("Sigma")?;
    let params = RuledParams {
        points: 40,
        ..RuledParams::default()
    };
    let verdict = flatness_verdict(sigma, &params)?;
    println!(
        "{}: {} ({} refutation witness(es))",
        sigma.name(),
        verdict.outcome.label(),
        verdict.witnesses.len()
    );
    if let Some(w) = verdict.witnesses.first() {
        println!("  e.g. at the fiber point:");
        for (var, val) in w.point.env() {
            println!("    {var} = {val}");
        }
        println!("  {}", w.detail);
    }
    Ok(())
}
