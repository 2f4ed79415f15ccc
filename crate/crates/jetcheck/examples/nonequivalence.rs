//! Disprove equivalences. Point transformations preserve the linear
//! geometry of the velocity fibers, so an affine fiber can never match a
//! genuinely quadric one — that kills static equivalence. Dynamic
//! equivalence (certificates of any order) survives that obstruction, but
//! it forces fibers to be ruled when the state dimensions differ or one
//! side is a trivial system; an exactly-refuted ruling then kills it too.
//! Run with `cargo run --example nonequivalence`.

use jetcheck::{load_str, nonequivalence_verdict, static_obstruction, Result, RuledParams};

fn main() -> Result<()> {
    // The pair that IS dynamic equivalent: the static obstruction fires
    // (affine vs quadric fibers), but no verdict of non-equivalence follows
    // — and indeed a higher-order certificate exists (see
    // `certificate_check`).
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx1.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let sigma = program.system("Sigma")?;
    let sigma_p = program.system("SigmaP")?;
    let ob = static_obstruction(sigma, sigma_p, 60, 0);
    println!(
        "static equivalence of {} and {}: {} ({})",
        sigma.name(),
        sigma_p.name(),
        ob.label(),
        ob.detail()
    );
    let params = RuledParams {
        points: 40,
        ..RuledParams::default()
    };
    let v = nonequivalence_verdict(sigma, sigma_p, &params)?;
    println!(
        "dynamic equivalence of {} and {}: {}",
        sigma.name(),
        sigma_p.name(),
        v.outcome.label()
    );

    // The pair that is NOT dynamic equivalent: same state dimension, one
    // fiber ruled everywhere, the other exactly refuted.
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx2.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let sigma = program.system("Sigma")?;
    let sigma_p = program.system("SigmaP")?;
    let v = nonequivalence_verdict(sigma, sigma_p, &params)?;
    println!(
        "dynamic equivalence of {} and {}: {}",
        sigma.name(),
        sigma_p.name(),
        v.outcome.label()
    );
    if let Some(ob) = &v.obstruction {
        println!("  static obstruction: {}", ob.detail());
    }
    if let Some(sys) = &v.witness_system {
        println!(
            "  {} witness point(s) on {} where no ruling line exists",
            v.witnesses.len(),
            sys
        );
    }
    Ok(())
}
