//! Probe whether every velocity fiber of a system contains a straight
//! line. At seeded sample points the probe either produces a verified
//! ruling line (with its exact contact expansion and the λ-interval that
//! stays inside the domain) or an exact elimination proof that no line
//! exists at that point. Run with `cargo run --example ruledness`.

use jetcheck::{is_ruled_sampled, load_str, ContactGrade, Result, RuledParams, Ruledness};

fn main() -> Result<()> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx2.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let params = RuledParams {
        points: 40,
        ..RuledParams::default()
    };

    for name in ["SigmaP", "Sigma"] {
        let sys = program.system(name)?;
        let verdict = is_ruled_sampled(sys, &params)?;
        println!("{name}: {}", verdict.label());
        match &verdict {
            Ruledness::RuledEvidence { rulings } => {
                let infinite = rulings
                    .iter()
                    .filter(|r| r.contact().grade() == ContactGrade::Infinite)
                    .count();
                println!(
                    "  {} ruling lines verified, {infinite} with infinite contact",
                    rulings.len()
                );
                if let Some(r) = rulings.first() {
                    let dir: Vec<String> =
                        r.direction().iter().map(|c| c.to_string()).collect();
                    let (lo, hi) = r.extent();
                    println!(
                        "  e.g. direction ({}) over λ in ({lo}, {hi}), found by {}",
                        dir.join(", "),
                        r.found_by()
                    );
                }
            }
            Ruledness::NotRuled { witnesses } => {
                println!(
                    "  exact elimination refuted a ruling at {} point(s)",
                    witnesses.len()
                );
                if let Some(w) = witnesses.first() {
                    println!("  e.g. {}", w.detail);
                }
            }
            Ruledness::Inconclusive { rulings, unresolved } => {
                println!(
                    "  {} rulings found, {} points unresolved (no refutation)",
                    rulings.len(),
                    unresolved.len()
                );
            }
        }
    }
    Ok(())
}
