//! Verify an equivalence certificate symbolically: both maps send
//! solutions to solutions, and the two round trips are the identity on
//! solutions. Run with `cargo run --example certificate_check`.

use jetcheck::{check_certificate, load_str, Result, SampleBox};

fn main() -> Result<()> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx1.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let cert = program.certificate("C1")?;

    println!(
        "certificate {}: {} ({} -> {}, order {}) with inverse {} (order {})",
        cert.name(),
        cert.forward().name(),
        cert.forward().source().name(),
        cert.forward().target().name(),
        cert.forward().order(),
        cert.backward().name(),
        cert.backward().order(),
    );

    let report = check_certificate(cert, 25, 0, &SampleBox::default())?;
    for item in &report.items {
        println!(
            "  [{}] {} ({}): {}",
            if item.passed { "pass" } else { "FAIL" },
            item.label,
            item.method,
            item.detail,
        );
    }
    println!(
        "certificate {}: {}",
        cert.name(),
        if report.passed() { "verified" } else { "REFUTED" }
    );
    std::process::exit(i32::from(!report.passed()));
}
