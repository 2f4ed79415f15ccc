//! Numeric cross-check of a symbolic certificate. Integrate a system with
//! fixed-step RK4 under polynomial controls (so every control jet is
//! exact), push the trajectory through the forward map, and check that the
//! image satisfies the target equations — once with symbolic derivatives,
//! once with finite differences — and that the backward map returns to the
//! original states. Halving the step should shrink the finite-difference
//! residual about quadratically. Run with `cargo run --example simulate`.

use jetcheck::{integrate, load_str, validate_certificate_numeric, ControlPoly, Result};

fn main() -> Result<()> {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/exx1.jet"
    ))
    .expect("data file is part of the crate");
    let program = load_str(&text)?;
    let sigma = program.system("Sigma")?;
    let cert = program.certificate("C1")?;

    // Controls chosen to keep 1 - D(x2) - x2^3 well away from zero, where
    // the forward map's denominator would blow up.
    let controls = vec![
        ControlPoly::new(vec![0.0, 0.25]),      // x2(t) = t/4
        ControlPoly::new(vec![0.3, 0.0, 0.5]),  // x3(t) = 0.3 + t²/2
    ];
    let x0 = [0.2]; // drift state x1(0)

    let mut errors = Vec::new();
    for h in [1e-3, 5e-4] {
        let traj = integrate(sigma, &x0, &controls, (0.0, 1.0), h, 3)?;
        let report = validate_certificate_numeric(cert, &traj, 1e-6)?;
        println!("h = {h:.0e} over {} steps:", traj.len() - 1);
        for item in &report.items {
            println!(
                "  [{}] {}: max error {:.3e} (tolerance {:.0e})",
                if item.passed { "pass" } else { "FAIL" },
                item.label,
                item.max_error,
                item.tol
            );
        }
        errors.push(report.items[1].max_error); // finite-difference lane
    }
    println!(
        "finite-difference residual shrank {:.1}x when h was halved",
        errors[0] / errors[1]
    );

    // Trajectories export to delimited text for external plotting.
    let traj = integrate(sigma, &x0, &controls, (0.0, 1.0), 0.25, 1)?;
    println!("\ncoarse trajectory export:");
    print!("{}", traj.to_delimited());
    Ok(())
}
