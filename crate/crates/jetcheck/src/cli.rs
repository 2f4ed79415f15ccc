//! Command-line front end: every library check as a subcommand, with
//! human-readable text on standard output and an optional machine report
//! (`--report PATH`, deterministic for identical inputs and seeds).
//!
//! Exit codes: 0 when every check passes (including `UNKNOWN` verdicts,
//! which assert nothing), 1 when a check fails or a `NOT_*` verdict is
//! reached, 2 for usage, parse, or input errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dsl::{expr_to_string, load_str, parse_expr, Program};
use crate::equiv::check_certificate;
use crate::error::{Error, Result};
use crate::numeric::{integrate, validate_certificate_numeric, ControlPoly};
use crate::prolong::{prolong_system, reduce};
use crate::report::{Outcome, Report};
use crate::ruled::{is_ruled_sampled, RuledParams};
use crate::system::SampleBox;
use crate::verdict::{check_static_certificate, flatness_verdict, nonequivalence_verdict, StaticCertificate};

#[derive(Parser)]
#[command(
    name = "jetcheck",
    version,
    about = "Check equivalence certificates, probe fiber ruledness, and derive non-equivalence verdicts for explicit control systems",
    max_term_width = 100
)]
struct Cli {
    /// Write a machine-readable JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,

    /// Worker threads for sampled checks (default: JETCHECK_JOBS, then all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a .jet file and resolve every declaration.
    Validate {
        file: PathBuf,
    },
    /// Print a system's equations prolonged to a jet order.
    Prolong {
        file: PathBuf,
        /// System name from the file.
        #[arg(long)]
        system: String,
        /// Jet order to prolong to.
        #[arg(long)]
        order: u32,
    },
    /// Rewrite an expression modulo a system's equations.
    Reduce {
        file: PathBuf,
        /// System name from the file.
        #[arg(long)]
        system: String,
        /// Expression in the system's variables.
        #[arg(long)]
        expr: String,
    },
    /// Verify an equivalence certificate symbolically (exact residuals,
    /// exact round trips, sampled domain conditions).
    CheckCert {
        file: PathBuf,
        /// Certificate name from the file.
        #[arg(long)]
        cert: String,
        /// Sample count for the domain checks.
        #[arg(long, default_value_t = 25)]
        samples: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify an order-0 certificate as a static equivalence (composition
    /// to identity, equation push-forward, invertible Jacobian).
    CheckStatic {
        file: PathBuf,
        /// Certificate name from the file; both maps must have order 0.
        #[arg(long)]
        cert: String,
        /// Sample count for the Jacobian rank check.
        #[arg(long, default_value_t = 30)]
        samples: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Probe whether every velocity fiber contains a straight line.
    Ruled {
        file: PathBuf,
        /// System name from the file.
        #[arg(long)]
        system: String,
        /// Number of fiber points to sample.
        #[arg(long, default_value_t = 100)]
        points: u32,
        /// Contact order recorded on ruling certificates (default n+1).
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide non-equivalence of two systems from their fiber geometry.
    Verdict {
        file: PathBuf,
        /// First system name.
        #[arg(long)]
        left: String,
        /// Second system name.
        #[arg(long)]
        right: String,
        /// Number of fiber points to sample per system.
        #[arg(long, default_value_t = 100)]
        points: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Refute flatness from a provably unruled fiber.
    Flatness {
        file: PathBuf,
        /// System name from the file.
        #[arg(long)]
        system: String,
        /// Number of fiber points to sample.
        #[arg(long, default_value_t = 100)]
        points: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate a system under polynomial controls with fixed-step RK4;
    /// optionally validate a certificate numerically along the trajectory.
    Simulate {
        file: PathBuf,
        /// System name from the file.
        #[arg(long)]
        system: String,
        /// Initial values of the drift states, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        x0: Vec<f64>,
        /// One polynomial in t per control state, e.g. --controls "t/4"
        /// --controls "0.3 + t^2/2".
        #[arg(long, required = true)]
        controls: Vec<String>,
        /// Step size.
        #[arg(long)]
        h: f64,
        /// Time span as START,END.
        #[arg(long, value_delimiter = ',', required = true)]
        tspan: Vec<f64>,
        /// Jet order to carry along (default: enough for --cert, else 1).
        #[arg(long)]
        order: Option<u32>,
        /// Certificate to validate along the trajectory.
        #[arg(long)]
        cert: Option<String>,
        /// Numeric tolerance for certificate validation.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Write the trajectory as delimited text to this path.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Run the command line. Returns the process exit code; all human output
/// goes to standard output, errors to standard error.
pub fn run<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let jobs = cli.jobs.or_else(|| {
        std::env::var("JETCHECK_JOBS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = jobs {
        // Ignore the error: the global pool can only be sized once per
        // process, which is exactly once per CLI run.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match execute(&cli.command) {
        Ok(report) => {
            if let Some(path) = &cli.report {
                if let Err(e) = report.write_to(path) {
                    eprintln!("error: cannot write report to {}: {e}", path.display());
                    return 2;
                }
            }
            i32::from(!report.passed())
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load(path: &Path) -> Result<Program> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text)
}

fn file_input(report: &mut Report, path: &Path) {
    report.input("file", path.display());
}

fn execute(cmd: &Cmd) -> Result<Report> {
    match cmd {
        Cmd::Validate { file } => {
            let mut report = Report::new("validate");
            file_input(&mut report, file);
            let program = load(file)?;
            for sys in program.systems() {
                let line = format!(
                    "system {}: {} states, {} controls, {} equation(s), {} domain constraint(s)",
                    sys.name(),
                    sys.n(),
                    sys.m(),
                    sys.f().len(),
                    sys.domain().len()
                );
                println!("{line}");
                report.outcomes.push(Outcome {
                    label: format!("system {}", sys.name()),
                    status: "pass".into(),
                    method: "exact".into(),
                    detail: line,
                    residuals: vec![],
                });
                report.add_work(1);
            }
            for map in program.maps() {
                let line = format!(
                    "map {}: {} -> {} (order {}, effective order {})",
                    map.name(),
                    map.source().name(),
                    map.target().name(),
                    map.order(),
                    map.effective_order()
                );
                println!("{line}");
                report.outcomes.push(Outcome {
                    label: format!("map {}", map.name()),
                    status: "pass".into(),
                    method: "exact".into(),
                    detail: line,
                    residuals: vec![],
                });
                report.add_work(1);
            }
            for cert in program.certificates() {
                let line = format!(
                    "certificate {}: forward {}, backward {}",
                    cert.name(),
                    cert.forward().name(),
                    cert.backward().name()
                );
                println!("{line}");
                report.outcomes.push(Outcome {
                    label: format!("certificate {}", cert.name()),
                    status: "pass".into(),
                    method: "exact".into(),
                    detail: line,
                    residuals: vec![],
                });
                report.add_work(1);
            }
            println!("{}: well formed", file.display());
            Ok(report)
        }
        Cmd::Prolong { file, system, order } => {
            let mut report = Report::new("prolong");
            file_input(&mut report, file);
            report.input("system", system);
            report.input("order", order);
            let program = load(file)?;
            let sys = program.system(system)?;
            let prolonged = prolong_system(sys, *order)?;
            for (lhs, rhs) in prolonged.equations() {
                let printed = expr_to_string(&rhs);
                println!("{lhs} = {printed}");
                report.outcomes.push(Outcome {
                    label: lhs.to_string(),
                    status: "pass".into(),
                    method: "exact".into(),
                    detail: printed,
                    residuals: vec![],
                });
            }
            report.add_work(u64::from(*order) + 1);
            Ok(report)
        }
        Cmd::Reduce { file, system, expr } => {
            let mut report = Report::new("reduce");
            file_input(&mut report, file);
            report.input("system", system);
            report.input("expr", expr);
            let program = load(file)?;
            let sys = program.system(system)?;
            let parsed = parse_expr(expr).map_err(|e| Error::Parse(e.to_string()))?;
            let reduced = reduce(&parsed, sys)?;
            let printed = expr_to_string(&reduced);
            println!("{printed}");
            report.outcomes.push(Outcome {
                label: format!("reduce modulo {}", sys.name()),
                status: "pass".into(),
                method: "exact".into(),
                detail: printed,
                residuals: vec![],
            });
            report.add_work(1);
            Ok(report)
        }
        Cmd::CheckCert { file, cert, samples, seed } => {
            let mut report = Report::new("check-cert");
            file_input(&mut report, file);
            report.input("cert", cert);
            report.input("samples", samples);
            report.input("seed", seed);
            let program = load(file)?;
            let cert = program.certificate(cert)?;
            let checks = check_certificate(cert, *samples, *seed, &SampleBox::default())?;
            print_checks(&checks);
            println!(
                "certificate {}: {}",
                cert.name(),
                if checks.passed() { "verified" } else { "REFUTED" }
            );
            report.push_checks(&checks);
            report.add_work(u64::from(*samples));
            Ok(report)
        }
        Cmd::CheckStatic { file, cert, samples, seed } => {
            let mut report = Report::new("check-static");
            file_input(&mut report, file);
            report.input("cert", cert);
            report.input("samples", samples);
            report.input("seed", seed);
            let program = load(file)?;
            let cert = program.certificate(cert)?;
            let static_cert = StaticCertificate::new(
                cert.name(),
                cert.forward().clone(),
                cert.backward().clone(),
            )?;
            let checks =
                check_static_certificate(&static_cert, *samples, *seed, &SampleBox::default())?;
            print_checks(&checks);
            println!(
                "static certificate {}: {}",
                static_cert.name(),
                if checks.passed() { "verified" } else { "REFUTED" }
            );
            report.push_checks(&checks);
            report.add_work(u64::from(*samples));
            Ok(report)
        }
        Cmd::Ruled { file, system, points, order, seed } => {
            let mut report = Report::new("ruled");
            file_input(&mut report, file);
            report.input("system", system);
            report.input("points", points);
            if let Some(k) = order {
                report.input("order", k);
            }
            report.input("seed", seed);
            let program = load(file)?;
            let sys = program.system(system)?;
            let params = RuledParams {
                points: *points,
                order: *order,
                seed: *seed,
                ..RuledParams::default()
            };
            let verdict = is_ruled_sampled(sys, &params)?;
            println!("{}: {}", sys.name(), verdict.label());
            report.push_ruledness(sys.name(), &verdict);
            for o in &report.outcomes {
                println!("  {}", o.detail);
            }
            report.add_work(u64::from(*points));
            Ok(report)
        }
        Cmd::Verdict { file, left, right, points, seed } => {
            let mut report = Report::new("verdict");
            file_input(&mut report, file);
            report.input("left", left);
            report.input("right", right);
            report.input("points", points);
            report.input("seed", seed);
            let program = load(file)?;
            let l = program.system(left)?;
            let r = program.system(right)?;
            let params = RuledParams {
                points: *points,
                seed: *seed,
                ..RuledParams::default()
            };
            let verdict = nonequivalence_verdict(l, r, &params)?;
            let label = format!("dynamic equivalence of {} and {}", l.name(), r.name());
            report.push_verdict(&label, &verdict);
            print_verdict(&report);
            report.add_work(u64::from(*points));
            Ok(report)
        }
        Cmd::Flatness { file, system, points, seed } => {
            let mut report = Report::new("flatness");
            file_input(&mut report, file);
            report.input("system", system);
            report.input("points", points);
            report.input("seed", seed);
            let program = load(file)?;
            let sys = program.system(system)?;
            let params = RuledParams {
                points: *points,
                seed: *seed,
                ..RuledParams::default()
            };
            let verdict = flatness_verdict(sys, &params)?;
            let label = format!("flatness of {}", sys.name());
            report.push_verdict(&label, &verdict);
            print_verdict(&report);
            report.add_work(u64::from(*points));
            Ok(report)
        }
        Cmd::Simulate {
            file,
            system,
            x0,
            controls,
            h,
            tspan,
            order,
            cert,
            tol,
            out,
        } => {
            let mut report = Report::new("simulate");
            file_input(&mut report, file);
            report.input("system", system);
            report.input("x0", join_floats(x0));
            report.input("controls", controls.join("; "));
            report.input("h", h);
            report.input("tspan", join_floats(tspan));
            report.input("tol", tol);
            let program = load(file)?;
            let sys = program.system(system)?;
            let certificate = match cert {
                Some(name) => {
                    report.input("cert", name);
                    Some(program.certificate(name)?)
                }
                None => None,
            };
            let polys = controls
                .iter()
                .map(|c| {
                    let e = parse_expr(c).map_err(|e| Error::Parse(e.to_string()))?;
                    ControlPoly::from_expr(&e)
                })
                .collect::<Result<Vec<_>>>()?;
            if tspan.len() != 2 {
                return Err(Error::Invalid("--tspan takes exactly START,END".into()));
            }
            let jet_order = order.unwrap_or_else(|| {
                certificate
                    .map(|c| c.forward().order().max(c.backward().order()) + 1)
                    .unwrap_or(1)
            });
            report.input("jet-order", jet_order);

            let traj = match integrate(sys, x0, &polys, (tspan[0], tspan[1]), *h, jet_order) {
                Ok(t) => t,
                Err(e @ (Error::DomainViolated { .. } | Error::StepUnstable { .. })) => {
                    // The run itself is the check: leaving the domain or
                    // blowing up is a recorded failure, not a usage error.
                    println!("integration failed: {e}");
                    report.outcomes.push(Outcome {
                        label: format!("integrate {system}"),
                        status: "fail".into(),
                        method: "numeric".into(),
                        detail: e.to_string(),
                        residuals: vec![],
                    });
                    return Ok(report);
                }
                Err(e) => return Err(e),
            };
            let steps = traj.len() - 1;
            println!(
                "integrated {} over [{}, {}] in {} steps of h = {h:e} (jet order {jet_order})",
                sys.name(),
                tspan[0],
                tspan[1],
                steps
            );
            report.outcomes.push(Outcome {
                label: format!("integrate {}", sys.name()),
                status: "pass".into(),
                method: "numeric".into(),
                detail: format!("{steps} steps, all domain constraints held"),
                residuals: vec![],
            });
            report.add_work(steps as u64);

            if let Some(cert) = certificate {
                let numeric = validate_certificate_numeric(cert, &traj, *tol)?;
                for item in &numeric.items {
                    println!(
                        "  [{}] {}: max error {:.3e} (tolerance {:.0e})",
                        if item.passed { "pass" } else { "FAIL" },
                        item.label,
                        item.max_error,
                        item.tol
                    );
                }
                report.push_numeric(&numeric);
            }
            if let Some(path) = out {
                std::fs::write(path, traj.to_delimited()).map_err(|e| {
                    Error::Invalid(format!("cannot write {}: {e}", path.display()))
                })?;
                println!("trajectory written to {}", path.display());
            }
            Ok(report)
        }
    }
}

fn print_checks(checks: &crate::equiv::CheckReport) {
    for item in &checks.items {
        println!(
            "  [{}] {} ({}): {}",
            if item.passed { "pass" } else { "FAIL" },
            item.label,
            item.method,
            item.detail,
        );
    }
}

fn print_verdict(report: &Report) {
    for o in &report.outcomes {
        println!("{}: {}", o.label, o.status);
        if !o.detail.is_empty() {
            println!("  {}", o.detail);
        }
    }
    let shown = report.witnesses.len().min(3);
    for w in report.witnesses.iter().take(shown) {
        let coords: Vec<String> = w.point.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        println!("  witness: {}", coords.join(", "));
    }
    if report.witnesses.len() > shown {
        println!("  ... and {} more witness(es)", report.witnesses.len() - shown);
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
