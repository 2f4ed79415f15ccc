//! Machine-readable run reports.
//!
//! A [`Report`] collects what a command was asked to do, what each check
//! concluded, and the evidence (witness points, directions, residuals)
//! behind any failure. Serialization is deterministic: identical inputs and
//! seeds produce byte-identical JSON, so reports can be diffed and cached.
//! The only "timing" recorded is a seed-independent work counter — wall
//! clock never enters the output.

use std::collections::BTreeMap;
use std::path::Path;

use num::BigRational;
use serde::Serialize;

use crate::dsl::expr_to_string;
use crate::equiv::CheckReport;
use crate::numeric::NumericReport;
use crate::ruled::{ContactGrade, Ruledness};
use crate::system::JetPoint;
use crate::verdict::Verdict;

/// Top-level report written by `--report PATH`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    /// Subcommand that produced the report.
    pub command: String,
    /// Inputs as given (file, names, seeds, tolerances, ...), sorted by key.
    pub inputs: BTreeMap<String, String>,
    /// One entry per check or probe, in execution order.
    pub outcomes: Vec<Outcome>,
    /// Evidence points backing the outcomes.
    pub witnesses: Vec<Witness>,
    /// Deterministic effort counters.
    pub timings: Timings,
}

/// A single check's conclusion.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub label: String,
    /// `pass`/`fail` for checks; verdict labels (`RULED_EVIDENCE`,
    /// `NOT_DYNAMIC_EQUIVALENT`, ...) for probes.
    pub status: String,
    /// How the conclusion was reached: `exact`, `statistical`, or `numeric`.
    pub method: String,
    pub detail: String,
    /// Exact residuals (printed in input syntax) when a symbolic check fails.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<String>,
}

/// An evidence point: where something was observed, and what.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// The outcome this witness belongs to.
    pub label: String,
    /// Jet coordinates as exact rationals, keyed by variable name.
    pub point: BTreeMap<String, String>,
    /// Velocity direction, when the witness carries one (ruling lines).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<String>>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Deterministic effort counters (never wall-clock).
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Timings {
    /// Abstract units of work: points probed, steps integrated, checks run.
    pub work_units: u64,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outcomes: Vec::new(),
            witnesses: Vec::new(),
            timings: Timings::default(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn add_work(&mut self, units: u64) {
        self.timings.work_units += units;
    }

    /// True when no recorded outcome is a failure or refutation.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| {
            !matches!(
                o.status.as_str(),
                "fail" | "NOT_RULED" | "NOT_DYNAMIC_EQUIVALENT" | "NOT_FLAT"
            )
        })
    }

    /// Append every item of a symbolic/statistical check report.
    pub fn push_checks(&mut self, checks: &CheckReport) {
        for item in &checks.items {
            self.outcomes.push(Outcome {
                label: item.label.clone(),
                status: if item.passed { "pass" } else { "fail" }.to_string(),
                method: item.method.to_string(),
                detail: item.detail.clone(),
                residuals: item.residuals.iter().map(expr_to_string).collect(),
            });
            for p in &item.witnesses {
                self.witnesses.push(Witness {
                    label: item.label.clone(),
                    point: point_map(p),
                    direction: None,
                    detail: String::new(),
                });
            }
        }
    }

    /// Append a sampled ruledness verdict with its evidence.
    pub fn push_ruledness(&mut self, system: &str, r: &Ruledness) {
        let label = format!("ruledness of {system}");
        let (detail, method) = match r {
            Ruledness::RuledEvidence { rulings } => (
                format!("verified ruling lines at all {} sampled points", rulings.len()),
                "statistical",
            ),
            Ruledness::NotRuled { witnesses } => (
                format!(
                    "exact elimination refuted ruling lines at {} point(s)",
                    witnesses.len()
                ),
                "exact",
            ),
            Ruledness::Inconclusive { rulings, unresolved } => (
                format!(
                    "{} ruling(s) found, {} point(s) unresolved",
                    rulings.len(),
                    unresolved.len()
                ),
                "statistical",
            ),
        };
        self.outcomes.push(Outcome {
            label: label.clone(),
            status: r.label().to_string(),
            method: method.to_string(),
            detail,
            residuals: Vec::new(),
        });
        match r {
            Ruledness::RuledEvidence { rulings } | Ruledness::Inconclusive { rulings, .. } => {
                for cert in rulings {
                    let (lo, hi) = cert.extent();
                    let grade = match cert.contact().grade() {
                        ContactGrade::Infinite => "infinite contact".to_string(),
                        ContactGrade::Finite(j) => format!("contact order {j}"),
                    };
                    self.witnesses.push(Witness {
                        label: label.clone(),
                        point: point_map(cert.point()),
                        direction: Some(rationals(cert.direction())),
                        detail: format!(
                            "{grade}, extent ({lo}, {hi}), found by {}",
                            cert.found_by()
                        ),
                    });
                }
                if let Ruledness::Inconclusive { unresolved, .. } = r {
                    for p in unresolved {
                        self.witnesses.push(Witness {
                            label: label.clone(),
                            point: point_map(p),
                            direction: None,
                            detail: "search found no ruling line here; not a refutation"
                                .to_string(),
                        });
                    }
                }
            }
            Ruledness::NotRuled { witnesses } => {
                for w in witnesses {
                    self.witnesses.push(Witness {
                        label: label.clone(),
                        point: point_map(&w.point),
                        direction: None,
                        detail: w.detail.clone(),
                    });
                }
            }
        }
    }

    /// Append a non-equivalence or flatness verdict with its evidence.
    pub fn push_verdict(&mut self, label: &str, v: &Verdict) {
        let mut detail_parts = Vec::new();
        if let Some(case) = &v.case {
            detail_parts.push(format!("dimension case {}", case.label()));
        }
        if let Some(sys) = &v.witness_system {
            detail_parts.push(format!("witness system {sys}"));
        }
        if let Some(ob) = &v.obstruction {
            detail_parts.push(format!("static obstruction: {}", ob.detail()));
        }
        detail_parts.extend(v.notes.iter().cloned());
        self.outcomes.push(Outcome {
            label: label.to_string(),
            status: v.outcome.label().to_string(),
            method: "exact".to_string(),
            detail: detail_parts.join("; "),
            residuals: Vec::new(),
        });
        for w in &v.witnesses {
            self.witnesses.push(Witness {
                label: label.to_string(),
                point: point_map(&w.point),
                direction: None,
                detail: w.detail.clone(),
            });
        }
    }

    /// Append every item of a numeric validation report.
    pub fn push_numeric(&mut self, numeric: &NumericReport) {
        for item in &numeric.items {
            self.outcomes.push(Outcome {
                label: item.label.clone(),
                status: if item.passed { "pass" } else { "fail" }.to_string(),
                method: "numeric".to_string(),
                detail: format!(
                    "max error {:.3e} against tolerance {:.3e}; {}",
                    item.max_error, item.tol, item.detail
                ),
                residuals: Vec::new(),
            });
        }
    }

    /// Deterministic pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

fn point_map(p: &JetPoint) -> BTreeMap<String, String> {
    p.env()
        .iter()
        .map(|(v, val)| (v.to_string(), val.to_string()))
        .collect()
}

fn rationals(values: &[BigRational]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ruled::{is_ruled_sampled, RuledParams};

    #[test]
    fn identical_runs_serialize_identically() {
        let sys = fixtures::power2();
        let params = RuledParams {
            points: 3,
            ..RuledParams::default()
        };
        let mut reports = Vec::new();
        for _ in 0..2 {
            let r = is_ruled_sampled(&sys, &params).unwrap();
            let mut report = Report::new("ruled");
            report.input("system", sys.name());
            report.input("points", params.points);
            report.input("seed", params.seed);
            report.push_ruledness(sys.name(), &r);
            report.add_work(u64::from(params.points));
            reports.push(report.to_json());
        }
        assert_eq!(reports[0], reports[1]);
        assert!(reports[0].contains("\"work_units\": 3"));
    }

    #[test]
    fn failed_checks_embed_reusable_evidence() {
        let sys = fixtures::power2();
        let params = RuledParams {
            points: 2,
            ..RuledParams::default()
        };
        let r = is_ruled_sampled(&sys, &params).unwrap();
        let mut report = Report::new("ruled");
        report.push_ruledness(sys.name(), &r);
        assert!(!report.passed());
        assert_eq!(report.outcomes[0].status, "NOT_RULED");
        assert!(!report.witnesses.is_empty());
        let w = &report.witnesses[0];
        assert!(w.point.contains_key("x1"), "{:?}", w.point);
        assert!(w.point.contains_key("D(x2)"), "{:?}", w.point);
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(parsed["command"], "ruled");
    }
}
