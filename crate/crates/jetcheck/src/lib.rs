//! Equivalence certificates and ruledness analysis for explicit control
//! systems on jet spaces.
//!
//! The library works with systems in explicit form: the drift states'
//! first derivatives are given as rational expressions of the full state
//! and the control states' first derivatives. On top of an exact symbolic
//! kernel it provides:
//!
//! - prolongation of systems and maps to higher jet orders ([`prolong`]);
//! - symbolic verification of equivalence certificates: a pair of jet-space
//!   maps that send solutions to solutions both ways and invert each other
//!   on solutions ([`equiv`]);
//! - ruledness probes of the velocity fibers: exact line-contact expansion,
//!   exact elimination over direction coefficients, and seeded sampling
//!   ([`ruled`]);
//! - necessary-condition verdicts: static-equivalence obstructions and
//!   non-equivalence / non-flatness verdicts with re-checkable evidence
//!   ([`verdict`]);
//! - a numeric cross-check lane: RK4 integration with polynomial controls
//!   and finite-difference validation of certificates along trajectories
//!   ([`numeric`]).
//!
//! Systems, maps, and certificates are written in a small text format
//! (`.jet` files) handled by [`dsl`]. Each major capability has a runnable
//! example under `examples/`; the `jetcheck` binary exposes the same
//! operations as subcommands.

pub mod cli;
pub mod dsl;
pub mod equiv;
pub mod error;
pub mod expr;
pub mod numeric;
pub mod prolong;
pub mod report;
pub mod ruled;
pub mod system;
pub mod verdict;

pub use dsl::{expr_to_string, load_str, lower, parse, parse_expr, serialize, ParseError, Program, SourceFile};
pub use equiv::{
    check_certificate, check_domains, check_maps_into, check_roundtrip, extract_ruling,
    Certificate, CheckItem, CheckReport, JetMap, TangentLine,
};
pub use error::{Error, Result};
pub use expr::{Block, Expr, ExprError, JetVar};
pub use numeric::{
    fd_jet, integrate, validate_certificate_numeric, ControlPoly, NumericCheck, NumericReport,
    Trajectory, SINGULAR_THRESHOLD,
};
pub use prolong::{
    prolong_f, prolong_map, prolong_system, reduce, sample_solution_jet, sys_total_derivative,
    ProlongedSystem, DEFAULT_MAX_PROLONG,
};
pub use report::Report;
pub use ruled::{
    contact_order, find_ruling, is_ruled_sampled, line_extent, ContactGrade, ContactReport,
    NotFoundReport, NotRuledWitness, RuledParams, Ruledness, RulingCertificate, RulingOutcome,
};
pub use system::{from_control_form, Constraint, ControlForm, ExplicitSystem, JetPoint, SampleBox};
pub use verdict::{
    check_static_certificate, flatness_verdict, is_affine_fiber, nonequivalence_verdict,
    static_obstruction, DimensionCase, Obstruction, Outcome, StaticCertificate, Verdict,
    MIN_UNIFORM_SAMPLES,
};

#[cfg(test)]
pub(crate) mod fixtures;
