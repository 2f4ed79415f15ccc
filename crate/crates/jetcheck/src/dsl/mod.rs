//! The `.jet` text format: systems, maps, and certificates in one file.
//!
//! Concrete syntax (`#` starts a line comment):
//!
//! ```text
//! system Sigma {
//!   states: x1, x2, x3;
//!   controls: x2, x3;
//!   equations:
//!     D(x1) = x2 + (D(x2) - x1*D(x3))*D(x3);
//!   domain: D(x3) != 0;
//! }
//!
//! map Phi : Sigma -> SigmaP order 1 {
//!   y1 = x1;
//!   y2 = x2;
//!   y3 = D(x2);
//! }
//!
//! certificate C {
//!   forward: Phi;
//!   backward: Psi;
//! }
//! ```
//!
//! Expressions use `+ - * / ^` with integer exponents and the derivative
//! notation `D(x)`, `D2(x)`, or `D(x, k)`. [`parse`] produces a syntax
//! tree with source spans; [`serialize`] prints it back so that
//! `parse(serialize(f)) == f`; [`lower`] resolves a tree into systems,
//! maps, and certificates ready for analysis.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::BigRational;

use crate::equiv::{Certificate, JetMap};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::system::{Constraint, ExplicitSystem};

// ---------------------------------------------------------------------------
// Source structure
// ---------------------------------------------------------------------------

/// Byte range in the input text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// A parsed `.jet` file: declarations in source order. Equality is
/// structural and ignores source spans.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    System(SystemDecl),
    Map(MapDecl),
    Certificate(CertDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::System(d) => &d.name,
            Decl::Map(d) => &d.name,
            Decl::Certificate(d) => &d.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::System(d) => d.span,
            Decl::Map(d) => d.span,
            Decl::Certificate(d) => d.span,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SystemDecl {
    pub name: String,
    pub states: Vec<String>,
    pub controls: Vec<String>,
    /// Drift state name, right-hand side.
    pub equations: Vec<(String, Expr)>,
    pub domain: Vec<Constraint>,
    pub span: Span,
}

impl PartialEq for SystemDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.controls == other.controls
            && self.equations == other.equations
            && self.domain == other.domain
    }
}

#[derive(Clone, Debug)]
pub struct MapDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub order: u32,
    /// Target state name, defining expression (in source jet coordinates).
    pub components: Vec<(String, Expr)>,
    pub domain: Vec<Constraint>,
    pub span: Span,
}

impl PartialEq for MapDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.source == other.source
            && self.target == other.target
            && self.order == other.order
            && self.components == other.components
            && self.domain == other.domain
    }
}

#[derive(Clone, Debug)]
pub struct CertDecl {
    pub name: String,
    pub forward: String,
    pub backward: String,
    pub span: Span,
}

impl PartialEq for CertDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.forward == other.forward
            && self.backward == other.backward
    }
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// A parse diagnostic: position (1-based line and column), byte span, and
/// the token set that would have been accepted.
#[derive(Clone, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub span: Span,
    pub message: String,
    pub expected: Vec<&'static str>,
}

impl ParseError {
    fn at(text: &str, span: Span, message: String, expected: Vec<&'static str>) -> ParseError {
        let upto = &text[..span.start.min(text.len())];
        let line = 1 + upto.bytes().filter(|b| *b == b'\n').count();
        let col = 1 + upto.rfind('\n').map(|p| span.start - p - 1).unwrap_or(span.start);
        ParseError {
            line,
            col,
            span,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: {}",
            self.line, self.col, self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

// ---------------------------------------------------------------------------
// Parse and serialize
// ---------------------------------------------------------------------------

/// Parse a `.jet` file into its syntax tree.
pub fn parse(text: &str) -> std::result::Result<SourceFile, ParseError> {
    parser::parse_source(text)
}

/// Parse a single expression (the same grammar as inside `.jet` files).
pub fn parse_expr(text: &str) -> std::result::Result<Expr, ParseError> {
    parser::parse_expr_text(text)
}

/// Print a file so that parsing it back yields a structurally equal tree.
pub fn serialize(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, decl) in file.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match decl {
            Decl::System(d) => {
                out.push_str(&format!("system {} {{\n", d.name));
                out.push_str(&format!("  states: {};\n", d.states.join(", ")));
                if d.controls.is_empty() {
                    out.push_str("  controls: ;\n");
                } else {
                    out.push_str(&format!("  controls: {};\n", d.controls.join(", ")));
                }
                if !d.equations.is_empty() {
                    out.push_str("  equations:\n");
                    for (state, rhs) in &d.equations {
                        out.push_str(&format!("    D({state}) = {};\n", expr_to_string(rhs)));
                    }
                }
                push_domain(&mut out, &d.domain);
                out.push_str("}\n");
            }
            Decl::Map(d) => {
                out.push_str(&format!(
                    "map {} : {} -> {} order {} {{\n",
                    d.name, d.source, d.target, d.order
                ));
                for (state, e) in &d.components {
                    out.push_str(&format!("  {state} = {};\n", expr_to_string(e)));
                }
                push_domain(&mut out, &d.domain);
                out.push_str("}\n");
            }
            Decl::Certificate(d) => {
                out.push_str(&format!("certificate {} {{\n", d.name));
                out.push_str(&format!("  forward: {};\n", d.forward));
                out.push_str(&format!("  backward: {};\n", d.backward));
                out.push_str("}\n");
            }
        }
    }
    out
}

fn push_domain(out: &mut String, domain: &[Constraint]) {
    if domain.is_empty() {
        return;
    }
    let parts: Vec<String> = domain
        .iter()
        .map(|c| match c {
            Constraint::NonZero(e) => format!("{} != 0", expr_to_string(e)),
            Constraint::Positive(e) => format!("{} > 0", expr_to_string(e)),
        })
        .collect();
    out.push_str(&format!("  domain: {};\n", parts.join(", ")));
}

// ---------------------------------------------------------------------------
// Expression printing
// ---------------------------------------------------------------------------

/// Binding strength for parenthesization: sums 1, products and quotients 2,
/// leading minus 3, powers 4, atoms 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) => 1,
        Expr::Mul(_) | Expr::Div(..) => 2,
        Expr::Rat(r) => {
            if !r.is_integer() {
                2
            } else if r < &BigRational::default() {
                3
            } else {
                5
            }
        }
        // A negative exponent prints as the quotient `1/b^k`, so it takes
        // the quotient's precedence, not the power's.
        Expr::Pow(_, k) if *k < 0 => 2,
        Expr::Pow(..) => 4,
        Expr::Var(_) => 5,
    }
}

/// Print an expression in the `.jet` grammar. Parsing the result gives a
/// structurally equal tree (for trees the parser can produce).
pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    if is_negative_led(e) && !matches!(e, Expr::Rat(_)) {
        // Print the sign once up front instead of a -1 factor.
        out.push('-');
        write_expr(&mut out, &strip_sign(e), 2);
    } else {
        write_expr(&mut out, e, 0);
    }
    out
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        write_raw(out, e);
        out.push(')');
    } else {
        write_raw(out, e);
    }
}

fn write_raw(out: &mut String, e: &Expr) {
    match e {
        Expr::Rat(r) => {
            if r.is_integer() {
                out.push_str(&r.numer().to_string());
            } else {
                out.push_str(&format!("{}/{}", r.numer(), r.denom()));
            }
        }
        Expr::Var(v) => out.push_str(&v.to_string()),
        Expr::Add(items) => {
            for (i, item) in items.iter().enumerate() {
                if is_negative_led(item) {
                    out.push_str(if i == 0 { "-" } else { " - " });
                    write_expr(out, &strip_sign(item), 2);
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    write_expr(out, item, 2);
                }
            }
        }
        Expr::Mul(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                write_expr(out, item, if i == 0 { 2 } else { 3 });
            }
        }
        Expr::Div(a, b) => {
            write_expr(out, a, 2);
            out.push('/');
            write_expr(out, b, 3);
        }
        Expr::Pow(b, k) => {
            if *k < 0 {
                // Not producible by the parser; print an equivalent form.
                out.push_str("1/");
                write_expr(out, &Expr::pow((**b).clone(), -k), 3);
            } else {
                write_expr(out, b, 5);
                out.push('^');
                out.push_str(&k.to_string());
            }
        }
    }
}

/// Does the expression print with a leading minus the parser would fold
/// back into it (negative literal, literal-led product, or such a
/// numerator)?
fn is_negative_led(e: &Expr) -> bool {
    match e {
        Expr::Rat(r) => r < &BigRational::default(),
        Expr::Mul(items) => matches!(&items[0], Expr::Rat(r) if r < &BigRational::default()),
        Expr::Div(a, _) => is_negative_led(a),
        _ => false,
    }
}

/// The positive counterpart of a negative-led expression: what the parser's
/// negation of the printed text reproduces.
fn strip_sign(e: &Expr) -> Expr {
    match e {
        Expr::Rat(r) => Expr::Rat(-r.clone()),
        Expr::Mul(items) => {
            let Expr::Rat(r) = &items[0] else {
                unreachable!("strip_sign on non-negative-led product")
            };
            let lead = -r.clone();
            if lead == BigRational::from_integer(1.into()) && items.len() >= 2 {
                if items.len() == 2 {
                    items[1].clone()
                } else {
                    Expr::Mul(items[1..].to_vec())
                }
            } else {
                let mut out = vec![Expr::Rat(lead)];
                out.extend(items[1..].iter().cloned());
                Expr::Mul(out)
            }
        }
        Expr::Div(a, b) => Expr::Div(Box::new(strip_sign(a)), b.clone()),
        _ => unreachable!("strip_sign on non-negative-led expression"),
    }
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

/// Resolved contents of a `.jet` file: systems shared behind [`Arc`] (maps
/// and certificates reference them), all in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Program {
    order: Vec<String>,
    systems: BTreeMap<String, Arc<ExplicitSystem>>,
    maps: BTreeMap<String, JetMap>,
    certificates: BTreeMap<String, Certificate>,
}

impl Program {
    pub fn system(&self, name: &str) -> Result<&Arc<ExplicitSystem>> {
        self.systems
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no system named {name} in the file")))
    }

    pub fn map(&self, name: &str) -> Result<&JetMap> {
        self.maps
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no map named {name} in the file")))
    }

    pub fn certificate(&self, name: &str) -> Result<&Certificate> {
        self.certificates
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no certificate named {name} in the file")))
    }

    pub fn systems(&self) -> impl Iterator<Item = &Arc<ExplicitSystem>> {
        self.order.iter().filter_map(|n| self.systems.get(n))
    }

    pub fn maps(&self) -> impl Iterator<Item = &JetMap> {
        self.order.iter().filter_map(|n| self.maps.get(n))
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.order.iter().filter_map(|n| self.certificates.get(n))
    }
}

/// Resolve a parsed file: build each system, bind each map to previously
/// declared systems, and assemble certificates from previously declared
/// maps. Names share one namespace and must be unique.
pub fn lower(file: &SourceFile) -> Result<Program> {
    let mut program = Program::default();
    let mut names = BTreeSet::new();
    for decl in &file.decls {
        if !names.insert(decl.name().to_string()) {
            return Err(Error::Parse(format!(
                "duplicate declaration name {}",
                decl.name()
            )));
        }
        match decl {
            Decl::System(d) => {
                for s in &d.states {
                    if is_derivative_operator(s) {
                        return Err(Error::BadSystem {
                            name: d.name.clone(),
                            reason: format!(
                                "state name {s} collides with the derivative notation"
                            ),
                        });
                    }
                }
                let sys = ExplicitSystem::new(
                    &d.name,
                    d.states.clone(),
                    d.controls.clone(),
                    d.equations.clone(),
                    d.domain.clone(),
                )?;
                program.systems.insert(d.name.clone(), Arc::new(sys));
            }
            Decl::Map(d) => {
                let source = Arc::clone(program.system(&d.source).map_err(|_| {
                    Error::Parse(format!(
                        "map {} references unknown system {}",
                        d.name, d.source
                    ))
                })?);
                let target = Arc::clone(program.system(&d.target).map_err(|_| {
                    Error::Parse(format!(
                        "map {} references unknown system {}",
                        d.name, d.target
                    ))
                })?);
                let mut by_name: BTreeMap<&str, &Expr> = BTreeMap::new();
                for (state, e) in &d.components {
                    if by_name.insert(state, e).is_some() {
                        return Err(Error::BadMap {
                            name: d.name.clone(),
                            reason: format!("component {state} defined twice"),
                        });
                    }
                }
                let mut components = Vec::with_capacity(target.n());
                for state in target.states() {
                    let e = by_name.remove(state.as_ref()).ok_or_else(|| Error::BadMap {
                        name: d.name.clone(),
                        reason: format!("no component for target state {state}"),
                    })?;
                    components.push(e.clone());
                }
                if let Some((stray, _)) = by_name.into_iter().next() {
                    return Err(Error::BadMap {
                        name: d.name.clone(),
                        reason: format!("{stray} is not a state of {}", target.name()),
                    });
                }
                let map = JetMap::new(
                    &d.name,
                    source,
                    target,
                    d.order,
                    components,
                    d.domain.clone(),
                )?;
                program.maps.insert(d.name.clone(), map);
            }
            Decl::Certificate(d) => {
                let fwd = program
                    .map(&d.forward)
                    .map_err(|_| {
                        Error::Parse(format!(
                            "certificate {} references unknown map {}",
                            d.name, d.forward
                        ))
                    })?
                    .clone();
                let bwd = program
                    .map(&d.backward)
                    .map_err(|_| {
                        Error::Parse(format!(
                            "certificate {} references unknown map {}",
                            d.name, d.backward
                        ))
                    })?
                    .clone();
                let cert = Certificate::new(&d.name, fwd, bwd)?;
                program.certificates.insert(d.name.clone(), cert);
            }
        }
        program.order.push(decl.name().to_string());
    }
    Ok(program)
}

fn is_derivative_operator(name: &str) -> bool {
    name == "D"
        || name
            .strip_prefix('D')
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

/// Parse and resolve in one step.
pub fn load_str(text: &str) -> Result<Program> {
    let file = parse(text).map_err(|e| Error::Parse(e.to_string()))?;
    lower(&file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::JetVar;

    fn v(name: &str, order: u32) -> Expr {
        Expr::var(JetVar::plain(name, order))
    }

    const QUADRIC: &str = "
        # Three states, the first driven by a quadric in the control rates.
        system Quadric {
          states: y1, y2, y3;
          controls: y2, y3;
          equations:
            D(y1) = y2 + (D(y2) - y1*D(y3))*D(y3);
        }
    ";

    #[test]
    fn a_quadric_system_parses_and_lowers() {
        let program = load_str(QUADRIC).unwrap();
        let sys = program.system("Quadric").unwrap();
        assert_eq!(sys.n(), 3);
        assert_eq!(sys.m(), 2);
        let expected = Expr::add(vec![
            v("y2", 0),
            Expr::mul(vec![
                Expr::sub(v("y2", 1), Expr::mul(vec![v("y1", 0), v("y3", 1)])),
                v("y3", 1),
            ]),
        ]);
        let diff = Expr::sub(sys.f()[0].clone(), expected);
        assert!(diff.is_zero().unwrap());
    }

    #[test]
    fn trivial_systems_need_no_equations() {
        let program = load_str(
            "system T { states: u1, u2; controls: u1, u2; }",
        )
        .unwrap();
        let sys = program.system("T").unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.m(), 2);
        assert!(sys.f().is_empty());
    }

    #[test]
    fn maps_and_certificates_resolve_against_earlier_declarations() {
        let text = "
            system A { states: x1, x2; controls: x2; equations: D(x1) = x2; }
            system B { states: z1, z2; controls: z2; equations: D(z1) = z2; }
            map F : A -> B order 0 { z1 = x1; z2 = x2; domain: x1 != 0; }
            map G : B -> A order 0 { x1 = z1; x2 = z2; }
            certificate C { forward: F; backward: G; }
        ";
        let program = load_str(text).unwrap();
        let cert = program.certificate("C").unwrap();
        assert_eq!(cert.forward().source().name(), "A");
        assert_eq!(cert.forward().target().name(), "B");
        assert_eq!(program.map("F").unwrap().domain().len(), 1);
        assert_eq!(program.systems().count(), 2);
    }

    #[test]
    fn forward_references_are_rejected() {
        let text = "
            map F : A -> A order 0 { x1 = x1; }
            system A { states: x1; controls: ; equations: D(x1) = 1; }
        ";
        let err = load_str(text).unwrap_err();
        assert!(matches!(err, Error::Parse(msg) if msg.contains("unknown system")));
    }

    #[test]
    fn names_share_one_namespace() {
        let text = "
            system A { states: x1, x2; controls: x2; equations: D(x1) = x2; }
            map A : A -> A order 0 { x1 = x1; x2 = x2; }
        ";
        let err = load_str(text).unwrap_err();
        assert!(matches!(err, Error::Parse(msg) if msg.contains("duplicate")));
    }

    #[test]
    fn unknown_variables_are_semantic_errors() {
        let text = "system A { states: x1, x2; controls: x2; equations: D(x1) = q; }";
        assert!(matches!(load_str(text), Err(Error::BadSystem { .. })));
    }

    #[test]
    fn derivative_like_state_names_are_rejected() {
        let text = "system A { states: D2, x2; controls: x2; equations: D(D2) = x2; }";
        assert!(matches!(load_str(text), Err(Error::BadSystem { .. })));
    }

    #[test]
    fn map_components_must_cover_the_target_states() {
        let base = "system A { states: x1, x2; controls: x2; equations: D(x1) = x2; }";
        let missing = format!("{base} map F : A -> A order 0 {{ x1 = x1; }}");
        assert!(matches!(load_str(&missing), Err(Error::BadMap { .. })));
        let stray = format!("{base} map F : A -> A order 0 {{ x1 = x1; x2 = x2; x9 = x1; }}");
        assert!(matches!(load_str(&stray), Err(Error::BadMap { .. })));
        let twice = format!("{base} map F : A -> A order 0 {{ x1 = x1; x1 = x2; x2 = x2; }}");
        assert!(matches!(load_str(&twice), Err(Error::BadMap { .. })));
    }

    #[test]
    fn syntax_errors_carry_positions_and_expectations() {
        let err = parse("system S {\n  states: x1\n}").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(!err.expected.is_empty());
        assert!(err.span.start <= "system S {\n  states: x1\n}".len());

        let err = parse("system S { states: x1; controls: ; equations: D(x1) = x2 + ").unwrap_err();
        assert!(err.to_string().contains("end of input"), "{err}");
    }

    #[test]
    fn fractional_and_chained_exponents_are_rejected() {
        assert!(parse_expr("x^1.5").unwrap_err().to_string().contains("fractional"));
        assert!(parse_expr("x^(1/2)").is_err());
        assert!(parse_expr("x^-2").unwrap_err().to_string().contains("nonnegative"));
        assert!(parse_expr("x^2^3").unwrap_err().to_string().contains("chained"));
        assert!(parse_expr("x^2").is_ok());
    }

    #[test]
    fn derivative_notations_agree() {
        assert_eq!(parse_expr("D(x, 3)").unwrap(), parse_expr("D3(x)").unwrap());
        assert_eq!(parse_expr("D(x)").unwrap(), v("x", 1));
        assert!(parse_expr("D0(x)").is_err());
        assert!(parse_expr("D(x, 0)").is_err());
        assert!(parse_expr("f(x)").unwrap_err().to_string().contains("unknown function"));
    }

    #[test]
    fn literals_are_exact() {
        assert_eq!(parse_expr("1/2").unwrap(), Expr::ratio(1, 2));
        assert_eq!(parse_expr("0.25").unwrap(), Expr::ratio(1, 4));
        assert_eq!(parse_expr("-3").unwrap(), Expr::int(-3));
        assert!(parse_expr("1/0").is_err());
    }

    #[test]
    fn empty_files_round_trip_to_the_empty_string() {
        let file = parse("").unwrap();
        assert!(file.decls.is_empty());
        assert_eq!(serialize(&file), "");
    }

    #[test]
    fn files_round_trip_structurally() {
        let text = "
            system Sigma {
              states: x1, x2, x3;
              controls: x2, x3;
              equations:
                D(x1) = x2 + (D(x2) - x1*D(x3))^2*D(x3)^2;
              domain: (D(x2) - x1*D(x3))*D(x3) != 0;
            }
            system SigmaP {
              states: y1, y2, y3;
              controls: y2, y3;
              equations:
                D(y1) = y2 + (D(y2) - y1*D(y3))^2*D(y3);
            }
            map Phi : Sigma -> SigmaP order 1 {
              y1 = x1;
              y2 = x2 - 1/2*D(x3);
              y3 = D(x2)/D(x3);
              domain: D(x3) != 0;
            }
            map Psi : SigmaP -> Sigma order 2 {
              x1 = y1;
              x2 = y2;
              x3 = -D2(y2) + y3;
            }
            certificate C { forward: Phi; backward: Psi; }
        ";
        let first = parse(text).unwrap();
        let printed = serialize(&first);
        let second = parse(&printed).unwrap();
        assert_eq!(first, second, "printed form:\n{printed}");
        // Serialization is stable once in printed form.
        assert_eq!(printed, serialize(&second));
    }

    #[test]
    fn tricky_expressions_round_trip() {
        for text in [
            "-x",
            "-3*x + y",
            "x - 3*y",
            "x*(y + z)",
            "x*(1/2)",
            "1/2*x",
            "(x + y)/(x*y)",
            "x/y/z",
            "x - y/z",
            "-(x + y)",
            "2^3",
            "(x + 1)^4",
            "-x^2",
            "x*(-2)",
            "D2(x)*D(y)^2 - 5",
        ] {
            let e = parse_expr(text).unwrap();
            let printed = expr_to_string(&e);
            let reparsed = parse_expr(&printed)
                .unwrap_or_else(|err| panic!("{text} printed as {printed}: {err}"));
            assert_eq!(e, reparsed, "{text} printed as {printed}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# leading comment\n\nsystem A { # trailing\n states: x1; controls: ; # c\n equations: D(x1) = 2; }";
        assert!(load_str(text).is_ok());
    }
}
