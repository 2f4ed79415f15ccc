//! Recursive-descent parser for `.jet` files over the token stream.

use num::{ToPrimitive, Zero};

use crate::expr::{Expr, JetVar};
use crate::system::Constraint;

use super::lexer::{lex, Spanned, Tok};
use super::{CertDecl, Decl, MapDecl, ParseError, SourceFile, Span, SystemDecl};

pub(super) fn parse_source(text: &str) -> Result<SourceFile, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { text, toks, pos: 0 };
    let mut decls = Vec::new();
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "system" => decls.push(Decl::System(p.system()?)),
            Tok::Ident(kw) if kw == "map" => decls.push(Decl::Map(p.map()?)),
            Tok::Ident(kw) if kw == "certificate" => decls.push(Decl::Certificate(p.cert()?)),
            _ => {
                return Err(p.err_here(
                    "expected a declaration".to_string(),
                    vec!["`system`", "`map`", "`certificate`"],
                ))
            }
        }
    }
    Ok(SourceFile { decls })
}

pub(super) fn parse_expr_text(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { text, toks, pos: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err_here("trailing input after expression".to_string(), vec![]));
    }
    Ok(e)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Spanned>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: String, expected: Vec<&'static str>) -> ParseError {
        ParseError::at(self.text, self.here(), message, expected)
    }

    fn expect(&mut self, want: Tok, desc: &'static str) -> Result<Span, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().span)
        } else {
            Err(self.err_here(
                format!("found {}", self.peek().describe()),
                vec![desc],
            ))
        }
    }

    fn ident(&mut self, what: &'static str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            other => Err(self.err_here(format!("found {}", other.describe()), vec![what])),
        }
    }

    fn keyword(&mut self, kw: &'static str) -> Result<Span, ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().span),
            other => Err(self.err_here(format!("found {}", other.describe()), vec![kw])),
        }
    }

    /// Is the cursor at `ident :` (a section header)?
    fn at_section(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek2(), Tok::Colon)
    }

    // -- declarations -----------------------------------------------------

    fn system(&mut self) -> Result<SystemDecl, ParseError> {
        let start = self.keyword("system")?;
        let (name, _) = self.ident("system name")?;
        self.expect(Tok::LBrace, "`{`")?;

        let mut states: Option<Vec<String>> = None;
        let mut controls: Option<Vec<String>> = None;
        let mut equations = Vec::new();
        let mut domain = Vec::new();
        while !matches!(self.peek(), Tok::RBrace) {
            let (section, span) = self.ident("a section (`states`, `controls`, `equations`, `domain`)")?;
            self.expect(Tok::Colon, "`:`")?;
            match section.as_str() {
                "states" => {
                    if states.is_some() {
                        return Err(ParseError::at(
                            self.text,
                            span,
                            "duplicate `states` section".to_string(),
                            vec![],
                        ));
                    }
                    states = Some(self.name_list(false)?);
                }
                "controls" => {
                    if controls.is_some() {
                        return Err(ParseError::at(
                            self.text,
                            span,
                            "duplicate `controls` section".to_string(),
                            vec![],
                        ));
                    }
                    controls = Some(self.name_list(true)?);
                }
                "equations" => {
                    while !matches!(self.peek(), Tok::RBrace) && !self.at_section() {
                        equations.push(self.equation()?);
                    }
                }
                "domain" => {
                    domain = self.constraints()?;
                }
                other => {
                    return Err(ParseError::at(
                        self.text,
                        span,
                        format!("unknown section `{other}`"),
                        vec!["`states`", "`controls`", "`equations`", "`domain`"],
                    ))
                }
            }
        }
        let end = self.expect(Tok::RBrace, "`}`")?;
        let states = states.ok_or_else(|| {
            ParseError::at(self.text, end, format!("system {name} has no `states` section"), vec![])
        })?;
        let controls = controls.ok_or_else(|| {
            ParseError::at(self.text, end, format!("system {name} has no `controls` section"), vec![])
        })?;
        Ok(SystemDecl {
            name,
            states,
            controls,
            equations,
            domain,
            span: Span {
                start: start.start,
                end: end.end,
            },
        })
    }

    fn map(&mut self) -> Result<MapDecl, ParseError> {
        let start = self.keyword("map")?;
        let (name, _) = self.ident("map name")?;
        self.expect(Tok::Colon, "`:`")?;
        let (source, _) = self.ident("source system name")?;
        self.expect(Tok::Arrow, "`->`")?;
        let (target, _) = self.ident("target system name")?;
        self.keyword("order")?;
        let order = self.nonneg_int("map order")?;
        self.expect(Tok::LBrace, "`{`")?;

        let mut components = Vec::new();
        let mut domain = Vec::new();
        while !matches!(self.peek(), Tok::RBrace) {
            if self.at_section() {
                let (section, span) = self.ident("section")?;
                self.expect(Tok::Colon, "`:`")?;
                if section == "domain" {
                    domain = self.constraints()?;
                } else {
                    return Err(ParseError::at(
                        self.text,
                        span,
                        format!("unknown section `{section}` in map"),
                        vec!["`domain`"],
                    ));
                }
            } else {
                let (target_state, _) = self.ident("target state name")?;
                self.expect(Tok::Eq, "`=`")?;
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                components.push((target_state, e));
            }
        }
        let end = self.expect(Tok::RBrace, "`}`")?;
        Ok(MapDecl {
            name,
            source,
            target,
            order,
            components,
            domain,
            span: Span {
                start: start.start,
                end: end.end,
            },
        })
    }

    fn cert(&mut self) -> Result<CertDecl, ParseError> {
        let start = self.keyword("certificate")?;
        let (name, _) = self.ident("certificate name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut forward: Option<String> = None;
        let mut backward: Option<String> = None;
        while !matches!(self.peek(), Tok::RBrace) {
            let (section, span) = self.ident("`forward` or `backward`")?;
            self.expect(Tok::Colon, "`:`")?;
            let (value, _) = self.ident("map name")?;
            self.expect(Tok::Semi, "`;`")?;
            let slot = match section.as_str() {
                "forward" => &mut forward,
                "backward" => &mut backward,
                other => {
                    return Err(ParseError::at(
                        self.text,
                        span,
                        format!("unknown section `{other}` in certificate"),
                        vec!["`forward`", "`backward`"],
                    ))
                }
            };
            if slot.is_some() {
                return Err(ParseError::at(
                    self.text,
                    span,
                    format!("duplicate `{section}` section"),
                    vec![],
                ));
            }
            *slot = Some(value);
        }
        let end = self.expect(Tok::RBrace, "`}`")?;
        let forward = forward.ok_or_else(|| {
            ParseError::at(self.text, end, format!("certificate {name} has no `forward` map"), vec![])
        })?;
        let backward = backward.ok_or_else(|| {
            ParseError::at(self.text, end, format!("certificate {name} has no `backward` map"), vec![])
        })?;
        Ok(CertDecl {
            name,
            forward,
            backward,
            span: Span {
                start: start.start,
                end: end.end,
            },
        })
    }

    // -- sections ----------------------------------------------------------

    /// Comma-separated identifier list ending in `;`.
    fn name_list(&mut self, allow_empty: bool) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        if allow_empty && matches!(self.peek(), Tok::Semi) {
            self.bump();
            return Ok(out);
        }
        loop {
            let (name, _) = self.ident("state name")?;
            out.push(name);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Semi => {
                    self.bump();
                    return Ok(out);
                }
                other => {
                    return Err(self.err_here(
                        format!("found {}", other.describe()),
                        vec!["`,`", "`;`"],
                    ))
                }
            }
        }
    }

    /// `D(state) = expr ;`
    fn equation(&mut self) -> Result<(String, Expr), ParseError> {
        let (op, span) = self.ident("`D(state)`")?;
        if op != "D" {
            return Err(ParseError::at(
                self.text,
                span,
                "equation left-hand sides must be first derivatives `D(state)`".to_string(),
                vec!["`D`"],
            ));
        }
        self.expect(Tok::LParen, "`(`")?;
        let (state, _) = self.ident("state name")?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Eq, "`=`")?;
        let rhs = self.expr()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok((state, rhs))
    }

    /// `expr != 0` / `expr > 0`, comma-separated, `;`-terminated.
    fn constraints(&mut self) -> Result<Vec<Constraint>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::Semi) {
            self.bump();
            return Ok(out);
        }
        loop {
            let e = self.expr()?;
            let kind = self.bump();
            let nonzero = match kind.tok {
                Tok::NotEq => true,
                Tok::Gt => false,
                other => {
                    return Err(ParseError::at(
                        self.text,
                        kind.span,
                        format!("found {}", other.describe()),
                        vec!["`!=`", "`>`"],
                    ))
                }
            };
            let zero_span = self.here();
            let zero = self.expr()?;
            if zero != Expr::zero() {
                return Err(ParseError::at(
                    self.text,
                    zero_span,
                    "constraint right-hand sides must be the literal 0".to_string(),
                    vec!["`0`"],
                ));
            }
            out.push(if nonzero {
                Constraint::NonZero(e)
            } else {
                Constraint::Positive(e)
            });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Semi => {
                    self.bump();
                    return Ok(out);
                }
                other => {
                    return Err(self.err_here(
                        format!("found {}", other.describe()),
                        vec!["`,`", "`;`"],
                    ))
                }
            }
        }
    }

    fn nonneg_int(&mut self, what: &'static str) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Number(v, true) if v.is_integer() => {
                let span = self.bump().span;
                v.to_integer().to_u32().ok_or_else(|| {
                    ParseError::at(self.text, span, format!("{what} is too large"), vec![])
                })
            }
            other => Err(self.err_here(
                format!("found {}", other.describe()),
                vec!["a nonnegative integer"],
            )),
        }
    }

    // -- expressions ---------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::add(vec![lhs, rhs]);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::add(vec![lhs, negate(rhs)]);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    // A product of literals is a single exact constant (as
                    // for quotients below); this also keeps printing
                    // injective — `-1*q` must not collide with `-q`.
                    lhs = match (&lhs, &rhs) {
                        (Expr::Rat(a), Expr::Rat(b)) => Expr::Rat(a * b),
                        _ => Expr::mul(vec![lhs, rhs]),
                    };
                }
                Tok::Slash => {
                    self.bump();
                    let span = self.here();
                    let rhs = self.unary()?;
                    // A ratio of literals is a single exact constant.
                    lhs = match (&lhs, &rhs) {
                        (Expr::Rat(a), Expr::Rat(b)) => {
                            if b.is_zero() {
                                return Err(ParseError::at(
                                    self.text,
                                    span,
                                    "division of a literal by the literal 0".to_string(),
                                    vec![],
                                ));
                            }
                            Expr::Rat(a / b)
                        }
                        _ => Expr::div(lhs, rhs),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            let inner = self.unary()?;
            return Ok(negate(inner));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !matches!(self.peek(), Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let exp = match self.peek().clone() {
            Tok::Number(v, _) => {
                if !v.is_integer() {
                    return Err(self.err_here(
                        "fractional exponents are not supported".to_string(),
                        vec!["a nonnegative integer"],
                    ));
                }
                let span = self.bump().span;
                v.to_integer().to_i64().filter(|k| *k >= 0).ok_or_else(|| {
                    ParseError::at(
                        self.text,
                        span,
                        "exponent out of range".to_string(),
                        vec!["a nonnegative integer"],
                    )
                })?
            }
            Tok::Minus => {
                return Err(self.err_here(
                    "exponents must be nonnegative integers (write 1/x^k for negative powers)"
                        .to_string(),
                    vec!["a nonnegative integer"],
                ))
            }
            other => {
                return Err(self.err_here(
                    format!("found {}", other.describe()),
                    vec!["a nonnegative integer"],
                ))
            }
        };
        if matches!(self.peek(), Tok::Caret) {
            return Err(self.err_here(
                "chained exponents are ambiguous; parenthesize".to_string(),
                vec![],
            ));
        }
        Ok(Expr::pow(base, exp))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Number(v, _) => {
                self.bump();
                Ok(Expr::Rat(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                if !matches!(self.peek(), Tok::LParen) {
                    return Ok(Expr::var(JetVar::plain(&name, 0)));
                }
                let order_prefix = derivative_order(&name).ok_or_else(|| {
                    ParseError::at(
                        self.text,
                        span,
                        format!("unknown function `{name}` (only derivative operators D, D2, ... take arguments)"),
                        vec![],
                    )
                })?;
                self.bump(); // (
                let (state, _) = self.ident("state name")?;
                let order = match self.peek() {
                    Tok::Comma => {
                        self.bump();
                        if order_prefix != 1 {
                            return Err(ParseError::at(
                                self.text,
                                span,
                                "the order argument form is `D(x, k)`; Dk(x) takes no extra argument"
                                    .to_string(),
                                vec![],
                            ));
                        }
                        let k = self.nonneg_int("derivative order")?;
                        if k == 0 {
                            return Err(self.err_here(
                                "derivative order must be at least 1 (write the plain name for order 0)"
                                    .to_string(),
                                vec![],
                            ));
                        }
                        k
                    }
                    _ => order_prefix,
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::var(JetVar::plain(&state, order)))
            }
            other => Err(self.err_here(
                format!("found {}", other.describe()),
                vec!["a number", "a variable", "`(`", "`-`"],
            )),
        }
    }
}

/// `D` gives order 1, `D<k>` gives order k; anything else is not a
/// derivative operator.
fn derivative_order(name: &str) -> Option<u32> {
    let rest = name.strip_prefix('D')?;
    if rest.is_empty() {
        return Some(1);
    }
    if rest.bytes().all(|b| b.is_ascii_digit()) {
        let k: u32 = rest.parse().ok()?;
        if k >= 1 {
            return Some(k);
        }
    }
    None
}

/// Exact negation that keeps literals and literal-led products as single
/// tokens, so printing and reparsing are mutually inverse.
pub(super) fn negate(e: Expr) -> Expr {
    match e {
        Expr::Rat(r) => Expr::Rat(-r),
        Expr::Mul(mut items) => {
            if let Expr::Rat(r) = &items[0] {
                items[0] = Expr::Rat(-r.clone());
                Expr::Mul(items)
            } else {
                let mut out = vec![Expr::int(-1)];
                out.extend(items);
                Expr::Mul(out)
            }
        }
        Expr::Div(a, b) => Expr::Div(Box::new(negate(*a)), b),
        other => Expr::mul(vec![Expr::int(-1), other]),
    }
}
