//! Exact symbolic expressions over jet variables.
//!
//! An [`Expr`] is an ordinary expression tree (rational constants, jet
//! variables, sums, products, integer powers, quotients). Every expression
//! has a unique canonical form as a reduced fraction of multivariate
//! polynomials, computed by [`Expr::normalize`]; two expressions denote the
//! same rational function exactly when their canonical forms are
//! structurally equal, which makes [`Expr::is_zero`] decidable. All
//! arithmetic is exact: coefficients are arbitrary-precision rationals.

mod poly;
mod ratfn;

pub(crate) use poly::{poly_gcd, Poly};
pub(crate) use ratfn::{poly_substitute, RatFn};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

/// Which block of a system's state a variable belongs to. Purely
/// informational: identity and ordering of a [`JetVar`] use only the name
/// and the derivative order, so the same quantity referenced from contexts
/// with different block knowledge still compares equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// Drift block: states whose derivative is given by an equation.
    StateI,
    /// Control block: states whose derivatives are free coordinates.
    StateII,
    /// Not attached to any system block.
    Plain,
}

/// A jet coordinate: a named quantity together with a derivative order
/// (order 0 is the quantity itself, order 1 its first time derivative, and
/// so on). The pair (name, order) identifies the variable; the total order
/// is name-major, order-minor.
#[derive(Clone, Debug)]
pub struct JetVar {
    pub name: Arc<str>,
    pub block: Block,
    pub order: u32,
}

impl JetVar {
    pub fn new(name: &str, block: Block, order: u32) -> Self {
        JetVar {
            name: Arc::from(name),
            block,
            order,
        }
    }

    pub fn plain(name: &str, order: u32) -> Self {
        Self::new(name, Block::Plain, order)
    }

    /// Same quantity, one derivative order higher.
    pub fn up(&self) -> JetVar {
        JetVar {
            name: self.name.clone(),
            block: self.block,
            order: self.order + 1,
        }
    }

    /// Same quantity at a given order.
    pub fn at_order(&self, order: u32) -> JetVar {
        JetVar {
            name: self.name.clone(),
            block: self.block,
            order,
        }
    }
}

impl PartialEq for JetVar {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.order == other.order
    }
}

impl Eq for JetVar {}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name
            .cmp(&other.name)
            .then(self.order.cmp(&other.order))
    }
}

impl std::hash::Hash for JetVar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.order.hash(state);
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(f, "{}", self.name),
            1 => write!(f, "D({})", self.name),
            k => write!(f, "D{}({})", k, self.name),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZero,
    #[error("cyclic substitution bindings involving {0}")]
    CyclicBindings(String),
    #[error("variable {0} has no value at this point")]
    UnboundVariable(String),
    #[error("denominator vanishes at the evaluation point")]
    DenominatorVanishes,
}

/// Symbolic expression tree. Sums and products are n-ary and flattened;
/// exponents are integers (general powers are outside this calculus).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Rat(BigRational),
    Var(JetVar),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(v: JetVar) -> Expr {
        Expr::Var(v)
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// n-ary sum; nested sums are flattened, singletons unwrapped.
    pub fn add(items: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(items.len());
        for e in items {
            match e {
                Expr::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    /// n-ary product; nested products are flattened, singletons unwrapped.
    pub fn mul(items: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(items.len());
        for e in items {
            match e {
                Expr::Mul(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::Mul(flat),
        }
    }

    pub fn pow(base: Expr, exp: i64) -> Expr {
        Expr::Pow(Box::new(base), exp)
    }

    pub fn div(num: Expr, den: Expr) -> Expr {
        Expr::Div(Box::new(num), Box::new(den))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), e])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    /// All variables occurring in the tree (whether or not they survive
    /// cancellation).
    pub fn vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<JetVar>) {
        match self {
            Expr::Rat(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(items) | Expr::Mul(items) => {
                for e in items {
                    e.collect_vars(out);
                }
            }
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Partial derivative with respect to one jet variable, by the usual
    /// sum, product, power, and quotient rules on the tree.
    pub fn differentiate(&self, v: &JetVar) -> Expr {
        match self {
            Expr::Rat(_) => Expr::zero(),
            Expr::Var(u) => {
                if u == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(items) => Expr::add(items.iter().map(|e| e.differentiate(v)).collect()),
            Expr::Mul(items) => {
                let mut terms = Vec::with_capacity(items.len());
                for i in 0..items.len() {
                    let mut parts = items.clone();
                    parts[i] = items[i].differentiate(v);
                    terms.push(Expr::mul(parts));
                }
                Expr::add(terms)
            }
            Expr::Pow(b, k) => {
                if *k == 0 {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::int(*k),
                    Expr::pow((**b).clone(), k - 1),
                    b.differentiate(v),
                ])
            }
            Expr::Div(a, b) => {
                let num = Expr::sub(
                    Expr::mul(vec![a.differentiate(v), (**b).clone()]),
                    Expr::mul(vec![(**a).clone(), b.differentiate(v)]),
                );
                Expr::div(num, Expr::pow((**b).clone(), 2))
            }
        }
    }

    /// Formal total time derivative: sum over occurring variables of the
    /// partial derivative times the order-raised variable. Satisfies
    /// `ftd(de/dv_k) = d(ftd e)/dv_k - de/dv_(k-1)` (the lower-order term
    /// dropped at order 0).
    pub fn free_total_derivative(&self) -> Expr {
        let mut terms = Vec::new();
        for v in self.vars() {
            terms.push(Expr::mul(vec![
                self.differentiate(&v),
                Expr::var(v.up()),
            ]));
        }
        Expr::add(terms)
    }

    /// Simultaneous substitution of variables by expressions. Bindings must
    /// be acyclic: no bound variable may reach itself through the variables
    /// of the replacement expressions. Unbound variables are unchanged.
    pub fn substitute(&self, bindings: &BTreeMap<JetVar, Expr>) -> Result<Expr, ExprError> {
        check_acyclic(bindings)?;
        Ok(self.replace(bindings))
    }

    fn replace(&self, bindings: &BTreeMap<JetVar, Expr>) -> Expr {
        match self {
            Expr::Rat(_) => self.clone(),
            Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(items) => Expr::add(items.iter().map(|e| e.replace(bindings)).collect()),
            Expr::Mul(items) => Expr::mul(items.iter().map(|e| e.replace(bindings)).collect()),
            Expr::Pow(b, k) => Expr::pow(b.replace(bindings), *k),
            Expr::Div(a, b) => Expr::div(a.replace(bindings), b.replace(bindings)),
        }
    }

    /// Canonical form: a reduced fraction with monic denominator, rendered
    /// back as an expression tree (terms in descending monomial order).
    /// Idempotent. Fails only on division by a canonically zero expression.
    pub fn normalize(&self) -> Result<Expr, ExprError> {
        Ok(self.to_ratfn()?.to_expr())
    }

    /// Decides whether the expression is the zero function.
    pub fn is_zero(&self) -> Result<bool, ExprError> {
        Ok(self.to_ratfn()?.is_zero())
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(
        &self,
        env: &BTreeMap<JetVar, BigRational>,
    ) -> Result<BigRational, ExprError> {
        match self {
            Expr::Rat(c) => Ok(c.clone()),
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| ExprError::UnboundVariable(v.to_string())),
            Expr::Add(items) => {
                let mut acc = BigRational::zero();
                for e in items {
                    acc += e.eval_exact(env)?;
                }
                Ok(acc)
            }
            Expr::Mul(items) => {
                let mut acc = BigRational::one();
                for e in items {
                    acc *= e.eval_exact(env)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => {
                let base = b.eval_exact(env)?;
                if *k < 0 && base.is_zero() {
                    return Err(ExprError::DenominatorVanishes);
                }
                let mut acc = BigRational::one();
                for _ in 0..k.unsigned_abs() {
                    acc *= &base;
                }
                if *k < 0 {
                    acc = acc.recip();
                }
                Ok(acc)
            }
            Expr::Div(a, b) => {
                let den = b.eval_exact(env)?;
                if den.is_zero() {
                    return Err(ExprError::DenominatorVanishes);
                }
                Ok(a.eval_exact(env)? / den)
            }
        }
    }

    /// Floating-point evaluation of the tree as written (no normalization).
    pub fn eval_f64(&self, env: &BTreeMap<JetVar, f64>) -> Result<f64, ExprError> {
        match self {
            Expr::Rat(c) => Ok(num::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)),
            Expr::Var(v) => env
                .get(v)
                .copied()
                .ok_or_else(|| ExprError::UnboundVariable(v.to_string())),
            Expr::Add(items) => {
                let mut acc = 0.0;
                for e in items {
                    acc += e.eval_f64(env)?;
                }
                Ok(acc)
            }
            Expr::Mul(items) => {
                let mut acc = 1.0;
                for e in items {
                    acc *= e.eval_f64(env)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => {
                let base = b.eval_f64(env)?;
                if *k < 0 && base == 0.0 {
                    return Err(ExprError::DenominatorVanishes);
                }
                Ok(base.powi(*k as i32))
            }
            Expr::Div(a, b) => {
                let den = b.eval_f64(env)?;
                if den == 0.0 {
                    return Err(ExprError::DenominatorVanishes);
                }
                Ok(a.eval_f64(env)? / den)
            }
        }
    }

    pub(crate) fn to_ratfn(&self) -> Result<RatFn, ExprError> {
        match self {
            Expr::Rat(c) => Ok(RatFn::constant(c.clone())),
            Expr::Var(v) => Ok(RatFn::var(v.clone())),
            Expr::Add(items) => {
                let mut acc = RatFn::zero();
                for e in items {
                    acc = acc.add(&e.to_ratfn()?);
                }
                Ok(acc)
            }
            Expr::Mul(items) => {
                let mut acc = RatFn::one();
                for e in items {
                    acc = acc.mul(&e.to_ratfn()?);
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => b.to_ratfn()?.pow(*k),
            Expr::Div(a, b) => a.to_ratfn()?.div(&b.to_ratfn()?),
        }
    }
}

fn check_acyclic(bindings: &BTreeMap<JetVar, Expr>) -> Result<(), ExprError> {
    // depth-first search over the bound-variable dependency graph
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    fn visit(
        v: &JetVar,
        bindings: &BTreeMap<JetVar, Expr>,
        marks: &mut BTreeMap<JetVar, Mark>,
    ) -> Result<(), ExprError> {
        match marks.get(v) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Visiting) => {
                return Err(ExprError::CyclicBindings(v.to_string()));
            }
            None => {}
        }
        marks.insert(v.clone(), Mark::Visiting);
        if let Some(rhs) = bindings.get(v) {
            for u in rhs.vars() {
                if bindings.contains_key(&u) {
                    visit(&u, bindings, marks)?;
                }
            }
        }
        marks.insert(v.clone(), Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for v in bindings.keys() {
        visit(v, bindings, &mut marks)?;
    }
    Ok(())
}

impl RatFn {
    /// Render the canonical fraction as an expression tree.
    pub(crate) fn to_expr(&self) -> Expr {
        if self.den().is_one() {
            return poly_to_expr(self.num());
        }
        Expr::div(poly_to_expr(self.num()), poly_to_expr(self.den()))
    }
}

fn poly_to_expr(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::zero();
    }
    let mut terms = Vec::with_capacity(p.num_terms());
    for (m, c) in p.terms_desc() {
        let mut parts = Vec::new();
        if !c.is_one() || m.is_one() {
            parts.push(Expr::Rat(c.clone()));
        }
        for (v, e) in &m.0 {
            if *e == 1 {
                parts.push(Expr::var(v.clone()));
            } else {
                parts.push(Expr::pow(Expr::var(v.clone()), *e as i64));
            }
        }
        terms.push(Expr::mul(parts));
    }
    Expr::add(terms)
}
