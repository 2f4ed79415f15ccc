//! Canonical rational functions: a reduced fraction of two [`Poly`]s.
//!
//! Invariants held by every value: the denominator is nonzero and monic
//! under the monomial order, gcd(num, den) = 1, and the zero function is
//! exactly 0/1. Equality of canonical forms is therefore structural.

use std::collections::BTreeMap;

use num::{BigRational, One, Zero};

use super::poly::{poly_gcd, Poly};
use super::{ExprError, JetVar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<RatFn, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Poly, den: Poly) -> RatFn {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFn {
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let g = poly_gcd(&num, &den);
        let mut n = num.div_exact(&g).expect("gcd divides numerator");
        let mut d = den.div_exact(&g).expect("gcd divides denominator");
        let lc = d.leading().map(|(_, c)| c.clone()).expect("den nonzero");
        if !lc.is_one() {
            let inv = lc.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RatFn { num: n, den: d }
    }

    pub fn from_poly(p: Poly) -> RatFn {
        RatFn {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn zero() -> RatFn {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> RatFn {
        Self::from_poly(Poly::one())
    }

    pub fn constant(c: BigRational) -> RatFn {
        Self::from_poly(Poly::constant(c))
    }

    pub fn var(v: JetVar) -> RatFn {
        Self::from_poly(Poly::var(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        Self::reduced(num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        let num = self
            .num
            .mul(&other.den)
            .sub(&other.num.mul(&self.den));
        Self::reduced(num, self.den.mul(&other.den))
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        Self::reduced(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn, ExprError> {
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::reduced(
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn pow(&self, e: i64) -> Result<RatFn, ExprError> {
        if e == 0 {
            return Ok(RatFn::one());
        }
        if e < 0 && self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let k = e.unsigned_abs() as u32;
        let p = RatFn {
            num: self.num.pow(k),
            den: self.den.pow(k),
        };
        if e > 0 {
            Ok(p)
        } else {
            Ok(Self::reduced(p.den, p.num))
        }
    }

    pub fn derivative(&self, v: &JetVar) -> RatFn {
        let n = self
            .num
            .derivative(v)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(v)));
        Self::reduced(n, self.den.mul(&self.den))
    }

    pub fn vars(&self) -> std::collections::BTreeSet<JetVar> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    /// Formal total derivative: every occurring variable is sent to its
    /// order-raised successor.
    pub fn total_derivative_free(&self) -> RatFn {
        let mut acc = RatFn::zero();
        for v in self.vars() {
            let d = self.derivative(&v);
            if d.is_zero() {
                continue;
            }
            acc = acc.add(&d.mul(&RatFn::var(v.up())));
        }
        acc
    }

    /// Simultaneous substitution of whole variables by rational functions.
    /// Unbound variables are left alone. Fails if a denominator collapses
    /// to the zero function after substitution.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<JetVar, RatFn>,
    ) -> Result<RatFn, ExprError> {
        let n = poly_substitute(&self.num, bindings)?;
        let d = poly_substitute(&self.den, bindings)?;
        n.div(&d)
    }

    pub fn eval_exact(
        &self,
        env: &BTreeMap<JetVar, BigRational>,
    ) -> Result<BigRational, ExprError> {
        let d = self.den.eval_exact(env)?;
        if d.is_zero() {
            return Err(ExprError::DenominatorVanishes);
        }
        Ok(self.num.eval_exact(env)? / d)
    }

    pub fn eval_f64(&self, env: &BTreeMap<JetVar, f64>) -> Result<f64, ExprError> {
        let d = self.den.eval_f64(env)?;
        if d == 0.0 {
            return Err(ExprError::DenominatorVanishes);
        }
        Ok(self.num.eval_f64(env)? / d)
    }
}

/// Evaluate a polynomial over rational-function values (multivariate Horner).
/// Substitution is simultaneous: replacement values are never re-scanned.
pub(crate) fn poly_substitute(
    p: &Poly,
    bindings: &BTreeMap<JetVar, RatFn>,
) -> Result<RatFn, ExprError> {
    match p.max_var() {
        None => Ok(RatFn::from_poly(p.clone())),
        Some(v) => {
            let coeffs = p.coeffs_in(&v);
            let val = match bindings.get(&v) {
                Some(r) => r.clone(),
                None => RatFn::var(v.clone()),
            };
            let mut acc = RatFn::zero();
            for c in coeffs.iter().rev() {
                acc = acc.mul(&val).add(&poly_substitute(c, bindings)?);
            }
            Ok(acc)
        }
    }
}
