//! Sparse multivariate polynomials over exact rationals.
//!
//! This is the arithmetic core under every canonical form in the crate:
//! terms are kept in a `BTreeMap` keyed by power products, ordered
//! lexicographically with the smallest [`JetVar`] most significant, so all
//! iteration orders (and therefore all printed and serialized forms) are
//! deterministic. Division and gcd are exact; the gcd is a primitive
//! pseudo-remainder sequence over a recursively chosen main variable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use super::{ExprError, JetVar};

/// A power product of jet variables. Entries are sorted by variable and
/// every exponent is at least 1; the empty product is the constant monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Mono(pub Vec<(JetVar, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Mono(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent_of(&self, v: &JetVar) -> u32 {
        self.0
            .iter()
            .find(|(u, _)| u == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => {
                        out.push((va.clone(), *ea));
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push((vb.clone(), *eb));
                        j += 1;
                    }
                    Ordering::Equal => {
                        out.push((va.clone(), ea + eb));
                        i += 1;
                        j += 1;
                    }
                },
                (Some((va, ea)), None) => {
                    out.push((va.clone(), *ea));
                    i += 1;
                }
                (None, Some((vb, eb))) => {
                    out.push((vb.clone(), *eb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Mono(out)
    }

    /// Componentwise quotient, `None` when some exponent would go negative.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (v, e) in &self.0 {
            let mut e = *e;
            while j < other.0.len() && other.0[j].0 < *v {
                return None; // divisor has a variable we lack
            }
            if j < other.0.len() && other.0[j].0 == *v {
                let eb = other.0[j].1;
                if eb > e {
                    return None;
                }
                e -= eb;
                j += 1;
            }
            if e > 0 {
                out.push((v.clone(), e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Erase one variable entirely (used when splitting off a main variable).
    fn without(&self, v: &JetVar) -> Mono {
        Mono(self.0.iter().filter(|(u, _)| u != v).cloned().collect())
    }
}

// Lexicographic order with the smallest variable most significant. This is a
// genuine monomial order (compatible with multiplication, constant minimal),
// which the exact-division loop below relies on.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial; the map never stores a zero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        Poly { terms }
    }

    pub fn var(v: JetVar) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(v), BigRational::one());
        Poly { terms }
    }

    pub fn term(m: Mono, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<&BigRational> {
        match self.terms.len() {
            0 => None, // the zero polynomial is handled by is_zero
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// Terms in descending monomial order (leading term first).
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Mono, &BigRational)> {
        self.terms.iter().rev()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn insert_add(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                *old += c;
                if old.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_add(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, v: &JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent_of(v);
            if e == 0 {
                continue;
            }
            let mut reduced: Vec<(JetVar, u32)> = Vec::with_capacity(m.0.len());
            for (u, k) in &m.0 {
                if u == v {
                    if *k > 1 {
                        reduced.push((u.clone(), k - 1));
                    }
                } else {
                    reduced.push((u.clone(), *k));
                }
            }
            out.insert_add(Mono(reduced), c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (v, _) in &m.0 {
                out.insert(v.clone());
            }
        }
        out
    }

    pub fn degree_in(&self, v: &JetVar) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponent_of(v))
            .max()
            .unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<JetVar> {
        self.vars().into_iter().next_back()
    }

    pub fn eval_exact(
        &self,
        env: &BTreeMap<JetVar, BigRational>,
    ) -> Result<BigRational, ExprError> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let val = env
                    .get(v)
                    .ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?;
                for _ in 0..*e {
                    t *= val;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, env: &BTreeMap<JetVar, f64>) -> Result<f64, ExprError> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (v, e) in &m.0 {
                let val = env
                    .get(v)
                    .ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?;
                t *= val.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact single-divisor division; `None` when the division is not exact.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
            let qm = rm.div(&dm)?;
            let t = Poly::term(qm, &rc / &dc);
            rem = rem.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Scale so the leading coefficient is exactly 1.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// gcd of numerators over lcm of denominators, always positive. Dividing
    /// by it leaves coprime integer coefficients, which keeps the remainder
    /// sequences in `poly_gcd` small.
    pub fn rational_content(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        BigRational::new(num_gcd, den_lcm)
    }

    /// Coefficients with respect to `v`, index = exponent. The coefficient
    /// polynomials do not contain `v`.
    pub fn coeffs_in(&self, v: &JetVar) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponent_of(v) as usize;
            out[e].insert_add(m.without(v), c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: &JetVar, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        let mut vpow = Poly::one();
        for c in coeffs {
            out = out.add(&c.mul(&vpow));
            vpow = vpow.mul(&Poly::var(v.clone()));
        }
        out
    }
}

fn uni_deg(p: &[Poly]) -> usize {
    p.len().saturating_sub(1)
}

fn uni_trim(p: &mut Vec<Poly>) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

/// Pseudo-remainder of `a` by `b` (both coefficient vectors in a main
/// variable, deg b >= 1). The result is only meaningful up to a nonzero
/// factor from the coefficient ring; callers take primitive parts anyway.
fn uni_prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = uni_deg(b);
    let lcb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    uni_trim(&mut r);
    while !r.is_empty() && uni_deg(&r) >= db {
        let dr = uni_deg(&r);
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c = c.mul(lcb);
        }
        for k in 0..=db {
            let t = b[k].mul(&lr);
            r[dr - db + k] = r[dr - db + k].sub(&t);
        }
        uni_trim(&mut r);
    }
    r
}

/// Polynomial content of `p` with respect to `v`: gcd of its coefficients.
fn content_in(p: &Poly, v: &JetVar) -> Poly {
    let mut acc = Poly::zero();
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        acc = gcd_inner(&acc, &c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn gcd_inner(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    // nonzero constants are units over the rationals
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    let v = a.max_var().max(b.max_var()).unwrap();
    let da = a.degree_in(&v);
    let db = b.degree_in(&v);
    if da == 0 {
        return gcd_inner(a, &content_in(b, &v));
    }
    if db == 0 {
        return gcd_inner(&content_in(a, &v), b);
    }
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let c = gcd_inner(&ca, &cb);
    let ap = a.div_exact(&ca).expect("content divides");
    let bp = b.div_exact(&cb).expect("content divides");

    let mut ua = ap.coeffs_in(&v);
    let mut ub = bp.coeffs_in(&v);
    if uni_deg(&ua) < uni_deg(&ub) {
        std::mem::swap(&mut ua, &mut ub);
    }
    loop {
        let r = uni_prem(&ua, &ub);
        if r.is_empty() {
            let g = Poly::from_coeffs_in(&v, &ub);
            let gc = content_in(&g, &v);
            let gp = g.div_exact(&gc).expect("content divides");
            return c.mul(&gp);
        }
        let rr = Poly::from_coeffs_in(&v, &r);
        if rr.degree_in(&v) == 0 {
            // a nonzero remainder free of v: the primitive parts are coprime
            return c;
        }
        let rc = content_in(&rr, &v);
        let rp = rr.div_exact(&rc).expect("content divides");
        ua = ub;
        ub = rp.coeffs_in(&v);
    }
}

/// Greatest common divisor, normalized monic (gcd of zero and p is monic p).
pub(crate) fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let an = a.scale(&a.rational_content().recip());
    let bn = b.scale(&b.rational_content().recip());
    gcd_inner(&an, &bn).monic()
}
