//! Exact decision machinery for small polynomial systems.
//!
//! The ruling search reduces to the question: does a finite set of
//! polynomial conditions in at most two unknowns have a common real zero?
//! This module answers that question exactly where it can (branching on
//! monomial factors, linear eliminations, and resultants, with Sturm
//! chains certifying real-root counts), and reports `Undecided` otherwise.
//! `NoSolution` is only ever returned when the conditions provably have no
//! common real zero; `Solution` carries an exact rational witness.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::expr::{poly_gcd, poly_substitute, JetVar, Poly, RatFn};

/// Maximum recursion depth for the branching solver. Each branch either
/// removes a variable, strictly lowers a degree, or splits off a factor,
/// so well-formed inputs terminate long before this bound.
const MAX_DEPTH: u32 = 24;

/// Candidate rational roots tried for univariate polynomials of degree >= 3
/// (degrees 1 and 2 are solved exactly). Sturm counts certify completeness.
fn root_candidates() -> Vec<BigRational> {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    vec![
        r(0, 1),
        r(1, 1),
        r(-1, 1),
        r(2, 1),
        r(-2, 1),
        r(1, 2),
        r(-1, 2),
        r(3, 1),
        r(-3, 1),
        r(1, 3),
        r(-1, 3),
        r(3, 2),
        r(-3, 2),
        r(2, 3),
        r(-2, 3),
    ]
}

/// Outcome of an exact solvability query.
#[derive(Clone, Debug)]
pub(crate) enum SolveOutcome {
    /// A common rational zero, by assignment to the unknowns.
    Solution(BTreeMap<JetVar, BigRational>),
    /// Proof that no common real zero exists.
    NoSolution,
    /// The method could not decide; the string says why.
    Undecided(String),
}

/// Decide whether `conds = 0` has a common real zero. Entry point.
pub(crate) fn solve_conditions(conds: &[Poly]) -> SolveOutcome {
    solve_rec(conds, MAX_DEPTH)
}

fn solve_rec(conds: &[Poly], depth: u32) -> SolveOutcome {
    // Clean: drop zero conditions, strip rational content, fail on nonzero
    // constants.
    let mut cleaned: Vec<Poly> = Vec::new();
    for c in conds {
        if c.is_zero() {
            continue;
        }
        if c.as_constant().is_some() {
            return SolveOutcome::NoSolution;
        }
        let content = c.rational_content();
        cleaned.push(c.scale(&content.recip()));
    }
    cleaned.sort_by(|a, b| a.num_terms().cmp(&b.num_terms()));
    cleaned.dedup();
    if cleaned.is_empty() {
        return SolveOutcome::Solution(BTreeMap::new());
    }
    if depth == 0 {
        return SolveOutcome::Undecided("branch depth limit reached".into());
    }

    let mut vars: BTreeSet<JetVar> = BTreeSet::new();
    for c in &cleaned {
        vars.extend(c.vars());
    }
    let vars: Vec<JetVar> = vars.into_iter().collect();
    match vars.len() {
        1 => solve_univariate_set(&cleaned, &vars[0]),
        2 => solve_bivariate_set(&cleaned, &vars[0], &vars[1], depth),
        n => SolveOutcome::Undecided(format!(
            "{n} unknowns remain after normalization; exact elimination handles at most two"
        )),
    }
}

fn combine(outcomes: Vec<SolveOutcome>) -> SolveOutcome {
    let mut undecided: Option<String> = None;
    for o in outcomes {
        match o {
            SolveOutcome::Solution(_) => return o,
            SolveOutcome::Undecided(s) => {
                if undecided.is_none() {
                    undecided = Some(s);
                }
            }
            SolveOutcome::NoSolution => {}
        }
    }
    match undecided {
        Some(s) => SolveOutcome::Undecided(s),
        None => SolveOutcome::NoSolution,
    }
}

// ---------------------------------------------------------------------------
// Univariate sets
// ---------------------------------------------------------------------------

fn solve_univariate_set(conds: &[Poly], v: &JetVar) -> SolveOutcome {
    // Common zeros of the set = zeros of the gcd.
    let mut g = conds[0].clone();
    for c in &conds[1..] {
        g = poly_gcd(&g, c);
        if g.as_constant().is_some() {
            return SolveOutcome::NoSolution;
        }
    }
    let gu = poly_to_uni(&g, v).expect("gcd of univariate polynomials is univariate");
    let sf = uni_square_free(&gu);
    let chain = sturm_chain(&sf);
    let total = count_real_roots(&chain, None, None);
    if total <= 0 {
        return SolveOutcome::NoSolution;
    }
    let (roots, complete) = rational_roots(&sf, total);
    if let Some(r) = roots.first() {
        let mut m = BTreeMap::new();
        m.insert(v.clone(), r.clone());
        return SolveOutcome::Solution(m);
    }
    if complete {
        // Real zeros exist but none is rational; a zero exists, we just
        // cannot exhibit it exactly.
        SolveOutcome::Undecided("common real zero exists but is irrational".into())
    } else {
        SolveOutcome::Undecided("univariate root search exhausted its candidate list".into())
    }
}

/// All rational roots of a square-free univariate polynomial, together with
/// a flag saying whether the list provably exhausts the real roots.
/// `total_real` must be the exact real-root count of `sf`.
fn rational_roots(sf: &UPoly, total_real: i64) -> (Vec<BigRational>, bool) {
    let deg = match udeg(sf) {
        Some(d) if d >= 1 => d,
        _ => return (Vec::new(), true),
    };
    match deg {
        1 => {
            let root = -&sf[0] / &sf[1];
            (vec![root], true)
        }
        2 => {
            let (a, b, c) = (&sf[2], &sf[1], &sf[0]);
            let disc = b * b - BigRational::from(BigInt::from(4)) * a * c;
            if disc.is_negative() {
                return (Vec::new(), true);
            }
            match rational_sqrt(&disc) {
                Some(s) => {
                    let two_a = BigRational::from(BigInt::from(2)) * a;
                    let r1 = (-b + &s) / &two_a;
                    let r2 = (-b - &s) / &two_a;
                    let mut roots = vec![r1, r2];
                    roots.sort();
                    roots.dedup();
                    (roots, true)
                }
                // Positive non-square discriminant: two real irrational roots.
                None => (Vec::new(), true),
            }
        }
        _ => {
            let mut roots: Vec<BigRational> = root_candidates()
                .into_iter()
                .filter(|r| ueval(sf, r).is_zero())
                .collect();
            roots.sort();
            roots.dedup();
            let complete = roots.len() as i64 == total_real;
            (roots, complete)
        }
    }
}

/// Exact square root of a nonnegative rational, if it is rational.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer();
    let den = x.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Bivariate sets
// ---------------------------------------------------------------------------

fn solve_bivariate_set(conds: &[Poly], u: &JetVar, v: &JetVar, depth: u32) -> SolveOutcome {
    // Step 1: split off monomial factors. If some condition is divisible by
    // a variable, branch on that variable being zero vs. the cofactor
    // vanishing.
    for (i, c) in conds.iter().enumerate() {
        for var in [u, v] {
            let k = c
                .terms_desc()
                .map(|(m, _)| m.exponent_of(var))
                .min()
                .unwrap_or(0);
            if k == 0 {
                continue;
            }
            // Branch A: var = 0.
            let zeroed: Vec<Poly> = conds.iter().map(|d| specialize(d, var, &BigRational::zero())).collect();
            let a = match solve_rec(&zeroed, depth - 1) {
                SolveOutcome::Solution(mut m) => {
                    m.insert(var.clone(), BigRational::zero());
                    SolveOutcome::Solution(m)
                }
                other => other,
            };
            if matches!(a, SolveOutcome::Solution(_)) {
                return a;
            }
            // Branch B: cofactor vanishes.
            let mono = Poly::var(var.clone()).pow(k);
            let cof = c
                .div_exact(&mono)
                .expect("monomial divides by construction");
            let mut rest = conds.to_vec();
            rest[i] = cof;
            let b = solve_rec(&rest, depth - 1);
            return combine(vec![a, b]);
        }
    }

    // Step 2: square-free reduction. Replacing a condition by its
    // square-free part preserves the zero set exactly.
    let mut work: Vec<Poly> = conds.to_vec();
    let mut changed = false;
    for c in work.iter_mut() {
        let cu = c.derivative(u);
        let cv = c.derivative(v);
        let mut g = poly_gcd(c, &cu);
        if !cv.is_zero() {
            g = poly_gcd(&g, &cv);
        }
        if g.as_constant().is_none() {
            if let Some(q) = c.div_exact(&g) {
                *c = q;
                changed = true;
            }
        }
    }
    if changed {
        return solve_rec(&work, depth - 1);
    }

    // Step 3: linear elimination. If some condition is linear in one of the
    // variables, substitute its solution into the rest (branching on the
    // leading coefficient vanishing).
    for (i, c) in work.iter().enumerate() {
        for (main, other) in [(u, v), (v, u)] {
            if c.degree_in(main) == 1 {
                return solve_linear_branch(&work, i, main, other, depth);
            }
        }
    }

    // Step 4: resultant closure.
    solve_by_resultant(&work, u, v, depth)
}

/// `conds[i]` is linear in `main`: `c1(other) * main + c0(other)`.
fn solve_linear_branch(
    conds: &[Poly],
    i: usize,
    main: &JetVar,
    other: &JetVar,
    depth: u32,
) -> SolveOutcome {
    let cs = conds[i].coeffs_in(main);
    let c0 = cs[0].clone();
    let c1 = cs[1].clone();

    // Branch A: main = -c0/c1 where c1 != 0. Substitute into the remaining
    // conditions and clear denominators (powers of c1, nonzero on this
    // branch).
    let rat = RatFn::new(c0.neg(), c1.clone()).expect("c1 is a nonzero polynomial");
    let mut bindings: BTreeMap<JetVar, RatFn> = BTreeMap::new();
    bindings.insert(main.clone(), rat);
    let mut reduced: Vec<Poly> = Vec::new();
    let mut substitution_failed = false;
    for (j, d) in conds.iter().enumerate() {
        if j == i {
            continue;
        }
        match poly_substitute(d, &bindings) {
            Ok(r) => reduced.push(r.num().clone()),
            Err(_) => {
                substitution_failed = true;
                break;
            }
        }
    }
    let a = if substitution_failed {
        SolveOutcome::Undecided("linear elimination produced an invalid substitution".into())
    } else {
        match solve_rec(&reduced, depth - 1) {
            SolveOutcome::Solution(m) => finish_linear_solution(&c0, &c1, main, other, m),
            other_outcome => other_outcome,
        }
    };
    if matches!(a, SolveOutcome::Solution(_)) {
        return a;
    }

    // Branch B: c1 = 0. Then the condition forces c0 = 0 too.
    let mut rest: Vec<Poly> = conds.to_vec();
    rest.remove(i);
    rest.push(c1);
    rest.push(c0);
    let b = solve_rec(&rest, depth - 1);
    combine(vec![a, b])
}

/// Lift a solution of the reduced system back through `main = -c0/c1`.
fn finish_linear_solution(
    c0: &Poly,
    c1: &Poly,
    main: &JetVar,
    other: &JetVar,
    mut m: BTreeMap<JetVar, BigRational>,
) -> SolveOutcome {
    let eval1 = |p: &Poly, val: &BigRational| -> BigRational {
        let mut env = BTreeMap::new();
        env.insert(other.clone(), val.clone());
        p.eval_exact(&env)
            .expect("coefficients depend only on the eliminated variable's partner")
    };
    // The reduced system may not mention `other` at all; choose a value that
    // keeps c1 nonzero. Any such value satisfies the (vacuous) reduced system
    // only if it genuinely does not appear, which `solve_rec` guarantees by
    // construction: unconstrained variables can take any value.
    let v0 = match m.get(other) {
        Some(val) => val.clone(),
        None => {
            let mut found: Option<BigRational> = None;
            for cand in root_candidates() {
                if !eval1(c1, &cand).is_zero() {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(val) => val,
                None => {
                    return SolveOutcome::Undecided(
                        "could not pick a value keeping the pivot coefficient nonzero".into(),
                    )
                }
            }
        }
    };
    let c1v = eval1(c1, &v0);
    if c1v.is_zero() {
        return SolveOutcome::Undecided(
            "pivot coefficient vanishes at the candidate solution".into(),
        );
    }
    let u0 = -eval1(c0, &v0) / c1v;
    m.insert(other.clone(), v0);
    m.insert(main.clone(), u0);
    SolveOutcome::Solution(m)
}

fn solve_by_resultant(conds: &[Poly], u: &JetVar, v: &JetVar, depth: u32) -> SolveOutcome {
    // Prefer eliminating the variable that appears in at least two
    // conditions; fall back to the symmetric choice.
    for (main, other) in [(u, v), (v, u)] {
        let with_main: Vec<usize> = (0..conds.len())
            .filter(|&i| conds[i].degree_in(main) >= 1)
            .collect();
        if with_main.len() >= 2 {
            return resultant_elimination(conds, with_main[0], with_main[1], main, other, depth);
        }
    }
    // Each variable appears in exactly one condition. With two variables
    // total there are at most two conditions, each univariate — but then the
    // variable count per condition would be one and we would not be here —
    // or a single genuinely bivariate condition, nonlinear in both.
    single_condition_probe(conds, u, v, depth)
}

fn resultant_elimination(
    conds: &[Poly],
    ci: usize,
    di: usize,
    main: &JetVar,
    other: &JetVar,
    depth: u32,
) -> SolveOutcome {
    let c = &conds[ci];
    let d = &conds[di];
    let r = match resultant(c, d, main) {
        Some(r) => r,
        None => return SolveOutcome::Undecided("resultant computation overflowed".into()),
    };
    if r.is_zero() {
        // C and D share a nonconstant factor g. Branch: g = 0 with the other
        // conditions, or both cofactors vanish.
        let g = poly_gcd(c, d);
        if g.as_constant().is_some() {
            return SolveOutcome::Undecided(
                "vanishing resultant without a visible common factor".into(),
            );
        }
        let mut b1: Vec<Poly> = Vec::new();
        for (k, p) in conds.iter().enumerate() {
            if k != ci && k != di {
                b1.push(p.clone());
            }
        }
        b1.push(g.clone());
        let out1 = solve_rec(&b1, depth - 1);
        if matches!(out1, SolveOutcome::Solution(_)) {
            return out1;
        }
        let (qc, qd) = match (c.div_exact(&g), d.div_exact(&g)) {
            (Some(a), Some(b)) => (a, b),
            _ => return SolveOutcome::Undecided("common factor does not divide exactly".into()),
        };
        let mut b2 = conds.to_vec();
        b2[ci] = qc;
        b2[di] = qd;
        let out2 = solve_rec(&b2, depth - 1);
        return combine(vec![out1, out2]);
    }
    if r.as_constant().is_some() {
        // Nonzero constant resultant: C and D have no common zero at all
        // (including over the complex numbers), hence no common real zero.
        return SolveOutcome::NoSolution;
    }
    // r is univariate in `other`; every common zero of the system projects
    // to a zero of r.
    let ru = match poly_to_uni(&r, other) {
        Some(p) => p,
        None => {
            return SolveOutcome::Undecided("resultant depends on an unexpected variable".into())
        }
    };
    let sf = uni_square_free(&ru);
    let chain = sturm_chain(&sf);
    let total = count_real_roots(&chain, None, None);
    if total <= 0 {
        return SolveOutcome::NoSolution;
    }
    let (roots, complete) = rational_roots(&sf, total);
    let mut outcomes: Vec<SolveOutcome> = Vec::new();
    for v0 in &roots {
        let subbed: Vec<Poly> = conds.iter().map(|p| specialize(p, other, v0)).collect();
        match solve_rec(&subbed, depth - 1) {
            SolveOutcome::Solution(mut m) => {
                m.insert(other.clone(), v0.clone());
                return SolveOutcome::Solution(m);
            }
            o => outcomes.push(o),
        }
    }
    if !complete {
        outcomes.push(SolveOutcome::Undecided(
            "projection has real zeros outside the rational candidate list".into(),
        ));
    }
    combine(outcomes)
}

/// Last resort: a single condition, nonlinear in both variables (or a
/// configuration where each variable appears in exactly one condition).
/// Probe a few rational values for one variable; never claims `NoSolution`.
fn single_condition_probe(conds: &[Poly], u: &JetVar, v: &JetVar, depth: u32) -> SolveOutcome {
    for v0 in root_candidates() {
        let subbed: Vec<Poly> = conds.iter().map(|p| specialize(p, v, &v0)).collect();
        if let SolveOutcome::Solution(mut m) = solve_rec(&subbed, depth - 1) {
            m.insert(v.clone(), v0);
            return SolveOutcome::Solution(m);
        }
    }
    for u0 in root_candidates() {
        let subbed: Vec<Poly> = conds.iter().map(|p| specialize(p, u, &u0)).collect();
        if let SolveOutcome::Solution(mut m) = solve_rec(&subbed, depth - 1) {
            m.insert(u.clone(), u0);
            return SolveOutcome::Solution(m);
        }
    }
    SolveOutcome::Undecided("no exact elimination path applies to this condition set".into())
}

// ---------------------------------------------------------------------------
// Polynomial helpers over the shared multivariate representation
// ---------------------------------------------------------------------------

/// Substitute an exact rational value for one variable.
pub(crate) fn specialize(p: &Poly, v: &JetVar, val: &BigRational) -> Poly {
    if p.degree_in(v) == 0 {
        return p.clone();
    }
    let coeffs = p.coeffs_in(v);
    let mut acc = Poly::zero();
    let mut power = BigRational::one();
    for c in coeffs {
        acc = acc.add(&c.scale(&power));
        power *= val;
    }
    acc
}

/// Sylvester resultant of `c` and `d` with respect to `main`, computed by
/// fraction-free (Bareiss) elimination over the polynomial ring in the
/// remaining variable. `None` if a pivot division fails (never expected; kept
/// as a conservative guard).
fn resultant(c: &Poly, d: &Poly, main: &JetVar) -> Option<Poly> {
    let cc = c.coeffs_in(main);
    let dd = d.coeffs_in(main);
    let m = cc.len() - 1;
    let n = dd.len() - 1;
    debug_assert!(m >= 1 && n >= 1);
    let size = m + n;
    let mut mat = vec![vec![Poly::zero(); size]; size];
    for i in 0..n {
        for j in 0..=m {
            mat[i][i + j] = cc[m - j].clone();
        }
    }
    for i in 0..m {
        for j in 0..=n {
            mat[n + i][i + j] = dd[n - j].clone();
        }
    }
    det_bareiss(mat)
}

/// Determinant of a square polynomial matrix by Bareiss' fraction-free
/// algorithm with row pivoting.
fn det_bareiss(mut m: Vec<Vec<Poly>>) -> Option<Poly> {
    let n = m.len();
    if n == 0 {
        return Some(Poly::one());
    }
    let mut negate = false;
    let mut prev = Poly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Some(Poly::zero());
            };
            m.swap(k, r);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = t.div_exact(&prev)?;
            }
            m[i][k] = Poly::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Some(if negate { det.neg() } else { det })
}

// ---------------------------------------------------------------------------
// Univariate polynomials with rational coefficients (dense, ascending)
// ---------------------------------------------------------------------------

/// Dense univariate polynomial, coefficients ascending by degree, trimmed.
pub(crate) type UPoly = Vec<BigRational>;

pub(crate) fn utrim(mut p: UPoly) -> UPoly {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

pub(crate) fn udeg(p: &UPoly) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

pub(crate) fn ueval(p: &UPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn uderiv(p: &UPoly) -> UPoly {
    if p.len() <= 1 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(p.len() - 1);
    for (i, c) in p.iter().enumerate().skip(1) {
        out.push(c * BigRational::from(BigInt::from(i as i64)));
    }
    utrim(out)
}

/// Remainder of `a` divided by `b` (`b` nonempty).
fn urem(a: &UPoly, b: &UPoly) -> UPoly {
    let db = udeg(b).expect("divisor must be nonzero");
    let lead_b = &b[db];
    let mut r = a.clone();
    while let Some(dr) = udeg(&r) {
        if dr < db {
            break;
        }
        let q = &r[dr] / lead_b;
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate() {
            let idx = i + shift;
            let t = bc * &q;
            r[idx] -= t;
        }
        r = utrim(r);
    }
    r
}

/// Scale to integer coefficients with content 1, preserving sign.
fn uprimitive(p: UPoly) -> UPoly {
    if p.is_empty() {
        return p;
    }
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for c in &p {
        num_gcd = num::integer::gcd(num_gcd, c.numer().abs());
        den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
    }
    if num_gcd.is_zero() {
        return p;
    }
    let scale = BigRational::new(den_lcm, num_gcd);
    p.into_iter().map(|c| c * &scale).collect()
}

/// Polynomial gcd (primitive normalization).
fn ugcd(a: &UPoly, b: &UPoly) -> UPoly {
    let mut g = uprimitive(utrim(a.clone()));
    let mut h = uprimitive(utrim(b.clone()));
    while !h.is_empty() {
        let r = uprimitive(urem(&g, &h));
        g = h;
        h = r;
    }
    g
}

/// Exact quotient `a / b`; panics if the division is not exact.
fn udiv_exact(a: &UPoly, b: &UPoly) -> UPoly {
    let db = udeg(b).expect("divisor must be nonzero");
    let lead_b = &b[db];
    let mut r = a.clone();
    let da = match udeg(&r) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if da < db {
        assert!(r.is_empty(), "division must be exact");
        return Vec::new();
    }
    let mut q = vec![BigRational::zero(); da - db + 1];
    while let Some(dr) = udeg(&r) {
        if dr < db {
            break;
        }
        let coef = &r[dr] / lead_b;
        let shift = dr - db;
        q[shift] = coef.clone();
        for (i, bc) in b.iter().enumerate() {
            let t = bc * &coef;
            r[i + shift] -= t;
        }
        r = utrim(r);
    }
    assert!(r.is_empty(), "division must be exact");
    utrim(q)
}

/// Square-free part `p / gcd(p, p')`, primitive.
pub(crate) fn uni_square_free(p: &UPoly) -> UPoly {
    let pt = utrim(p.clone());
    if udeg(&pt).map(|d| d < 1).unwrap_or(true) {
        return pt;
    }
    let g = ugcd(&pt, &uderiv(&pt));
    if udeg(&g).map(|d| d == 0).unwrap_or(true) {
        return uprimitive(pt);
    }
    uprimitive(udiv_exact(&pt, &g))
}

/// Convert a multivariate polynomial that mentions only `v` into dense
/// univariate form. `None` if any other variable appears.
pub(crate) fn poly_to_uni(p: &Poly, v: &JetVar) -> Option<UPoly> {
    for var in p.vars() {
        if &var != v {
            return None;
        }
    }
    let coeffs = p.coeffs_in(v);
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        match c.as_constant() {
            Some(val) => out.push(val.clone()),
            None => {
                if c.is_zero() {
                    out.push(BigRational::zero());
                } else {
                    return None;
                }
            }
        }
    }
    Some(utrim(out))
}

// ---------------------------------------------------------------------------
// Sturm chains and real-root counting
// ---------------------------------------------------------------------------

/// Sturm chain of a (square-free) polynomial, primitive-normalized.
pub(crate) fn sturm_chain(p: &UPoly) -> Vec<UPoly> {
    let p0 = uprimitive(utrim(p.clone()));
    if p0.is_empty() {
        return vec![];
    }
    let mut chain = vec![p0.clone()];
    let p1 = uderiv(&p0);
    if p1.is_empty() {
        return chain;
    }
    chain.push(uprimitive(p1));
    loop {
        let k = chain.len();
        let r = urem(&chain[k - 2], &chain[k - 1]);
        if r.is_empty() {
            break;
        }
        let neg: UPoly = uprimitive(r).into_iter().map(|c| -c).collect();
        chain.push(neg);
    }
    chain
}

fn sign_of(q: &BigRational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// Sign of `p` at a point or at a signed infinity (`None` bounds).
fn sign_at(p: &UPoly, bound: Option<&BigRational>, positive_inf: bool) -> i8 {
    match bound {
        Some(x) => sign_of(&ueval(p, x)),
        None => {
            let d = match udeg(p) {
                Some(d) => d,
                None => return 0,
            };
            let lead = sign_of(&p[d]);
            if positive_inf || d % 2 == 0 {
                lead
            } else {
                -lead
            }
        }
    }
}

fn variations(chain: &[UPoly], bound: Option<&BigRational>, positive_inf: bool) -> u32 {
    let mut count = 0;
    let mut prev: i8 = 0;
    for p in chain {
        let s = sign_at(p, bound, positive_inf);
        if s == 0 {
            continue;
        }
        if prev != 0 && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Number of distinct real roots of the chain's polynomial in the interval
/// `(lo, hi]`, where `None` stands for the corresponding infinity.
pub(crate) fn count_real_roots(
    chain: &[UPoly],
    lo: Option<&BigRational>,
    hi: Option<&BigRational>,
) -> i64 {
    if chain.is_empty() {
        return 0;
    }
    let va = variations(chain, lo, false);
    let vb = variations(chain, hi, true);
    va as i64 - vb as i64
}

/// Cauchy root bound: all real roots lie in `[-bound, bound]`.
pub(crate) fn cauchy_bound(p: &UPoly) -> BigRational {
    let d = udeg(p).expect("nonzero polynomial");
    let lead = p[d].abs();
    let mut max_ratio = BigRational::zero();
    for c in &p[..d] {
        let r = c.abs() / &lead;
        if r > max_ratio {
            max_ratio = r;
        }
    }
    max_ratio + BigRational::one()
}

/// Smallest root of `p` in `(0, +inf)`, isolated by Sturm bisection to within
/// `tol`. Returns the inner bound: a value `lo` with no root in `(0, lo]` and
/// the smallest positive root in `(lo, lo + tol]`. `None` when no positive
/// real root exists.
pub(crate) fn smallest_positive_root(p: &UPoly, tol: f64) -> Option<f64> {
    use num::ToPrimitive;
    let sf = uni_square_free(p);
    if udeg(&sf).map(|d| d < 1).unwrap_or(true) {
        return None;
    }
    let chain = sturm_chain(&sf);
    let zero = BigRational::zero();
    let mut hi = cauchy_bound(&sf);
    if count_real_roots(&chain, Some(&zero), Some(&hi)) <= 0 {
        return None;
    }
    let mut lo = zero;
    let two = BigRational::from(BigInt::from(2));
    loop {
        let width = (&hi - &lo).to_f64().unwrap_or(f64::INFINITY);
        if width <= tol {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if count_real_roots(&chain, Some(&lo), Some(&mid)) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo.to_f64()
}

/// Largest root of `p` in `(-inf, 0)`; mirror of `smallest_positive_root`
/// (returns the inner bound, i.e. a value with no root between it and 0).
pub(crate) fn largest_negative_root(p: &UPoly, tol: f64) -> Option<f64> {
    let reflected: UPoly = p
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
        .collect();
    smallest_positive_root(&utrim(reflected), tol).map(|r| -r)
}
