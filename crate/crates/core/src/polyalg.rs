//! Exact multivariate polynomials over `ℚ`.
//!
//! Polynomials are sparse maps from monomials to nonzero rational
//! coefficients, ordered graded-lexicographically with variables compared
//! by name. The gcd is the recursive primitive PRS algorithm with the last
//! variable (by name) as main variable; squarefree parts and zero-set
//! comparison are built on it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::terms::{numeral_of, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("term is not a ring term (contains bot or division): {0}")]
    NotRingPure(String),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
}

/// A power product: `(variable, exponent)` pairs sorted by name, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(x: &str) -> Monomial {
        Monomial(vec![(x.to_string(), 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (String, u32)>) -> Monomial {
        let mut map: BTreeMap<String, u32> = BTreeMap::new();
        for (x, e) in powers {
            *map.entry(x).or_default() += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, x: &str) -> u32 {
        self.0
            .binary_search_by(|(v, _)| v.as_str().cmp(x))
            .map_or(0, |i| self.0[i].1)
    }

    fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            match (self.0.get(i), o.0.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    out.push((a.0.clone(), a.1 + b.1));
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    out.push(a.clone());
                    i += 1;
                }
                (Some(a), None) => {
                    out.push(a.clone());
                    i += 1;
                }
                (_, Some(b)) => {
                    out.push(b.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial(out)
    }

    fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().all(|(x, e)| o.degree_in(x) >= *e)
    }

    /// `self / o`, assuming `o` divides `self`.
    fn div(&self, o: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(x, e)| {
                    let r = e - o.degree_in(x);
                    (r > 0).then(|| (x.clone(), r))
                })
                .collect(),
        )
    }

    fn without(&self, x: &str) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| v != x).cloned().collect())
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// earliest variable where the two differ (larger exponent is larger).
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.0.get(i), o.0.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(a), Some(b)) => match a.0.cmp(&b.0) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => match a.1.cmp(&b.1) {
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                            ord => return ord,
                        },
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(x, e)| if *e == 1 { x.clone() } else { format!("{x}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// A polynomial in `ℚ[X]`; no stored coefficient is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        Poly::monomial(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(x: &str) -> Poly {
        Poly::monomial(Monomial::var(x), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    /// Build from terms, merging equal monomials and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(BigRational::zero))
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(x, _)| x.clone()))
            .collect()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, x: &str) -> u32 {
        self.terms.keys().map(|m| m.degree_in(x)).max().unwrap_or(0)
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, c: &BigRational) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, x: &str) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.degree_in(x);
            (e > 0).then(|| {
                let rest = m.without(x);
                let m = if e > 1 {
                    rest.mul(&Monomial(vec![(x.to_string(), e - 1)]))
                } else {
                    rest
                };
                (m, c * BigRational::from_integer(e.into()))
            })
        }))
    }

    /// Evaluate at a rational point; missing variables are an error.
    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in &m.0 {
                t *= num_traits::pow(point.get(x)?.clone(), *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// `self / d` if `d` divides `self` exactly in `ℚ[X]`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading_term()?;
        let mut quotient = Poly::zero();
        let mut rest = self.clone();
        while let Some((rm, rc)) = rest.leading_term() {
            if !dm.divides(rm) {
                return None;
            }
            let m = rm.div(dm);
            let c = rc / dc;
            rest = &rest - &d.mul_term(&m, &c);
            quotient.add_term(m, c);
        }
        Some(quotient)
    }

    /// Coefficients as a polynomial in `x`, indexed by degree.
    pub fn coefficients_in(&self, x: &str) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(x) as usize + 1];
        for (m, c) in &self.terms {
            out[m.degree_in(x) as usize].add_term(m.without(x), c.clone());
        }
        out
    }

    pub fn from_coefficients_in(x: &str, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let shift = if e == 0 {
                Monomial::one()
            } else {
                Monomial(vec![(x.to_string(), e as u32)])
            };
            for (m, a) in &c.terms {
                out.add_term(m.mul(&shift), a.clone());
            }
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &o.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, mag) = (c.is_negative(), c.abs());
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Translations between ring terms and polynomials
// ---------------------------------------------------------------------------

/// Expand a ring term (no `⊥`, no `/`) into its polynomial.
pub fn term_to_poly(t: &Term) -> Result<Poly, PolyError> {
    Ok(match t {
        Term::Zero => Poly::zero(),
        Term::One => Poly::one(),
        Term::Num(n) => Poly::constant(BigRational::from_integer(BigInt::from(n.clone()))),
        Term::Var(x) => Poly::var(x),
        Term::Add(a, b) => &term_to_poly(a)? + &term_to_poly(b)?,
        Term::Neg(a) => -&term_to_poly(a)?,
        Term::Mul(a, b) => &term_to_poly(a)? * &term_to_poly(b)?,
        Term::Bot | Term::Div(..) => return Err(PolyError::NotRingPure(t.to_string())),
    })
}

/// Pure monomial as a left-nested product of variables, powers unfolded.
pub fn monomial_term(m: &Monomial) -> Term {
    let mut factors =
        m.0.iter()
            .flat_map(|(x, e)| std::iter::repeat_n(x.as_str(), *e as usize))
            .map(Term::var);
    let first = factors.next().unwrap_or(Term::One);
    factors.fold(first, Term::mul)
}

/// Polynomial sumterm: monomials in decreasing order, each `c * m` with the
/// coefficient numeral omitted when it is `1`.
pub fn poly_to_sumterm(p: &Poly) -> Term {
    let mut summands = p.terms.iter().rev().map(|(m, c)| {
        if m.is_one() {
            numeral_of(c)
        } else if c.is_one() {
            monomial_term(m)
        } else {
            Term::mul(numeral_of(c), monomial_term(m))
        }
    });
    let first = summands.next().unwrap_or(Term::Zero);
    summands.fold(first, Term::add)
}

// ---------------------------------------------------------------------------
// Content, gcd, squarefree parts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `sign * content * primitive` reconstructs the polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentSplit {
    /// positive rational
    pub content: BigRational,
    pub sign: Sign,
    /// integer coefficients with gcd 1 and positive leading coefficient
    pub primitive: Poly,
}

impl ContentSplit {
    pub fn reconstruct(&self) -> Poly {
        let c = match self.sign {
            Sign::Plus => self.content.clone(),
            Sign::Minus => -self.content.clone(),
        };
        self.primitive.scale(&c)
    }
}

/// Split off the rational content and sign (Gauss's lemma).
pub fn content_primitive(p: &Poly) -> Result<ContentSplit, PolyError> {
    let (_, lead) = p.leading_term().ok_or(PolyError::ZeroPolynomial)?;
    let denom_lcm = p.terms.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let numer_gcd = p.terms.values().fold(BigInt::zero(), |acc, c| {
        acc.gcd(&(c.numer() * (&denom_lcm / c.denom())))
    });
    let content = BigRational::new(numer_gcd, denom_lcm);
    let sign = if lead.is_negative() { Sign::Minus } else { Sign::Plus };
    let unit = match sign {
        Sign::Plus => content.clone(),
        Sign::Minus => -content.clone(),
    };
    let primitive = p.scale(&unit.recip());
    Ok(ContentSplit {
        content,
        sign,
        primitive,
    })
}

/// Integer-primitive associate with positive leading coefficient; zero stays zero.
pub fn normalized(p: &Poly) -> Poly {
    content_primitive(p).map_or_else(|_| Poly::zero(), |s| s.primitive)
}

/// Greatest common divisor in `ℚ[X]`, normalized (see [`normalized`]).
pub fn gcd(a: &Poly, b: &Poly) -> Result<Poly, PolyError> {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => Err(PolyError::ZeroPolynomial),
        (true, false) => Ok(normalized(b)),
        (false, true) => Ok(normalized(a)),
        (false, false) => Ok(gcd_nonzero(a, b)),
    }
}

fn gcd_nonzero(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    // A common factor only involves shared variables.
    let (va, vb) = (a.vars(), b.vars());
    if let Some(x) = va.difference(&vb).next() {
        return gcd_nonzero(&content_in(a, x), b);
    }
    if let Some(x) = vb.difference(&va).next() {
        return gcd_nonzero(a, &content_in(b, x));
    }
    let main = va
        .iter()
        .min_by_key(|x| (a.degree_in(x).max(b.degree_in(x)), a.degree_in(x).min(b.degree_in(x))))
        .expect("nonconstant polynomials have variables")
        .clone();
    if certify_coprime(a, b) {
        return Poly::one();
    }
    let (na, nb) = (normalized(a), normalized(b));
    if let Some(g) = heuristic_gcd(&na, &nb) {
        let (fa, fb) = (na.div_exact(&g), nb.div_exact(&g));
        if let (Some(fa), Some(fb)) = (fa, fb) {
            if certify_coprime(&fa, &fb) {
                return normalized(&g);
            }
        }
    }
    let (ca, cb) = (content_in(a, &main), content_in(b, &main));
    let g = gcd_nonzero(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    if coprime_image(&pa, &pb, &main) {
        return normalized(&g);
    }
    let h = subresultant_gcd(pa, pb, &main);
    normalized(&(&g * &h))
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `x`.
fn content_in(p: &Poly, x: &str) -> Poly {
    let mut coeffs = p.coefficients_in(x).into_iter().filter(|c| !c.is_zero());
    let mut g = normalized(&coeffs.next().expect("nonzero polynomial"));
    for c in coeffs {
        if g.is_constant() {
            break;
        }
        g = gcd_nonzero(&g, &c);
    }
    g
}

fn primitive_in(p: &Poly, x: &str) -> Poly {
    normalized(&p.div_exact(&content_in(p, x)).expect("content divides"))
}

/// Substitute `point` for every variable except `x`.
fn specialize(p: &Poly, x: &str, point: &BTreeMap<String, BigRational>) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let mut coeff = c.clone();
        for (y, e) in &m.0 {
            if y != x {
                coeff *= num_traits::pow(point[y].clone(), *e as usize);
            }
        }
        out.add_term(Monomial::from_powers([(x.to_string(), m.degree_in(x))]), coeff);
    }
    out
}

/// Cheap proof that `a` and `b` have no common nonconstant factor.
fn certify_coprime(a: &Poly, b: &Poly) -> bool {
    let (va, vb) = (a.vars(), b.vars());
    va.intersection(&vb).all(|x| {
        if va.len() == 1 && vb.len() == 1 {
            subresultant_gcd(a.clone(), b.clone(), x).degree_in(x) == 0
        } else {
            coprime_image(a, b, x)
        }
    })
}

fn integer_content(p: &Poly) -> BigInt {
    p.terms.values().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.values().map(|c| c.numer().abs()).max().unwrap_or_default()
}

/// `p` with the integer `v` substituted for `x`.
fn substitute_value(p: &Poly, x: &str, v: &BigInt) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let e = m.degree_in(x) as usize;
        out.add_term(
            m.without(x),
            c * BigRational::from_integer(num_traits::pow(v.clone(), e)),
        );
    }
    out
}

/// Rebuild a polynomial in `x` from its value at `x = xi`, reading each
/// integer coefficient as symmetric base-`xi` digits.
fn xi_adic_interpolate(h: &Poly, xi: &BigInt, x: &str) -> Poly {
    let half = xi / 2;
    let mut out = Poly::zero();
    for (m, c) in &h.terms {
        let mut v = c.numer().clone();
        let mut i = 0u32;
        while !v.is_zero() {
            let mut d = v.mod_floor(xi);
            if d > half {
                d -= xi;
            }
            let shifted = if i == 0 {
                m.clone()
            } else {
                m.mul(&Monomial::from_powers([(x.to_string(), i)]))
            };
            out.add_term(shifted, BigRational::from_integer(d.clone()));
            v = (v - d) / xi;
            i += 1;
        }
    }
    out
}

/// Heuristic gcd in `ℤ[X]` (evaluate at a large integer, recurse, interpolate).
/// A returned polynomial divides both inputs; `None` means the heuristic gave up.
fn heuristic_gcd(f: &Poly, g: &Poly) -> Option<Poly> {
    if f.is_zero() || g.is_zero() {
        return None;
    }
    let (cf, cg) = (integer_content(f), integer_content(g));
    let c = BigRational::from_integer(cf.gcd(&cg));
    if f.is_constant() || g.is_constant() {
        return Some(Poly::constant(c));
    }
    let f = f.scale(&BigRational::from_integer(cf).recip());
    let g = g.scale(&BigRational::from_integer(cg).recip());
    let x = f.vars().into_iter().chain(g.vars()).max().expect("nonconstant");
    let mut xi = max_norm(&f).min(max_norm(&g)) * 2 + 29;
    for _ in 0..6 {
        let (fx, gx) = (substitute_value(&f, &x, &xi), substitute_value(&g, &x, &xi));
        if let Some(h) = heuristic_gcd(&fx, &gx) {
            let candidate = xi_adic_interpolate(&h, &xi, &x);
            if !candidate.is_zero() {
                let content = BigRational::from_integer(integer_content(&candidate));
                let candidate = candidate.scale(&content.recip());
                if divides(&candidate, &f) && divides(&candidate, &g) {
                    return Some(candidate.scale(&c));
                }
            }
        }
        xi = xi * 73794 / 27011;
    }
    None
}

/// Cheap proof that `gcd(a, b)` has degree 0 in `x`.
///
/// If the leading coefficients in `x` do not vanish at a point, every common
/// factor keeps its `x`-degree there, so a constant univariate gcd of the
/// images bounds the true degree by 0. A `false` answer proves nothing.
fn coprime_image(a: &Poly, b: &Poly, x: &str) -> bool {
    let others: BTreeSet<String> = a.vars().into_iter().chain(b.vars()).filter(|y| y != x).collect();
    if others.is_empty() {
        return false;
    }
    let lead = |p: &Poly| p.coefficients_in(x).pop().expect("nonzero polynomial");
    let (la, lb) = (lead(a), lead(b));
    for attempt in 0..3i64 {
        let point: BTreeMap<String, BigRational> = others
            .iter()
            .enumerate()
            .map(|(i, y)| {
                (
                    y.clone(),
                    BigRational::from_integer(BigInt::from(3 + 7 * i as i64 + 11 * attempt)),
                )
            })
            .collect();
        let nonzero = |p: &Poly| p.eval(&point).is_some_and(|v| !v.is_zero());
        if !(nonzero(&la) && nonzero(&lb)) {
            continue;
        }
        let (ua, ub) = (specialize(a, x, &point), specialize(b, x, &point));
        return subresultant_gcd(ua, ub, x).degree_in(x) == 0;
    }
    false
}

/// Subresultant remainder sequence in `x` for inputs primitive in `x`;
/// returns the primitive part of the last nonzero remainder.
fn subresultant_gcd(a: Poly, b: Poly, x: &str) -> Poly {
    let (mut r0, mut r1) = if a.degree_in(x) >= b.degree_in(x) {
        (a, b)
    } else {
        (b, a)
    };
    let lead = |p: &Poly| p.coefficients_in(x).pop().expect("nonzero polynomial");
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        let delta = r0.degree_in(x) - r1.degree_in(x);
        let r = pseudo_remainder(&r0, &r1, x);
        if r.is_zero() {
            return primitive_in(&r1, x);
        }
        if r.degree_in(x) == 0 {
            return Poly::one();
        }
        let divisor = &g * &h.pow(delta);
        r0 = r1;
        r1 = r.div_exact(&divisor).expect("subresultant division is exact");
        g = lead(&r0);
        h = match delta {
            0 => h,
            1 => g.clone(),
            _ => g
                .pow(delta)
                .div_exact(&h.pow(delta - 1))
                .expect("subresultant division is exact"),
        };
    }
}

/// Pseudo-remainder of `a` by `b` with respect to `x`:
/// `lc(b)^(deg a - deg b + 1) * a mod b`.
pub fn pseudo_remainder(a: &Poly, b: &Poly, x: &str) -> Poly {
    let bc = b.coefficients_in(x);
    let n = bc.len() - 1;
    let lead = &bc[n];
    let mut r = a.coefficients_in(x);
    let Some(mut pending) = (r.len()).checked_sub(n) else {
        return a.clone();
    };
    while r.len() > n && !(r.len() == 1 && r[0].is_zero()) {
        let d = r.len() - 1;
        let top = r[d].clone();
        for c in r.iter_mut() {
            *c = &*c * lead;
        }
        pending -= 1;
        for (j, bj) in bc.iter().enumerate() {
            let k = d - n + j;
            r[k] = &r[k] - &(&top * bj);
        }
        debug_assert!(r[d].is_zero());
        while r.len() > 1 && r.last().is_some_and(Poly::is_zero) {
            r.pop();
        }
    }
    let rest = lead.pow(pending as u32);
    &Poly::from_coefficients_in(x, &r) * &rest
}

/// Product of the distinct irreducible factors, normalized:
/// `p / gcd(p, ∂p/∂x1, ..., ∂p/∂xn)`.
pub fn squarefree_part(p: &Poly) -> Result<Poly, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut g = p.clone();
    for x in p.vars() {
        let d = p.derivative(&x);
        if !d.is_zero() {
            g = gcd_nonzero(&g, &d);
        }
        if g.is_constant() {
            break;
        }
    }
    Ok(normalized(&p.div_exact(&g).expect("gcd divides")))
}

/// Whether two nonzero polynomials vanish at the same points of `ℚ̄ⁿ`,
/// decided as equality of normalized squarefree parts.
pub fn same_zero_set(a: &Poly, b: &Poly) -> Result<bool, PolyError> {
    Ok(squarefree_part(a)? == squarefree_part(b)?)
}

/// Exact check that `b` divides `a`.
pub fn divides(b: &Poly, a: &Poly) -> bool {
    !b.is_zero() && a.div_exact(b).is_some()
}

/// Distinct primes of a positive integer by trial division, up to `limit`.
/// The second component is the unfactored cofactor (1 when fully factored).
pub fn small_prime_factors(n: &BigUint, limit: u64) -> (Vec<u64>, BigUint) {
    let mut rest = n.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= limit && BigUint::from(d) * BigUint::from(d) <= rest {
        if (&rest % d).is_zero() {
            out.push(d);
            while (&rest % d).is_zero() {
                rest /= d;
            }
        }
        d += 1;
    }
    if rest > BigUint::one() && BigUint::from(limit) * BigUint::from(limit) >= rest {
        out.push(u64::try_from(&rest).expect("cofactor below limit squared"));
        rest = BigUint::one();
    }
    (out, rest)
}

/// Whether two positive integers are divisible by exactly the same primes.
/// Uses repeated gcds, so no factorization is needed.
pub fn same_prime_support(a: &BigUint, b: &BigUint) -> bool {
    fn support_within(mut a: BigUint, b: &BigUint) -> bool {
        loop {
            if a.is_one() {
                return true;
            }
            let g = a.gcd(b);
            if g.is_one() {
                return false;
            }
            a /= g;
        }
    }
    support_within(a.clone(), b) && support_within(b.clone(), a)
}
