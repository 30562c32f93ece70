//! Normal forms for terms without division.
//!
//! Every `Σ_{r,⊥}` term is provably equal either to `⊥` or to a
//! quasi-polynomial sumterm `s + 0·(x1·…·xk)`, where `s` is a polynomial
//! sumterm and the annex variables `x1 … xk` do not occur in `s`. Two
//! division-free terms are valid in all common meadows exactly when their
//! normal forms coincide.
//!
//! The reduction expands into [`Poly`] and tracks the annex separately: a
//! `⊥`-free term evaluates to `⊥` exactly when one of its variables does,
//! so the annex is the set of variables that cancelled out of the expansion.

pub mod rewrite;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::polyalg::{poly_to_sumterm, term_to_poly, Poly};
use crate::terms::Term;

pub use rewrite::{apply_trace, replay, AxiomSet, Direction, RewriteStep, RewriteTrace, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("term contains division: {0}")]
    ContainsDivision(String),
}

/// `⊥`, or a polynomial together with its zero-coefficient annex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QuasiPoly {
    Bottom,
    Sum {
        poly: Poly,
        /// disjoint from the variables of `poly`
        annex: BTreeSet<String>,
    },
}

impl QuasiPoly {
    /// Build a sum, dropping annex variables that already occur in `poly`.
    pub fn new(poly: Poly, annex: BTreeSet<String>) -> QuasiPoly {
        let present = poly.vars();
        let annex = annex.into_iter().filter(|x| !present.contains(x)).collect();
        QuasiPoly::Sum { poly, annex }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, QuasiPoly::Bottom)
    }

    /// All variables on which the value depends (polynomial part and annex).
    pub fn vars(&self) -> BTreeSet<String> {
        match self {
            QuasiPoly::Bottom => BTreeSet::new(),
            QuasiPoly::Sum { poly, annex } => {
                let mut v = poly.vars();
                v.extend(annex.iter().cloned());
                v
            }
        }
    }

    /// The quasi-polynomial sumterm: `s`, `0 * (x * y ...)` or `s + 0 * (x * y ...)`.
    pub fn to_term(&self) -> Term {
        match self {
            QuasiPoly::Bottom => Term::Bot,
            QuasiPoly::Sum { poly, annex } => {
                let sum = poly_to_sumterm(poly);
                match annex_term(annex) {
                    None => sum,
                    Some(tail) if poly.is_zero() => tail,
                    Some(tail) => Term::add(sum, tail),
                }
            }
        }
    }
}

/// `0 * (x1 * ... * xk)`, or `None` for an empty annex.
pub fn annex_term(annex: &BTreeSet<String>) -> Option<Term> {
    let mut vars = annex.iter().map(|x| Term::var(x.as_str()));
    let first = vars.next()?;
    Some(Term::mul(Term::Zero, vars.fold(first, Term::mul)))
}

impl fmt::Display for QuasiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Reduce a division-free term to `⊥` or its quasi-polynomial normal form.
pub fn reduce_wcr(t: &Term) -> Result<QuasiPoly, NormalizeError> {
    if t.contains_div() {
        return Err(NormalizeError::ContainsDivision(t.to_string()));
    }
    if t.contains_bot() {
        return Ok(QuasiPoly::Bottom);
    }
    let poly = term_to_poly(t).expect("ring-pure term expands");
    Ok(QuasiPoly::new(poly, t.free_vars()))
}

/// Provable equality of two division-free terms from the weak-commutative-ring axioms.
pub fn wcr_equal(t: &Term, r: &Term) -> Result<bool, NormalizeError> {
    Ok(reduce_wcr(t)? == reduce_wcr(r)?)
}
