//! Fracterm flattening: every term is provably equal to one fraction `p/q`
//! with `p`, `q` free of `⊥` and division.
//!
//! The transformation works bottom-up. Subterms that are already ring terms
//! become `t/1`, `⊥` becomes `1/0`, and flat fractions are combined with the
//! negation, product, sum and nested-division axioms. Each step is recorded
//! against the whole term, so the trace replays from the input.

use thiserror::Error;

use crate::normalize::rewrite::{rewrite_at, RewriteTrace, Rule, Substitution};
use crate::normalize::{annex_term, reduce_wcr, QuasiPoly};
use crate::polyalg::poly_to_sumterm;
use crate::terms::{SignatureTag, Term};

/// `num / den` with both components ring terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlatFracterm {
    pub num: Term,
    pub den: Term,
}

impl FlatFracterm {
    pub fn to_term(&self) -> Term {
        Term::div(self.num.clone(), self.den.clone())
    }

    pub fn is_flat(&self) -> bool {
        self.num.is_pure(SignatureTag::Ring) && self.den.is_pure(SignatureTag::Ring)
    }
}

impl std::fmt::Display for FlatFracterm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let part = |t: &Term| {
            if t.is_leaf() {
                t.to_string()
            } else {
                format!("({t})")
            }
        };
        write!(f, "{} / {}", part(&self.num), part(&self.den))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("denominator reduces to bot; the whole fracterm is bot")]
    BottomDenominator,
    #[error("denominator contains division")]
    NotFlat,
}

struct Flattener {
    term: Term,
    trace: RewriteTrace,
}

impl Flattener {
    fn step(&mut self, axiom: u8, pos: &[usize]) {
        let (next, step) = rewrite_at(&self.term, &Rule::forward(axiom), pos, &Substitution::new())
            .unwrap_or_else(|| panic!("axiom {axiom} applies at {pos:?} in {}", self.term));
        self.term = next;
        self.trace.steps.push(step);
    }

    /// Rewrite the subterm at `pos` into a flat fracterm.
    fn run(&mut self, pos: &mut Vec<usize>) {
        let sub = self.term.at(pos).expect("valid position").clone();
        if sub.is_pure(SignatureTag::Ring) {
            self.step(12, pos);
            return;
        }
        match &sub {
            Term::Bot => self.step(18, pos),
            Term::Div(a, b) if a.is_pure(SignatureTag::Ring) && b.is_pure(SignatureTag::Ring) => {}
            Term::Neg(_) => {
                self.children(pos, 1);
                self.step(13, pos);
            }
            Term::Mul(..) => {
                self.children(pos, 2);
                self.step(14, pos);
            }
            Term::Add(..) => {
                self.children(pos, 2);
                self.step(15, pos);
            }
            Term::Div(..) => {
                self.children(pos, 2);
                // (x/y)/(u/v) = (x/y) * ((v*v)/(u*v)) = (x*(v*v)) / (y*(u*v))
                self.step(16, pos);
                self.step(14, pos);
            }
            Term::Zero | Term::One | Term::Num(_) | Term::Var(_) => unreachable!("ring-pure leaves handled above"),
        }
    }

    fn children(&mut self, pos: &mut Vec<usize>, n: usize) {
        for i in 0..n {
            pos.push(i);
            self.run(pos);
            pos.pop();
        }
    }
}

/// Flatten `t` into a single fraction of ring terms, with the axiom trace.
pub fn flatten(t: &Term) -> (FlatFracterm, RewriteTrace) {
    let mut f = Flattener {
        term: t.clone(),
        trace: RewriteTrace::default(),
    };
    f.run(&mut Vec::new());
    match f.term {
        Term::Div(num, den) => (FlatFracterm { num: *num, den: *den }, f.trace),
        other => unreachable!("flattening yields a fraction, got {other}"),
    }
}

/// Move the annex of the denominator into the numerator:
/// `x/(y + 0*z) = (x + 0*z)/y`.
///
/// The denominator is replaced by its polynomial sumterm. A denominator
/// without annex leaves the fracterm unchanged.
pub fn denominator_annex_shift(f: &FlatFracterm) -> Result<FlatFracterm, FlattenError> {
    match reduce_wcr(&f.den).map_err(|_| FlattenError::NotFlat)? {
        QuasiPoly::Bottom => Err(FlattenError::BottomDenominator),
        QuasiPoly::Sum { poly, annex } => Ok(match annex_term(&annex) {
            None => f.clone(),
            Some(tail) => FlatFracterm {
                num: Term::add(f.num.clone(), tail),
                den: poly_to_sumterm(&poly),
            },
        }),
    }
}
