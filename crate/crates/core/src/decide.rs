//! Decision procedure for the equations valid in all common meadows.
//!
//! Each side is flattened to `p/q`, both components are reduced to
//! quasi-polynomials, and the denominator annex is moved into the
//! numerator. The resulting canonical fracterms are compared by:
//!
//! * C0: both sides are `⊥` (valid), or exactly one is (invalid);
//! * C1: the two sides depend on the same variables;
//! * C2: the integer contents of the denominators have the same primes;
//! * C3: the primitive parts of the denominators have the same zero set
//!   over `ℚ̄` (equal squarefree parts);
//! * C4: `num₁ · den₂ = num₂ · den₁` in `ℚ[X]`.
//!
//! The equation is valid iff C0 holds or C1–C4 all hold. For an invalid
//! equation a countermodel is searched for in `Enl⊥(ℚ)` and small
//! `Enl⊥(F_p)`, and checked by evaluation before it is reported.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flatten::{denominator_annex_shift, flatten, FlattenError};
use crate::normalize::{reduce_wcr, QuasiPoly};
use crate::polyalg::{
    content_primitive, poly_to_sumterm, same_prime_support, same_zero_set, small_prime_factors, Poly,
};
use crate::semantics::{
    exhaustive_check, holds_at, sample_check, CarrierSpec, CheckOutcome, MeadowValue, Prime, Valuation,
    DEFAULT_EXHAUSTIVE_VARS,
};
use crate::terms::{Equation, Term};

/// One side of an equation in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CanonicalFracterm {
    BottomSide,
    /// `(num + 0·annex) / den` with `den` nonzero and annex-free.
    Fraction {
        num: Poly,
        annex: BTreeSet<String>,
        den: Poly,
    },
}

impl CanonicalFracterm {
    /// Every variable the side depends on.
    pub fn vars(&self) -> BTreeSet<String> {
        match self {
            CanonicalFracterm::BottomSide => BTreeSet::new(),
            CanonicalFracterm::Fraction { num, annex, den } => {
                let mut v = num.vars();
                v.extend(annex.iter().cloned());
                v.extend(den.vars());
                v
            }
        }
    }

    /// A term provably equal to the original side.
    pub fn to_term(&self) -> Term {
        match self {
            CanonicalFracterm::BottomSide => Term::Bot,
            CanonicalFracterm::Fraction { num, annex, den } => Term::div(
                QuasiPoly::new(num.clone(), annex.clone()).to_term(),
                poly_to_sumterm(den),
            ),
        }
    }
}

impl fmt::Display for CanonicalFracterm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalFracterm::BottomSide => f.write_str("bot"),
            CanonicalFracterm::Fraction { num, annex, den } => {
                write!(f, "({num}")?;
                if !annex.is_empty() {
                    let vars: Vec<&str> = annex.iter().map(String::as_str).collect();
                    write!(f, " + 0*{}", vars.join("*"))?;
                }
                write!(f, ") / ({den})")
            }
        }
    }
}

/// Flatten, normalize both components, and shift the denominator annex.
pub fn canonicalize(t: &Term) -> CanonicalFracterm {
    let (flat, _) = flatten(t);
    let shifted = match denominator_annex_shift(&flat) {
        Ok(f) => f,
        Err(FlattenError::BottomDenominator) => return CanonicalFracterm::BottomSide,
        Err(FlattenError::NotFlat) => unreachable!("flattened denominators are ring terms"),
    };
    let sum = |t: &Term| match reduce_wcr(t) {
        Ok(QuasiPoly::Sum { poly, annex }) => (poly, annex),
        other => unreachable!("ring term reduced to {other:?}"),
    };
    let (den, den_annex) = sum(&shifted.den);
    debug_assert!(den_annex.is_empty());
    if den.is_zero() {
        return CanonicalFracterm::BottomSide;
    }
    let (num, annex) = sum(&shifted.num);
    let mut used = num.vars();
    used.extend(den.vars());
    let annex = annex.into_iter().filter(|x| !used.contains(x)).collect();
    CanonicalFracterm::Fraction { num, annex, den }
}

/// The structural condition an invalid equation fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    BothNotBottom,
    VariableSets,
    ContentPrimeSupport,
    DenominatorZeroSet,
    CrossMultiplication,
}

impl Condition {
    pub fn tag(self) -> &'static str {
        match self {
            Condition::BothNotBottom => "both-not-bottom",
            Condition::VariableSets => "variable-sets",
            Condition::ContentPrimeSupport => "content-prime-support",
            Condition::DenominatorZeroSet => "denominator-zero-set",
            Condition::CrossMultiplication => "cross-multiplication",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One entry of the ledger backing a `Valid` verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    BothBottom,
    Passed { condition: Condition, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub carrier: CarrierSpec,
    pub valuation: Valuation,
}

impl Countermodel {
    /// Re-evaluate both sides and confirm they differ.
    pub fn refutes(&self, e: &Equation) -> bool {
        matches!(holds_at(e, &self.valuation, self.carrier), Ok(false))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid {
        reasons: Vec<Reason>,
    },
    Invalid {
        failed: Condition,
        detail: String,
        countermodel: Option<Countermodel>,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }

    pub fn failed_condition(&self) -> Option<Condition> {
        match self {
            Verdict::Valid { .. } => None,
            Verdict::Invalid { failed, .. } => Some(*failed),
        }
    }

    pub fn countermodel(&self) -> Option<&Countermodel> {
        match self {
            Verdict::Invalid { countermodel, .. } => countermodel.as_ref(),
            Verdict::Valid { .. } => None,
        }
    }

    /// `key=value` lines: `verdict`, `condition`, then the countermodel.
    pub fn machine_block(&self) -> String {
        let mut out = String::new();
        match self {
            Verdict::Valid { reasons } => {
                out.push_str("verdict=valid\n");
                let cond = if reasons.first() == Some(&Reason::BothBottom) {
                    "both-bottom"
                } else {
                    "all-passed"
                };
                out.push_str(&format!("condition={cond}\n"));
            }
            Verdict::Invalid {
                failed, countermodel, ..
            } => {
                out.push_str("verdict=invalid\n");
                out.push_str(&format!("condition={failed}\n"));
                if let Some(cm) = countermodel {
                    out.push_str(&format!("countermodel.carrier={}\n", cm.carrier));
                    for (x, v) in &cm.valuation {
                        out.push_str(&format!("countermodel.{x}={v}\n"));
                    }
                }
            }
        }
        out
    }
}

/// Limits for [`find_countermodel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest variable count for exhaustive search over `F_p`.
    pub max_vars: usize,
    pub primes: Vec<Prime>,
    /// Random completions per `⊥` pattern in the first phase.
    pub bot_completions: usize,
    pub rational_samples: usize,
    /// Random valuations per prime field when exhaustive search is out of bounds.
    pub prime_samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_vars: DEFAULT_EXHAUSTIVE_VARS,
            primes: [2, 3, 5].map(|p| Prime::new(p).expect("prime")).to_vec(),
            bot_completions: 8,
            rational_samples: 2000,
            prime_samples: 500,
            seed: 0,
        }
    }
}

fn small_rational(rng: &mut ChaCha8Rng) -> MeadowValue {
    MeadowValue::rational(rng.random_range(-9..=9), rng.random_range(1..=4))
}

/// Deterministic countermodel search. Phases, in order:
/// single and double `⊥` assignments over `ℚ`; exhaustive (or sampled)
/// valuations over each `F_p` in the budget; random rational valuations.
pub fn find_countermodel(e: &Equation, budget: &Budget) -> Option<Countermodel> {
    let vars: Vec<String> = e.free_vars().into_iter().collect();
    let verified = |carrier: CarrierSpec, valuation: Valuation| {
        let cm = Countermodel { carrier, valuation };
        cm.refutes(e).then_some(cm)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);

    let mut patterns: Vec<Vec<usize>> = (0..vars.len()).map(|i| vec![i]).collect();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            patterns.push(vec![i, j]);
        }
    }
    for pattern in &patterns {
        for _ in 0..budget.bot_completions {
            let valuation: Valuation = vars
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let v = if pattern.contains(&i) {
                        MeadowValue::Bot
                    } else {
                        small_rational(&mut rng)
                    };
                    (x.clone(), v)
                })
                .collect();
            if let Some(cm) = verified(CarrierSpec::Rationals, valuation) {
                return Some(cm);
            }
        }
    }

    let counter = |outcome: CheckOutcome, carrier: CarrierSpec| match outcome {
        CheckOutcome::CounterValuation(v) => verified(carrier, v),
        CheckOutcome::Valid => None,
    };
    for &p in &budget.primes {
        let carrier = CarrierSpec::PrimeField(p);
        let outcome = if vars.len() <= budget.max_vars {
            exhaustive_check(e, p, budget.max_vars).expect("within variable bound")
        } else {
            sample_check(e, carrier, budget.prime_samples, budget.seed ^ p.get())
        };
        if let Some(cm) = counter(outcome, carrier) {
            return Some(cm);
        }
    }
    counter(
        sample_check(e, CarrierSpec::Rationals, budget.rational_samples, budget.seed),
        CarrierSpec::Rationals,
    )
}

/// Decide with the default [`Budget`].
pub fn decide(e: &Equation) -> Verdict {
    decide_with(e, &Budget::default())
}

/// Largest prime added to the search when a content condition fails.
const WITNESS_PRIME_LIMIT: u64 = 1000;

pub fn decide_with(e: &Equation, budget: &Budget) -> Verdict {
    let (failed, detail, extra_primes) = match structural_check(e) {
        Ok(reasons) => return Verdict::Valid { reasons },
        Err(failure) => failure,
    };
    let mut budget = budget.clone();
    for p in extra_primes {
        if let Ok(p) = Prime::new(p) {
            if !budget.primes.contains(&p) {
                budget.primes.push(p);
            }
        }
    }
    Verdict::Invalid {
        failed,
        detail,
        countermodel: find_countermodel(e, &budget),
    }
}

type Failure = (Condition, String, Vec<u64>);

fn vars_string(v: &BTreeSet<String>) -> String {
    let v: Vec<&str> = v.iter().map(String::as_str).collect();
    format!("{{{}}}", v.join(", "))
}

fn integer_content(den: &Poly) -> BigUint {
    let c = content_primitive(den).expect("nonzero denominator").content;
    debug_assert!(c.is_integer(), "ring-term denominators have integer coefficients");
    c.to_integer().magnitude().clone()
}

fn structural_check(e: &Equation) -> Result<Vec<Reason>, Failure> {
    let (l, r) = (canonicalize(&e.lhs), canonicalize(&e.rhs));
    let (CanonicalFracterm::Fraction { num: n1, den: d1, .. }, CanonicalFracterm::Fraction { num: n2, den: d2, .. }) =
        (&l, &r)
    else {
        return match (&l, &r) {
            (CanonicalFracterm::BottomSide, CanonicalFracterm::BottomSide) => Ok(vec![Reason::BothBottom]),
            _ => Err((Condition::BothNotBottom, format!("lhs is {l}, rhs is {r}"), vec![])),
        };
    };
    let mut reasons = Vec::new();

    let (v1, v2) = (l.vars(), r.vars());
    if v1 != v2 {
        return Err((
            Condition::VariableSets,
            format!(
                "lhs variables {} differ from rhs variables {}",
                vars_string(&v1),
                vars_string(&v2)
            ),
            vec![],
        ));
    }
    reasons.push(Reason::Passed {
        condition: Condition::VariableSets,
        detail: format!("both sides depend on {}", vars_string(&v1)),
    });

    let (a, b) = (integer_content(d1), integer_content(d2));
    if !same_prime_support(&a, &b) {
        let (pa, _) = small_prime_factors(&a, WITNESS_PRIME_LIMIT);
        let (pb, _) = small_prime_factors(&b, WITNESS_PRIME_LIMIT);
        let witnesses = pa
            .iter()
            .filter(|p| !pb.contains(p))
            .chain(pb.iter().filter(|p| !pa.contains(p)))
            .copied()
            .collect();
        return Err((
            Condition::ContentPrimeSupport,
            format!("denominator contents {a} and {b} have different prime divisors"),
            witnesses,
        ));
    }
    reasons.push(Reason::Passed {
        condition: Condition::ContentPrimeSupport,
        detail: format!("denominator contents {a} and {b} have the same prime divisors"),
    });

    if !same_zero_set(d1, d2).expect("nonzero denominators") {
        return Err((
            Condition::DenominatorZeroSet,
            format!("denominators {d1} and {d2} vanish on different points"),
            vec![7, 11, 13],
        ));
    }
    reasons.push(Reason::Passed {
        condition: Condition::DenominatorZeroSet,
        detail: format!("denominators {d1} and {d2} have equal squarefree parts"),
    });

    let (lhs, rhs) = (n1 * d2, n2 * d1);
    if lhs != rhs {
        return Err((
            Condition::CrossMultiplication,
            format!("({n1})*({d2}) = {lhs} differs from ({n2})*({d1}) = {rhs}"),
            vec![],
        ));
    }
    reasons.push(Reason::Passed {
        condition: Condition::CrossMultiplication,
        detail: format!("({n1})*({d2}) = ({n2})*({d1})"),
    });
    Ok(reasons)
}

/// The primes (up to `limit`) dividing the integer content of a canonical denominator.
pub fn denominator_primes(c: &CanonicalFracterm, limit: u64) -> Vec<u64> {
    match c {
        CanonicalFracterm::BottomSide => vec![],
        CanonicalFracterm::Fraction { den, .. } => {
            let content = integer_content(den);
            match content.to_u64() {
                Some(1) => vec![],
                _ => small_prime_factors(&content, limit).0,
            }
        }
    }
}
