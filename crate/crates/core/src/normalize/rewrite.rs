//! The axiom tables as oriented rewrite rules, and a small traced rewriting
//! engine. Every step names the axiom it instantiates, the position it was
//! applied at and the substitution used, so a trace can be replayed and
//! audited independently of the engine that produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::terms::{parse_equation, Equation, Term};

/// Axioms for weak commutative rings with `⊥` (1–11) and the division
/// axioms of the fracterm calculus (12–18).
const AXIOM_TEXT: [&str; 18] = [
    "(x + y) + z = x + (y + z)",
    "x + y = y + x",
    "x + 0 = x",
    "x + (-x) = 0 * x",
    "x * (y * z) = (x * y) * z",
    "x * y = y * x",
    "1 * x = x",
    "x * (y + z) = (x * y) + (x * z)",
    "-(-x) = x",
    "0 * (x + y) = 0 * (x * y)",
    "x + bot = bot",
    "x = x/1",
    "-(x/y) = (-x)/y",
    "(x/y) * (u/v) = (x * u)/(y * v)",
    "x/y + u/v = ((x * v) + (y * u))/(y * v)",
    "x/(u/v) = x * ((v * v)/(u * v))",
    "x/(y + 0 * z) = (x + 0 * z)/y",
    "bot = 1/0",
];

/// Number of axioms in the weak-commutative-ring table.
pub const WCR_AXIOMS: u8 = 11;
pub const ALL_AXIOMS: u8 = 18;

/// All 18 axioms, numbered from 1.
pub fn axioms() -> &'static [Equation] {
    static TABLE: OnceLock<Vec<Equation>> = OnceLock::new();
    TABLE.get_or_init(|| {
        AXIOM_TEXT
            .iter()
            .map(|s| parse_equation(s).expect("axiom table parses"))
            .collect()
    })
}

pub fn axiom(number: u8) -> Option<&'static Equation> {
    axioms().get(usize::from(number).checked_sub(1)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// left-hand side to right-hand side
    Forward,
    Backward,
}

/// An axiom used as a rewrite rule in one direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub axiom: u8,
    pub direction: Direction,
}

impl Rule {
    pub fn forward(axiom: u8) -> Rule {
        Rule {
            axiom,
            direction: Direction::Forward,
        }
    }

    pub fn backward(axiom: u8) -> Rule {
        Rule {
            axiom,
            direction: Direction::Backward,
        }
    }

    /// `(pattern, replacement)`.
    pub fn sides(&self) -> (&'static Term, &'static Term) {
        let eq = axiom(self.axiom).expect("rule refers to a tabled axiom");
        match self.direction {
            Direction::Forward => (&eq.lhs, &eq.rhs),
            Direction::Backward => (&eq.rhs, &eq.lhs),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "({})", self.axiom),
            Direction::Backward => write!(f, "({})^-1", self.axiom),
        }
    }
}

/// An ordered list of rules with a step bound (some axioms, such as
/// `x = x/1` or commutativity, do not terminate on their own).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSet {
    pub rules: Vec<Rule>,
    pub max_steps: usize,
}

impl AxiomSet {
    pub const DEFAULT_MAX_STEPS: usize = 1000;

    pub fn new(rules: Vec<Rule>) -> AxiomSet {
        AxiomSet {
            rules,
            max_steps: Self::DEFAULT_MAX_STEPS,
        }
    }

    pub fn empty() -> AxiomSet {
        AxiomSet::new(Vec::new())
    }

    /// Forward rules for the given axiom numbers.
    pub fn forward(numbers: &[u8]) -> AxiomSet {
        AxiomSet::new(numbers.iter().copied().map(Rule::forward).collect())
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> AxiomSet {
        self.max_steps = max_steps;
        self
    }
}

pub type Substitution = BTreeMap<String, Term>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: Rule,
    pub position: Vec<usize>,
    pub substitution: Substitution,
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<String> = self.position.iter().map(usize::to_string).collect();
        let subst: Vec<String> = self.substitution.iter().map(|(x, t)| format!("{x} := {t}")).collect();
        write!(f, "{} at [{}] with {{{}}}", self.rule, pos.join("."), subst.join(", "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn axioms_used(&self) -> Vec<u8> {
        self.steps.iter().map(|s| s.rule.axiom).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: no subterm at position {position:?}")]
    BadPosition { step: usize, position: Vec<usize> },
    #[error("step {step}: subterm {found} is not an instance of {rule} under the recorded substitution")]
    Mismatch { step: usize, rule: String, found: String },
}

/// Extend `subst` so that `pattern` instantiates to `t`. Repeated pattern
/// variables must match identical subterms.
pub fn match_pattern(pattern: &Term, t: &Term, subst: &mut Substitution) -> bool {
    match (pattern, t) {
        (Term::Var(x), _) => match subst.get(x) {
            Some(bound) => bound == t,
            None => {
                subst.insert(x.clone(), t.clone());
                true
            }
        },
        (Term::Neg(p), Term::Neg(a)) => match_pattern(p, a, subst),
        (Term::Add(p, q), Term::Add(a, b))
        | (Term::Mul(p, q), Term::Mul(a, b))
        | (Term::Div(p, q), Term::Div(a, b)) => match_pattern(p, a, subst) && match_pattern(q, b, subst),
        _ => pattern == t,
    }
}

/// Apply one rule at one position. Variables of the replacement that the
/// pattern does not bind must be supplied in `extra` (e.g. `x` in `⊥ → x + ⊥`).
pub fn rewrite_at(t: &Term, rule: &Rule, position: &[usize], extra: &Substitution) -> Option<(Term, RewriteStep)> {
    let (pattern, replacement) = rule.sides();
    let target = t.at(position)?;
    let mut subst = extra.clone();
    if !match_pattern(pattern, target, &mut subst) {
        return None;
    }
    if !replacement.free_vars().iter().all(|x| subst.contains_key(x)) {
        return None;
    }
    let mut out = t.clone();
    *out.at_mut(position)? = replacement.substitute(&subst);
    let step = RewriteStep {
        rule: rule.clone(),
        position: position.to_vec(),
        substitution: subst,
    };
    Some((out, step))
}

/// Rewrite with the first applicable rule at the leftmost-outermost redex,
/// repeatedly, until no rule applies or the step bound is reached.
pub fn apply_trace(t: &Term, rules: &AxiomSet) -> (Term, RewriteTrace) {
    let mut current = t.clone();
    let mut trace = RewriteTrace::default();
    let none = Substitution::new();
    'outer: while trace.len() < rules.max_steps {
        for pos in current.positions() {
            for rule in &rules.rules {
                if let Some((next, step)) = rewrite_at(&current, rule, &pos, &none) {
                    current = next;
                    trace.steps.push(step);
                    continue 'outer;
                }
            }
        }
        break;
    }
    (current, trace)
}

/// Re-apply a trace step by step, checking each recorded instance.
pub fn replay(t: &Term, trace: &RewriteTrace) -> Result<Term, ReplayError> {
    let mut current = t.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let (pattern, replacement) = step.rule.sides();
        let target = current.at(&step.position).ok_or_else(|| ReplayError::BadPosition {
            step: i,
            position: step.position.clone(),
        })?;
        let expected = pattern.substitute(&step.substitution);
        if *target != expected
            || !replacement
                .free_vars()
                .iter()
                .all(|x| step.substitution.contains_key(x))
        {
            return Err(ReplayError::Mismatch {
                step: i,
                rule: step.rule.to_string(),
                found: target.to_string(),
            });
        }
        *current.at_mut(&step.position).expect("position checked") = replacement.substitute(&step.substitution);
    }
    Ok(current)
}
