//! Random generation and differential testing.
//!
//! [`soundness_suite`] checks the axiom tables against the finite-field and
//! rational oracles. [`differential_run`] generates random equations and
//! compares [`decide`] with an oracle battery; any disagreement is shrunk
//! and logged. Work is sharded with rayon and merged in index order, so
//! reports are reproducible from the seed.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decide::{canonicalize, decide_with, Budget, Countermodel, Verdict};
use crate::normalize::reduce_wcr;
use crate::normalize::rewrite::{axioms, rewrite_at, Rule, Substitution, ALL_AXIOMS, WCR_AXIOMS};
use crate::semantics::{
    exhaustive_check, format_valuation, sample_check, CarrierSpec, CheckOutcome, Prime, DEFAULT_EXHAUSTIVE_VARS,
};
use crate::terms::{parse_equation, Equation, SignatureTag, Term};

/// Term constructors, for generator weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctor {
    Zero,
    One,
    Bot,
    Var,
    /// integer numeral 2..=6; only chosen below the depth limit
    Numeral,
    Add,
    Neg,
    Mul,
    Div,
}

impl Ctor {
    pub const ALL: [Ctor; 9] = [
        Ctor::Zero,
        Ctor::One,
        Ctor::Bot,
        Ctor::Var,
        Ctor::Numeral,
        Ctor::Add,
        Ctor::Neg,
        Ctor::Mul,
        Ctor::Div,
    ];

    fn is_leaf(self) -> bool {
        matches!(self, Ctor::Zero | Ctor::One | Ctor::Bot | Ctor::Var)
    }

    fn allowed(self, sig: SignatureTag) -> bool {
        match self {
            Ctor::Bot => matches!(sig, SignatureTag::RingBot | SignatureTag::CommonMeadow),
            Ctor::Div => matches!(sig, SignatureTag::Meadow | SignatureTag::CommonMeadow),
            _ => true,
        }
    }
}

/// Variable names used by the generator, in order.
pub const VAR_NAMES: [&str; 6] = ["x", "y", "z", "w", "u", "v"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_vars: usize,
    pub signature: SignatureTag,
    pub seed: u64,
    pub weights: BTreeMap<Ctor, u32>,
}

impl Default for GenConfig {
    fn default() -> Self {
        let weights = Ctor::ALL
            .iter()
            .map(|&c| (c, if matches!(c, Ctor::Bot | Ctor::Div) { 2 } else { 1 }))
            .collect();
        GenConfig {
            max_depth: 4,
            max_vars: 3,
            signature: SignatureTag::CommonMeadow,
            seed: 0,
            weights,
        }
    }
}

impl GenConfig {
    pub fn with_signature(mut self, signature: SignatureTag) -> Self {
        self.signature = signature;
        self
    }

    pub fn with_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_vars(mut self, max_vars: usize) -> Self {
        self.max_vars = max_vars;
        self
    }

    fn weight(&self, c: Ctor) -> u32 {
        if c.allowed(self.signature) {
            self.weights.get(&c).copied().unwrap_or(0)
        } else {
            0
        }
    }
}

/// Mix a base seed with an index into an independent stream seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pick_ctor(cfg: &GenConfig, depth_left: usize, rng: &mut ChaCha8Rng) -> Ctor {
    let candidates: Vec<(Ctor, u32)> = Ctor::ALL
        .iter()
        .filter(|c| depth_left > 0 || c.is_leaf())
        .map(|&c| (c, cfg.weight(c)))
        .filter(|(_, w)| *w > 0)
        .collect();
    if candidates.is_empty() {
        return Ctor::Zero;
    }
    let total: u32 = candidates.iter().map(|(_, w)| w).sum();
    let mut roll = rng.random_range(0..total);
    for (c, w) in &candidates {
        if roll < *w {
            return *c;
        }
        roll -= w;
    }
    unreachable!("roll below total weight")
}

fn gen_with(cfg: &GenConfig, depth_left: usize, rng: &mut ChaCha8Rng) -> Term {
    let sub = |rng: &mut ChaCha8Rng| Box::new(gen_with(cfg, depth_left - 1, rng));
    match pick_ctor(cfg, depth_left, rng) {
        Ctor::Zero => Term::Zero,
        Ctor::One => Term::One,
        Ctor::Bot => Term::Bot,
        Ctor::Var => Term::var(VAR_NAMES[rng.random_range(0..cfg.max_vars.clamp(1, VAR_NAMES.len()))]),
        Ctor::Numeral => Term::nat(rng.random_range(2u32..=6)),
        Ctor::Add => Term::Add(sub(rng), sub(rng)),
        Ctor::Neg => Term::Neg(sub(rng)),
        Ctor::Mul => Term::Mul(sub(rng), sub(rng)),
        Ctor::Div => Term::Div(sub(rng), sub(rng)),
    }
}

/// A random term; deterministic in `cfg.seed` and pure for `cfg.signature`.
pub fn gen_term(cfg: &GenConfig) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    gen_with(cfg, cfg.max_depth, &mut rng)
}

/// Apply `steps` random axiom instances (either direction) at random
/// positions, staying inside `sig`. The result is provably equal to `t`.
pub fn random_rewrites(t: &Term, sig: SignatureTag, steps: usize, rng: &mut ChaCha8Rng) -> Term {
    let max_axiom = if matches!(sig, SignatureTag::Ring | SignatureTag::RingBot) {
        WCR_AXIOMS
    } else {
        ALL_AXIOMS
    };
    let rules: Vec<Rule> = (1..=max_axiom)
        .flat_map(|n| [Rule::forward(n), Rule::backward(n)])
        .collect();
    let fresh_cfg = GenConfig::default().with_signature(sig).with_depth(1);
    let mut current = t.clone();
    for _ in 0..steps {
        let positions = current.positions();
        let mut options = Vec::new();
        for pos in &positions {
            for rule in &rules {
                // bind replacement-only variables (e.g. `x` in `bot -> x + bot`) to small terms
                let extra: Substitution = ["x", "y", "z", "u", "v"]
                    .iter()
                    .map(|x| (x.to_string(), gen_with(&fresh_cfg, 1, rng)))
                    .collect();
                let (pattern, _) = rule.sides();
                let mut pat_subst = Substitution::new();
                let Some(target) = current.at(pos) else { continue };
                if !crate::normalize::rewrite::match_pattern(pattern, target, &mut pat_subst) {
                    continue;
                }
                let extra: Substitution = extra.into_iter().filter(|(k, _)| !pat_subst.contains_key(k)).collect();
                if let Some((next, _)) = rewrite_at(&current, rule, pos, &extra) {
                    if next.is_pure(sig) && next.size() <= t.size() * 3 + 12 {
                        options.push(next);
                    }
                }
            }
        }
        match options.choose(rng) {
            Some(next) => current = next.clone(),
            None => break,
        }
    }
    current
}

/// How [`gen_equation`] builds its right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairStrategy {
    /// independent random term
    Independent,
    /// axiom rewrites of the left-hand side
    Rewritten,
    /// the canonical form of the left-hand side
    Canonical,
    /// a small mutation of the canonical form
    Mutated,
}

fn canonical_term(t: &Term, sig: SignatureTag) -> Term {
    if t.is_pure(SignatureTag::RingBot) && matches!(sig, SignatureTag::Ring | SignatureTag::RingBot) {
        reduce_wcr(t).expect("division-free").to_term()
    } else {
        canonicalize(t).to_term()
    }
}

fn mutate(t: &Term, cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Term {
    let positions = t.positions();
    let pos = positions.choose(rng).expect("every term has a root position");
    let var = Term::var(VAR_NAMES[rng.random_range(0..cfg.max_vars.clamp(1, VAR_NAMES.len()))]);
    let sub = t.at(pos).expect("position from term").clone();
    let replacement = match rng.random_range(0..5) {
        0 => Term::add(sub, Term::mul(Term::Zero, var)),
        1 => Term::Zero,
        2 => Term::One,
        3 => var,
        _ => Term::mul(Term::nat(rng.random_range(2u32..=3)), sub),
    };
    let mut out = t.clone();
    *out.at_mut(pos).expect("position from term") = replacement;
    if out.is_pure(cfg.signature) {
        out
    } else {
        t.clone()
    }
}

/// A random equation. Half the right-hand sides are derived from the left
/// so that valid equations are common.
pub fn gen_equation(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> (Equation, PairStrategy) {
    let lhs = gen_with(cfg, cfg.max_depth, rng);
    let strategy = match rng.random_range(0..8) {
        0..=2 => PairStrategy::Independent,
        3..=4 => PairStrategy::Rewritten,
        5 => PairStrategy::Canonical,
        _ => PairStrategy::Mutated,
    };
    let rhs = match strategy {
        PairStrategy::Independent => gen_with(cfg, cfg.max_depth, rng),
        PairStrategy::Rewritten => {
            let steps = rng.random_range(1..=4);
            random_rewrites(&lhs, cfg.signature, steps, rng)
        }
        PairStrategy::Canonical => canonical_term(&lhs, cfg.signature),
        PairStrategy::Mutated => mutate(&canonical_term(&lhs, cfg.signature), cfg, rng),
    };
    (Equation::new(lhs, rhs), strategy)
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub primes: Vec<Prime>,
    /// exhaustive search up to this many variables, sampling beyond
    pub max_vars: usize,
    pub prime_samples: usize,
    pub rational_samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            primes: [2, 3, 5].map(|p| Prime::new(p).expect("prime")).to_vec(),
            max_vars: DEFAULT_EXHAUSTIVE_VARS,
            prime_samples: 1000,
            rational_samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    NotRefuted,
    Refuted(Countermodel),
}

impl OracleOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, OracleOutcome::Refuted(_))
    }
}

impl fmt::Display for OracleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleOutcome::NotRefuted => f.write_str("not-refuted"),
            OracleOutcome::Refuted(cm) => write!(f, "refuted {} {}", cm.carrier, format_valuation(&cm.valuation)),
        }
    }
}

/// Exhaustive checks over each small prime field, then rational sampling.
pub fn oracle_battery(e: &Equation, cfg: &OracleConfig) -> OracleOutcome {
    let nvars = e.free_vars().len();
    for &p in &cfg.primes {
        let carrier = CarrierSpec::PrimeField(p);
        let outcome = if nvars <= cfg.max_vars {
            exhaustive_check(e, p, cfg.max_vars).expect("within variable bound")
        } else {
            sample_check(e, carrier, cfg.prime_samples, cfg.seed ^ p.get())
        };
        if let CheckOutcome::CounterValuation(valuation) = outcome {
            return OracleOutcome::Refuted(Countermodel { carrier, valuation });
        }
    }
    match sample_check(e, CarrierSpec::Rationals, cfg.rational_samples, cfg.seed) {
        CheckOutcome::Valid => OracleOutcome::NotRefuted,
        CheckOutcome::CounterValuation(valuation) => OracleOutcome::Refuted(Countermodel {
            carrier: CarrierSpec::Rationals,
            valuation,
        }),
    }
}

// ---------------------------------------------------------------------------
// Axiom soundness
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AxiomCheck {
    pub label: String,
    pub equation: Equation,
    /// negative controls are expected to be refuted
    pub expect_valid: bool,
    pub outcomes: Vec<(CarrierSpec, CheckOutcome)>,
}

impl AxiomCheck {
    pub fn refuted(&self) -> bool {
        self.outcomes.iter().any(|(_, o)| !o.is_valid())
    }

    pub fn passed(&self) -> bool {
        self.refuted() != self.expect_valid
    }
}

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub checks: Vec<AxiomCheck>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }

    pub fn counterexamples(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.expect_valid)
            .flat_map(|c| &c.outcomes)
            .filter(|(_, o)| !o.is_valid())
            .count()
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            let kind = if c.expect_valid { "axiom" } else { "control" };
            write!(f, "{status} {kind} {} {}", c.label, c.equation)?;
            for (carrier, o) in &c.outcomes {
                match o {
                    CheckOutcome::Valid => write!(f, " {carrier}:ok")?,
                    CheckOutcome::CounterValuation(v) => write!(f, " {carrier}:counter{}", format_valuation(v))?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessConfig {
    pub primes: Vec<Prime>,
    pub rational_samples: usize,
    pub seed: u64,
}

impl Default for SoundnessConfig {
    fn default() -> Self {
        SoundnessConfig {
            primes: [2, 3, 5, 7].map(|p| Prime::new(p).expect("prime")).to_vec(),
            rational_samples: 1000,
            seed: 0,
        }
    }
}

/// The unbalanced ring law `x + (-x) = 0`, which fails at `x = ⊥`.
pub fn negative_control() -> Equation {
    parse_equation("x + (-x) = 0").expect("control parses")
}

fn check_equation(label: String, equation: Equation, expect_valid: bool, cfg: &SoundnessConfig) -> AxiomCheck {
    let nvars = equation.free_vars().len();
    let mut outcomes: Vec<(CarrierSpec, CheckOutcome)> = cfg
        .primes
        .iter()
        .map(|&p| {
            let outcome =
                exhaustive_check(&equation, p, nvars.max(DEFAULT_EXHAUSTIVE_VARS)).expect("bound covers all variables");
            (CarrierSpec::PrimeField(p), outcome)
        })
        .collect();
    outcomes.push((
        CarrierSpec::Rationals,
        sample_check(&equation, CarrierSpec::Rationals, cfg.rational_samples, cfg.seed),
    ));
    AxiomCheck {
        label,
        equation,
        expect_valid,
        outcomes,
    }
}

/// Check every axiom, plus the negative control, against the oracles.
pub fn soundness_suite_with(cfg: &SoundnessConfig) -> SoundnessReport {
    let mut jobs: Vec<(String, Equation, bool)> = axioms()
        .iter()
        .enumerate()
        .map(|(i, e)| (format!("({})", i + 1), e.clone(), true))
        .collect();
    jobs.push(("mutated-(4)".to_string(), negative_control(), false));
    let checks = jobs
        .into_par_iter()
        .map(|(label, e, expect)| check_equation(label, e, expect, cfg))
        .collect();
    SoundnessReport { checks }
}

pub fn soundness_suite() -> SoundnessReport {
    soundness_suite_with(&SoundnessConfig::default())
}

// ---------------------------------------------------------------------------
// Differential campaign
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mismatch {
    /// decide said valid, an oracle found a counterexample
    ValidButRefuted,
    /// decide said invalid without a countermodel and no oracle refuted it
    InvalidUnrefuted,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mismatch::ValidButRefuted => "valid-but-refuted",
            Mismatch::InvalidUnrefuted => "invalid-unrefuted",
        })
    }
}

fn classify(verdict: &Verdict, oracle: &OracleOutcome) -> Option<Mismatch> {
    match (verdict, oracle) {
        (Verdict::Valid { .. }, OracleOutcome::Refuted(_)) => Some(Mismatch::ValidButRefuted),
        (Verdict::Invalid { countermodel: None, .. }, OracleOutcome::NotRefuted) => Some(Mismatch::InvalidUnrefuted),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct Record {
    pub index: u64,
    pub seed: u64,
    pub equation: Equation,
    pub strategy: PairStrategy,
    pub verdict: Verdict,
    pub oracle: OracleOutcome,
    /// `InvalidUnrefuted` is only informational: the failed structural
    /// condition already certifies invalidity.
    pub mismatch: Option<Mismatch>,
    pub shrunk: Option<Equation>,
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match &self.verdict {
            Verdict::Valid { .. } => "valid".to_string(),
            Verdict::Invalid { failed, .. } => format!("invalid:{failed}"),
        };
        write!(
            f,
            "seed={} eq=[{}] verdict={} oracle={} mismatch={} shrunk={}",
            self.seed,
            self.equation,
            verdict,
            self.oracle,
            self.mismatch.map_or("none".to_string(), |m| m.to_string()),
            self.shrunk.as_ref().map_or("-".to_string(), |e| format!("[{e}]")),
        )
    }
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub records: Vec<Record>,
}

impl DiffReport {
    pub fn count(&self, m: Mismatch) -> usize {
        self.records.iter().filter(|r| r.mismatch == Some(m)).count()
    }

    pub fn valid_count(&self) -> usize {
        self.records.iter().filter(|r| r.verdict.is_valid()).count()
    }

    /// Invalid verdicts the oracle battery also refuted.
    pub fn invalid_refuted(&self) -> usize {
        self.records
            .iter()
            .filter(|r| !r.verdict.is_valid() && r.oracle.is_refuted())
            .count()
    }

    /// No valid verdict was refuted and every invalid one is explained.
    pub fn passed(&self) -> bool {
        self.count(Mismatch::ValidButRefuted) == 0
            && self
                .records
                .iter()
                .all(|r| r.verdict.is_valid() || r.oracle.is_refuted() || r.verdict.failed_condition().is_some())
    }

    pub fn summary(&self) -> String {
        format!(
            "equations={} valid={} invalid={} invalid-refuted={} valid-but-refuted={} invalid-unrefuted={}",
            self.records.len(),
            self.valid_count(),
            self.records.len() - self.valid_count(),
            self.invalid_refuted(),
            self.count(Mismatch::ValidButRefuted),
            self.count(Mismatch::InvalidUnrefuted),
        )
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        writeln!(f, "summary {}", self.summary())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffConfig {
    pub gen: GenConfig,
    pub oracle: OracleConfig,
    pub budget: Budget,
}

impl DiffConfig {
    pub fn new(gen: GenConfig) -> Self {
        DiffConfig {
            gen,
            oracle: OracleConfig::default(),
            budget: Budget::default(),
        }
    }
}

/// Greedy shrinking: replace subterms by `0`, `1` or a variable of the
/// equation while the result is smaller and `still_fails` holds.
pub fn shrink(e: &Equation, still_fails: impl Fn(&Equation) -> bool) -> Equation {
    let mut current = e.clone();
    let vars: Vec<Term> = e.free_vars().into_iter().map(Term::Var).collect();
    'restart: loop {
        for side in 0..2 {
            let term = if side == 0 { &current.lhs } else { &current.rhs };
            for pos in term.positions() {
                let sub = term.at(&pos).expect("own position");
                let mut candidates = vec![Term::Zero, Term::One];
                candidates.extend(vars.iter().cloned());
                candidates.extend(sub.children().into_iter().cloned());
                for cand in candidates {
                    if cand.size() >= sub.size() {
                        continue;
                    }
                    let mut next = current.clone();
                    let target = if side == 0 { &mut next.lhs } else { &mut next.rhs };
                    *target.at_mut(&pos).expect("own position") = cand;
                    if still_fails(&next) {
                        current = next;
                        continue 'restart;
                    }
                }
            }
        }
        return current;
    }
}

fn run_one(index: u64, cfg: &DiffConfig) -> Record {
    let seed = derive_seed(cfg.gen.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (equation, strategy) = gen_equation(&cfg.gen, &mut rng);
    let budget = Budget {
        seed,
        ..cfg.budget.clone()
    };
    let oracle_cfg = OracleConfig {
        seed,
        ..cfg.oracle.clone()
    };
    let verdict = decide_with(&equation, &budget);
    let oracle = oracle_battery(&equation, &oracle_cfg);
    let mismatch = classify(&verdict, &oracle);
    let shrunk = mismatch.map(|m| {
        shrink(&equation, |e| {
            classify(&decide_with(e, &budget), &oracle_battery(e, &oracle_cfg)) == Some(m)
        })
    });
    Record {
        index,
        seed,
        equation,
        strategy,
        verdict,
        oracle,
        mismatch,
        shrunk,
    }
}

/// Run `n` random equations through [`decide`] and the oracle battery.
pub fn differential_run(n: usize, gen: &GenConfig) -> DiffReport {
    differential_run_with(n, &DiffConfig::new(gen.clone()))
}

pub fn differential_run_with(n: usize, cfg: &DiffConfig) -> DiffReport {
    let records = (0..n as u64).into_par_iter().map(|i| run_one(i, cfg)).collect();
    DiffReport { records }
}
