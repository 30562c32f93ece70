//! Evaluation in the common meadows `Enl⊥(ℚ)` and `Enl⊥(F_p)`, plus the
//! exhaustive and randomized equation checkers used as refutation oracles.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, CheckedNeg, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::terms::{Equation, Term};

/// A prime modulus, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime, SemanticsError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(SemanticsError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The field underneath a common meadow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CarrierSpec {
    Rationals,
    PrimeField(Prime),
}

impl CarrierSpec {
    pub fn prime_field(p: u64) -> Result<CarrierSpec, SemanticsError> {
        Ok(CarrierSpec::PrimeField(Prime::new(p)?))
    }
}

impl fmt::Display for CarrierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierSpec::Rationals => f.write_str("q"),
            CarrierSpec::PrimeField(p) => write!(f, "fp:{p}"),
        }
    }
}

/// An element of `Enl⊥(F)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MeadowValue {
    Bot,
    Rational(BigRational),
    /// Canonical residue in `[0, p)`.
    Residue(u64),
}

impl MeadowValue {
    pub fn is_bot(&self) -> bool {
        matches!(self, MeadowValue::Bot)
    }

    pub fn rational(n: i64, d: i64) -> MeadowValue {
        MeadowValue::Rational(BigRational::new(n.into(), d.into()))
    }

    fn fits(&self, carrier: CarrierSpec) -> bool {
        match (self, carrier) {
            (MeadowValue::Bot, _) => true,
            (MeadowValue::Rational(_), CarrierSpec::Rationals) => true,
            (MeadowValue::Residue(r), CarrierSpec::PrimeField(p)) => *r < p.get(),
            _ => false,
        }
    }
}

impl fmt::Display for MeadowValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeadowValue::Bot => f.write_str("bot"),
            MeadowValue::Rational(q) => write!(f, "{q}"),
            MeadowValue::Residue(r) => write!(f, "{r}"),
        }
    }
}

/// Assignment of carrier values to variables.
pub type Valuation = BTreeMap<String, MeadowValue>;

pub fn format_valuation(v: &Valuation) -> String {
    let body: Vec<String> = v.iter().map(|(k, val)| format!("{k}: {val}")).collect();
    format!("{{{}}}", body.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("variable {0:?} is not bound by the valuation")]
    Unbound(String),
    #[error("value {value} for {var:?} does not belong to carrier {carrier}")]
    CarrierMismatch {
        var: String,
        value: String,
        carrier: CarrierSpec,
    },
    #[error("equation has {found} variables; exhaustive checking is bounded by {bound}")]
    TooManyVariables { found: usize, bound: usize },
}

/// Result of an oracle check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// No counterexample (exhaustive: none exists; sampled: none found).
    Valid,
    CounterValuation(Valuation),
}

impl CheckOutcome {
    pub fn is_valid(&self) -> bool {
        matches!(self, CheckOutcome::Valid)
    }
}

// ---------------------------------------------------------------------------
// Scalar arithmetic backends
// ---------------------------------------------------------------------------

/// Field arithmetic; `None` from an operation signals machine overflow.
trait Scalar: Clone + PartialEq {
    type Ctx: Copy;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn nat(n: &BigUint, ctx: Self::Ctx) -> Option<Self>;
    fn add(&self, o: &Self, ctx: Self::Ctx) -> Option<Self>;
    fn neg(&self, ctx: Self::Ctx) -> Option<Self>;
    fn mul(&self, o: &Self, ctx: Self::Ctx) -> Option<Self>;
    fn is_zero(&self) -> bool;
    /// `self / o` for nonzero `o`.
    fn div(&self, o: &Self, ctx: Self::Ctx) -> Option<Self>;
}

impl Scalar for BigRational {
    type Ctx = ();
    fn zero(_: ()) -> Self {
        Zero::zero()
    }
    fn one(_: ()) -> Self {
        One::one()
    }
    fn nat(n: &BigUint, _: ()) -> Option<Self> {
        Some(BigRational::from_integer(BigInt::from(n.clone())))
    }
    fn add(&self, o: &Self, _: ()) -> Option<Self> {
        Some(self + o)
    }
    fn neg(&self, _: ()) -> Option<Self> {
        Some(-self)
    }
    fn mul(&self, o: &Self, _: ()) -> Option<Self> {
        Some(self * o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn div(&self, o: &Self, _: ()) -> Option<Self> {
        Some(self / o)
    }
}

type SmallRat = Ratio<i128>;

impl Scalar for SmallRat {
    type Ctx = ();
    fn zero(_: ()) -> Self {
        Zero::zero()
    }
    fn one(_: ()) -> Self {
        One::one()
    }
    fn nat(n: &BigUint, _: ()) -> Option<Self> {
        n.to_i128().map(Ratio::from_integer)
    }
    fn add(&self, o: &Self, _: ()) -> Option<Self> {
        self.checked_add(o)
    }
    fn neg(&self, _: ()) -> Option<Self> {
        Some(Ratio::new_raw(self.numer().checked_neg()?, *self.denom()))
    }
    fn mul(&self, o: &Self, _: ()) -> Option<Self> {
        self.checked_mul(o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn div(&self, o: &Self, _: ()) -> Option<Self> {
        let (n, d) = (*o.numer(), *o.denom());
        let (n, d) = if n < 0 {
            (n.checked_neg()?, d.checked_neg()?)
        } else {
            (n, d)
        };
        self.checked_mul(&Ratio::new_raw(d, n))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Residue(u64);

impl Scalar for Residue {
    type Ctx = u64;
    fn zero(_: u64) -> Self {
        Residue(0)
    }
    fn one(p: u64) -> Self {
        Residue(1 % p)
    }
    fn nat(n: &BigUint, p: u64) -> Option<Self> {
        Some(Residue((n % p).to_u64().expect("residue below modulus")))
    }
    fn add(&self, o: &Self, p: u64) -> Option<Self> {
        Some(Residue(((self.0 as u128 + o.0 as u128) % p as u128) as u64))
    }
    fn neg(&self, p: u64) -> Option<Self> {
        Some(Residue((p - self.0) % p))
    }
    fn mul(&self, o: &Self, p: u64) -> Option<Self> {
        Some(Residue(((self.0 as u128 * o.0 as u128) % p as u128) as u64))
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn div(&self, o: &Self, p: u64) -> Option<Self> {
        self.mul(&Residue(mod_inverse(o.0, p)), p)
    }
}

/// Inverse of a nonzero residue modulo a prime, by the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, p: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(p as i128));
    debug_assert_eq!(e.gcd, 1, "{a} not invertible mod {p}");
    e.x.rem_euclid(p as i128) as u64
}

enum Failure {
    Unbound(String),
    Overflow,
}

/// Evaluate with `None` standing for ⊥.
fn eval_generic<S: Scalar>(
    t: &Term,
    lookup: &dyn Fn(&str) -> Result<Option<S>, Failure>,
    ctx: S::Ctx,
) -> Result<Option<S>, Failure> {
    let overflow = |v: Option<S>| v.ok_or(Failure::Overflow).map(Some);
    match t {
        Term::Zero => Ok(Some(S::zero(ctx))),
        Term::One => Ok(Some(S::one(ctx))),
        Term::Bot => Ok(None),
        Term::Num(n) => overflow(S::nat(n, ctx)),
        Term::Var(x) => lookup(x),
        Term::Neg(a) => match eval_generic(a, lookup, ctx)? {
            None => Ok(None),
            Some(a) => overflow(a.neg(ctx)),
        },
        Term::Add(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
            let a = eval_generic(a, lookup, ctx)?;
            let b = eval_generic(b, lookup, ctx)?;
            let (Some(a), Some(b)) = (a, b) else {
                return Ok(None);
            };
            match t {
                Term::Add(..) => overflow(a.add(&b, ctx)),
                Term::Mul(..) => overflow(a.mul(&b, ctx)),
                _ if b.is_zero() => Ok(None),
                _ => overflow(a.div(&b, ctx)),
            }
        }
    }
}

/// Evaluate `t` under `valuation` in `Enl⊥(carrier)`.
///
/// `⊥` absorbs every operation and `x/0 = ⊥` for all `x`.
pub fn eval(t: &Term, valuation: &Valuation, carrier: CarrierSpec) -> Result<MeadowValue, SemanticsError> {
    let unbound = |x: &str| Failure::Unbound(x.to_string());
    for x in t.free_vars() {
        let v = valuation.get(&x).ok_or_else(|| SemanticsError::Unbound(x.clone()))?;
        if !v.fits(carrier) {
            return Err(SemanticsError::CarrierMismatch {
                var: x,
                value: v.to_string(),
                carrier,
            });
        }
    }
    let result = match carrier {
        CarrierSpec::Rationals => {
            let lookup = |x: &str| match valuation.get(x) {
                Some(MeadowValue::Rational(q)) => Ok(Some(q.clone())),
                Some(_) => Ok(None),
                None => Err(unbound(x)),
            };
            eval_generic::<BigRational>(t, &lookup, ()).map(|v| v.map(MeadowValue::Rational))
        }
        CarrierSpec::PrimeField(p) => {
            let lookup = |x: &str| match valuation.get(x) {
                Some(MeadowValue::Residue(r)) => Ok(Some(Residue(*r))),
                Some(_) => Ok(None),
                None => Err(unbound(x)),
            };
            eval_generic::<Residue>(t, &lookup, p.get()).map(|v| v.map(|r| MeadowValue::Residue(r.0)))
        }
    };
    match result {
        Ok(v) => Ok(v.unwrap_or(MeadowValue::Bot)),
        Err(Failure::Unbound(x)) => Err(SemanticsError::Unbound(x)),
        Err(Failure::Overflow) => unreachable!("exact backends never overflow"),
    }
}

/// Whether both sides of `e` agree under `valuation`.
pub fn holds_at(e: &Equation, valuation: &Valuation, carrier: CarrierSpec) -> Result<bool, SemanticsError> {
    Ok(eval(&e.lhs, valuation, carrier)? == eval(&e.rhs, valuation, carrier)?)
}

/// An equation compiled against a fixed variable list, for fast repeated evaluation.
struct Compiled<'a> {
    eq: &'a Equation,
    vars: Vec<String>,
}

impl<'a> Compiled<'a> {
    fn new(eq: &'a Equation) -> Self {
        Compiled {
            eq,
            vars: eq.free_vars().into_iter().collect(),
        }
    }

    fn index(&self, x: &str) -> Result<usize, Failure> {
        self.vars
            .binary_search_by(|v| v.as_str().cmp(x))
            .map_err(|_| Failure::Unbound(x.to_string()))
    }

    fn agree_mod(&self, vals: &[Option<u64>], p: u64) -> bool {
        let lookup = |x: &str| Ok(vals[self.index(x)?].map(Residue));
        let side = |t: &Term| match eval_generic::<Residue>(t, &lookup, p) {
            Ok(v) => v,
            Err(_) => unreachable!("all variables are bound"),
        };
        side(&self.eq.lhs) == side(&self.eq.rhs)
    }

    fn agree_rational(&self, vals: &[Option<SmallRat>]) -> bool {
        let lookup = |x: &str| Ok(vals[self.index(x)?]);
        let small = |t: &Term| eval_generic::<SmallRat>(t, &lookup, ());
        if let (Ok(l), Ok(r)) = (small(&self.eq.lhs), small(&self.eq.rhs)) {
            return l == r;
        }
        // Overflowed machine integers: redo exactly.
        let big: Vec<Option<BigRational>> = vals
            .iter()
            .map(|v| v.map(|q| BigRational::new((*q.numer()).into(), (*q.denom()).into())))
            .collect();
        let lookup = |x: &str| Ok(big[self.index(x)?].clone());
        let exact = |t: &Term| match eval_generic::<BigRational>(t, &lookup, ()) {
            Ok(v) => v,
            Err(_) => unreachable!("all variables are bound"),
        };
        exact(&self.eq.lhs) == exact(&self.eq.rhs)
    }

    fn valuation_mod(&self, vals: &[Option<u64>]) -> Valuation {
        self.vars
            .iter()
            .zip(vals)
            .map(|(x, v)| (x.clone(), v.map_or(MeadowValue::Bot, MeadowValue::Residue)))
            .collect()
    }

    fn valuation_rational(&self, vals: &[Option<SmallRat>]) -> Valuation {
        self.vars
            .iter()
            .zip(vals)
            .map(|(x, v)| {
                let v = v.map_or(MeadowValue::Bot, |q| {
                    MeadowValue::Rational(BigRational::new((*q.numer()).into(), (*q.denom()).into()))
                });
                (x.clone(), v)
            })
            .collect()
    }
}

/// Default bound on the number of variables for [`exhaustive_check`].
pub const DEFAULT_EXHAUSTIVE_VARS: usize = 4;

/// Check `e` under every valuation over `F_p ∪ {⊥}`.
///
/// Variables are enumerated in name order with the first variable most
/// significant; each ranges over `⊥, 0, 1, ..., p-1`. Returns the first
/// valuation on which the sides differ.
pub fn exhaustive_check(e: &Equation, p: Prime, max_vars: usize) -> Result<CheckOutcome, SemanticsError> {
    let c = Compiled::new(e);
    let k = c.vars.len();
    if k > max_vars {
        return Err(SemanticsError::TooManyVariables {
            found: k,
            bound: max_vars,
        });
    }
    let p = p.get();
    // digit 0 is ⊥, digit d > 0 is residue d-1
    let mut digits = vec![0u64; k];
    let mut vals: Vec<Option<u64>> = vec![None; k];
    loop {
        for (v, &d) in vals.iter_mut().zip(&digits) {
            *v = if d == 0 { None } else { Some(d - 1) };
        }
        if !c.agree_mod(&vals, p) {
            return Ok(CheckOutcome::CounterValuation(c.valuation_mod(&vals)));
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(CheckOutcome::Valid);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] <= p {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Probability of drawing ⊥ for a variable is `1 / BOT_ODDS`.
const BOT_ODDS: u32 = 8;
/// Random completions tried for each single-⊥ pattern in the pre-pass.
const BOT_PREPASS_COMPLETIONS: usize = 4;

enum Sampler {
    Rational,
    Residue(u64),
}

#[derive(Clone, Copy)]
enum Drawn {
    Rational(Option<SmallRat>),
    Residue(Option<u64>),
}

impl Sampler {
    fn element(&self, rng: &mut ChaCha8Rng) -> Drawn {
        match self {
            Sampler::Rational => {
                let n: i128 = rng.random_range(-9..=9);
                let d: i128 = rng.random_range(1..=4);
                Drawn::Rational(Some(Ratio::new(n, d)))
            }
            Sampler::Residue(p) => Drawn::Residue(Some(rng.random_range(0..*p))),
        }
    }

    fn bot(&self) -> Drawn {
        match self {
            Sampler::Rational => Drawn::Rational(None),
            Sampler::Residue(_) => Drawn::Residue(None),
        }
    }
}

/// `p == 0` selects the rationals.
fn check_drawn(c: &Compiled, drawn: &[Drawn], p: u64) -> Option<Valuation> {
    if p > 0 {
        let vals: Vec<Option<u64>> = drawn
            .iter()
            .map(|d| match d {
                Drawn::Residue(v) => *v,
                Drawn::Rational(_) => unreachable!(),
            })
            .collect();
        (!c.agree_mod(&vals, p)).then(|| c.valuation_mod(&vals))
    } else {
        let vals: Vec<Option<SmallRat>> = drawn
            .iter()
            .map(|d| match d {
                Drawn::Rational(v) => *v,
                Drawn::Residue(_) => unreachable!(),
            })
            .collect();
        (!c.agree_rational(&vals)).then(|| c.valuation_rational(&vals))
    }
}

/// Randomized check over `Enl⊥(carrier)`.
///
/// First tries every single-variable-⊥ pattern (with a few random
/// completions each), then `n` valuations where each variable is ⊥ with
/// probability 1/8 and otherwise a small random element. Deterministic in
/// `seed`. `Valid` means no counterexample was found.
pub fn sample_check(e: &Equation, carrier: CarrierSpec, n: usize, seed: u64) -> CheckOutcome {
    let c = Compiled::new(e);
    let (sampler, p) = match carrier {
        CarrierSpec::Rationals => (Sampler::Rational, 0),
        CarrierSpec::PrimeField(p) => (Sampler::Residue(p.get()), p.get()),
    };
    let found = |drawn: &[Drawn]| check_drawn(&c, drawn, p);
    let done = |v: Valuation| CheckOutcome::CounterValuation(v);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = c.vars.len();
    if k == 0 {
        return found(&[]).map_or(CheckOutcome::Valid, done);
    }
    for bot_at in 0..k {
        for _ in 0..BOT_PREPASS_COMPLETIONS {
            let drawn: Vec<Drawn> = (0..k)
                .map(|i| {
                    if i == bot_at {
                        sampler.bot()
                    } else {
                        sampler.element(&mut rng)
                    }
                })
                .collect();
            if let Some(v) = found(&drawn) {
                return done(v);
            }
        }
    }
    for _ in 0..n {
        let drawn: Vec<Drawn> = (0..k)
            .map(|_| {
                if rng.random_ratio(1, BOT_ODDS) {
                    sampler.bot()
                } else {
                    sampler.element(&mut rng)
                }
            })
            .collect();
        if let Some(v) = found(&drawn) {
            return done(v);
        }
    }
    CheckOutcome::Valid
}
