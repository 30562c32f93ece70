//! Strategies and a reference evaluator shared by the integration tests.
//!
//! `ref_eval_q` and `ref_eval_fp` are deliberately naive: they use
//! `Option` for `⊥`, recompute everything from scratch and do not share
//! code with the library evaluator.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use meadow::polyalg::Monomial;
use meadow::{MeadowValue, Poly, SignatureTag, Term, Valuation};

pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn leaf(sig: SignatureTag) -> BoxedStrategy<Term> {
    let mut options: Vec<BoxedStrategy<Term>> = vec![
        Just(Term::Zero).boxed(),
        Just(Term::One).boxed(),
        (2u32..=5).prop_map(Term::nat).boxed(),
        prop::sample::select(VARS.to_vec()).prop_map(Term::var).boxed(),
        prop::sample::select(VARS.to_vec()).prop_map(Term::var).boxed(),
    ];
    if matches!(sig, SignatureTag::RingBot | SignatureTag::CommonMeadow) {
        options.push(Just(Term::Bot).boxed());
    }
    proptest::strategy::Union::new(options).boxed()
}

/// Random terms of the given signature, at most `depth` levels of operators.
pub fn term(sig: SignatureTag, depth: u32) -> BoxedStrategy<Term> {
    let division = matches!(sig, SignatureTag::Meadow | SignatureTag::CommonMeadow);
    leaf(sig)
        .prop_recursive(depth, 64, 2, move |inner| {
            let mut ops: Vec<BoxedStrategy<Term>> = vec![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::add(a, b))
                    .boxed(),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Term::mul(a, b))
                    .boxed(),
                inner.clone().prop_map(Term::neg).boxed(),
            ];
            if division {
                ops.push(
                    (inner.clone(), inner.clone())
                        .prop_map(|(a, b)| Term::div(a, b))
                        .boxed(),
                );
                ops.push((inner.clone(), inner).prop_map(|(a, b)| Term::div(a, b)).boxed());
            }
            proptest::strategy::Union::new(ops)
        })
        .boxed()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A value of `Enl⊥(ℚ)` for the reference evaluator; `None` is `⊥`.
pub fn ref_value_q() -> impl Strategy<Value = Option<BigRational>> {
    prop_oneof![
        1 => Just(None),
        6 => (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Some(q(n, d))),
    ]
}

pub fn ref_env_q() -> impl Strategy<Value = BTreeMap<String, Option<BigRational>>> {
    prop::collection::vec(ref_value_q(), VARS.len())
        .prop_map(|vals| VARS.iter().map(|x| x.to_string()).zip(vals).collect())
}

pub fn ref_env_fp(p: u64) -> impl Strategy<Value = BTreeMap<String, Option<u64>>> {
    let value = prop_oneof![1 => Just(None), 4 => (0..p).prop_map(Some)];
    prop::collection::vec(value, VARS.len()).prop_map(|vals| VARS.iter().map(|x| x.to_string()).zip(vals).collect())
}

pub fn ref_eval_q(t: &Term, env: &BTreeMap<String, Option<BigRational>>) -> Option<BigRational> {
    match t {
        Term::Zero => Some(BigRational::zero()),
        Term::One => Some(BigRational::one()),
        Term::Bot => None,
        Term::Num(n) => Some(BigRational::from_integer(BigInt::from(n.clone()))),
        Term::Var(x) => env[x].clone(),
        Term::Neg(a) => Some(-ref_eval_q(a, env)?),
        Term::Add(a, b) => {
            let (a, b) = (ref_eval_q(a, env), ref_eval_q(b, env));
            Some(a? + b?)
        }
        Term::Mul(a, b) => {
            let (a, b) = (ref_eval_q(a, env), ref_eval_q(b, env));
            Some(a? * b?)
        }
        Term::Div(a, b) => {
            let (a, b) = (ref_eval_q(a, env), ref_eval_q(b, env));
            let (a, b) = (a?, b?);
            if b.is_zero() {
                None
            } else {
                Some(a / b)
            }
        }
    }
}

/// Inverse by brute force search, fine for the small primes used in tests.
fn inverse_mod(a: u64, p: u64) -> Option<u64> {
    (1..p).find(|b| (a * b) % p == 1)
}

pub fn ref_eval_fp(t: &Term, env: &BTreeMap<String, Option<u64>>, p: u64) -> Option<u64> {
    let go = |s: &Term| ref_eval_fp(s, env, p);
    match t {
        Term::Zero => Some(0),
        Term::One => Some(1 % p),
        Term::Bot => None,
        Term::Num(n) => Some((n % p).try_into().expect("residue fits")),
        Term::Var(x) => env[x],
        Term::Neg(a) => Some((p - go(a)?) % p),
        Term::Add(a, b) => {
            let (a, b) = (go(a), go(b));
            Some((a? + b?) % p)
        }
        Term::Mul(a, b) => {
            let (a, b) = (go(a), go(b));
            Some((a? * b?) % p)
        }
        Term::Div(a, b) => {
            let (a, b) = (go(a), go(b));
            let (a, b) = (a?, b?);
            Some((a * inverse_mod(b, p)?) % p)
        }
    }
}

pub fn to_valuation_q(env: &BTreeMap<String, Option<BigRational>>) -> Valuation {
    env.iter()
        .map(|(x, v)| (x.clone(), v.clone().map_or(MeadowValue::Bot, MeadowValue::Rational)))
        .collect()
}

pub fn to_valuation_fp(env: &BTreeMap<String, Option<u64>>) -> Valuation {
    env.iter()
        .map(|(x, v)| (x.clone(), v.map_or(MeadowValue::Bot, MeadowValue::Residue)))
        .collect()
}

pub fn from_value(v: MeadowValue) -> Option<BigRational> {
    match v {
        MeadowValue::Bot => None,
        MeadowValue::Rational(q) => Some(q),
        MeadowValue::Residue(r) => Some(BigRational::from_integer(r.into())),
    }
}

/// Polynomials with small integer coefficients, total degree `≤ max_degree`
/// in at most three variables.
pub fn poly(max_degree: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    let monomial = (0..=max_degree, 0..=max_degree, 0..=max_degree)
        .prop_filter("total degree", move |(a, b, c)| a + b + c <= max_degree);
    prop::collection::vec((monomial, -4i64..=4), 1..=max_terms).prop_map(|terms| {
        Poly::from_terms(terms.into_iter().map(|((a, b, c), k)| {
            let m = Monomial::from_powers(
                VARS.iter()
                    .zip([a, b, c])
                    .filter(|(_, e)| *e > 0)
                    .map(|(x, e)| (x.to_string(), e)),
            );
            (m, q(k, 1))
        }))
    })
}

pub fn nonzero_poly(max_degree: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    poly(max_degree, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

/// `a = c * b` for a nonzero rational constant `c`.
pub fn associated(a: &Poly, b: &Poly) -> bool {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => true,
        (false, false) => a.div_exact(b).is_some_and(|c| c.is_constant()),
        _ => false,
    }
}
