//! Acceptance run. Each criterion prints one `PASS`/`FAIL` line to stderr
//! (bypassing the test harness capture) and the test fails if any does.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use meadow::harness::{
    differential_run, gen_equation, gen_term, oracle_battery, soundness_suite, GenConfig, Mismatch, OracleConfig,
};
use meadow::polyalg::{gcd, same_zero_set, squarefree_part, Monomial};
use meadow::{decide, flatten, parse_equation, wcr_equal, Poly, SignatureTag, Term, Verdict};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(n: usize, name: &str, started: Instant, outcome: &Outcome) {
    let line = format!(
        "acceptance {n} {name}: {} ({}; {:.1}s)\n",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail,
        started.elapsed().as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).expect("stderr");
}

fn axiom_soundness() -> Outcome {
    let started = Instant::now();
    let report = soundness_suite();
    let elapsed = started.elapsed();
    let axioms = report.checks.iter().filter(|c| c.expect_valid).count();
    let control_refuted = report.checks.iter().any(|c| !c.expect_valid && c.refuted());
    Outcome {
        passed: report.passed()
            && axioms == 18
            && report.counterexamples() == 0
            && control_refuted
            && elapsed < Duration::from_secs(60),
        detail: format!(
            "{axioms} axioms, {} counterexamples, negative control refuted: {control_refuted}",
            report.counterexamples()
        ),
    }
}

fn all_envs_fp(p: u64) -> Vec<BTreeMap<String, Option<u64>>> {
    let digits = p + 1;
    (0..digits.pow(VARS.len() as u32))
        .map(|mut code| {
            VARS.iter()
                .map(|x| {
                    let k = code % digits;
                    code /= digits;
                    (x.to_string(), (k < p).then_some(k))
                })
                .collect()
        })
        .collect()
}

fn random_env_q(rng: &mut ChaCha8Rng) -> BTreeMap<String, Option<BigRational>> {
    VARS.iter()
        .map(|x| {
            let v = (rng.random_range(0..8) != 0).then(|| q(rng.random_range(-9..=9), rng.random_range(1..=5)));
            (x.to_string(), v)
        })
        .collect()
}

fn flattening() -> Outcome {
    let started = Instant::now();
    let envs: Vec<(u64, Vec<_>)> = [2, 3].iter().map(|&p| (p, all_envs_fp(p))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut impure = 0;
    for seed in 0..1000 {
        let t = gen_term(&GenConfig::default().with_depth(6).with_max_vars(3).with_seed(seed));
        let (f, _) = flatten(&t);
        if !f.is_flat() {
            impure += 1;
        }
        let ft = f.to_term();
        let bad_fp = envs.iter().any(|(p, all)| {
            all.iter()
                .any(|env| ref_eval_fp(&t, env, *p) != ref_eval_fp(&ft, env, *p))
        });
        let bad_q = (0..100).any(|_| {
            let env = random_env_q(&mut rng);
            ref_eval_q(&t, &env) != ref_eval_q(&ft, &env)
        });
        if bad_fp || bad_q {
            mismatches += 1;
        }
    }
    Outcome {
        passed: mismatches == 0 && impure == 0 && started.elapsed() < Duration::from_secs(120),
        detail: format!("1000 terms, {impure} impure outputs, {mismatches} semantic mismatches"),
    }
}

fn normalization() -> Outcome {
    let gen = GenConfig::default().with_signature(SignatureTag::RingBot).with_depth(4);
    let oracle = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut disagreements = Vec::new();
    let mut equal = 0;
    for i in 0..500 {
        let (e, _) = gen_equation(&gen, &mut rng);
        let syntactic = wcr_equal(&e.lhs, &e.rhs).expect("division-free");
        equal += usize::from(syntactic);
        let refuted = oracle_battery(
            &e,
            &OracleConfig {
                seed: i,
                ..oracle.clone()
            },
        )
        .is_refuted();
        if syntactic == refuted {
            disagreements.push(e.to_string());
        }
    }
    Outcome {
        passed: disagreements.is_empty(),
        detail: format!(
            "500 pairs, {equal} provably equal, {} disagreements{}",
            disagreements.len(),
            disagreements.first().map_or(String::new(), |e| format!(", first: {e}"))
        ),
    }
}

/// `(valid?, equation)`.
const CURATED: &[(bool, &str)] = &[
    (true, "x + (-x) = 0 * x"),
    (true, "(x + y) - (x + y) = 0 * (x * y)"),
    (true, "0 * (x + y) = 0 * (x * y)"),
    (true, "1/x = x/(x * x)"),
    (true, "x/x = (x * x)/(x * x)"),
    (true, "1/2 = 2/4"),
    (true, "x/(y + 0 * z) = (x + 0 * z)/y"),
    (true, "(x * x)/(y + 0 * x) = (x * x + 0 * x)/y"),
    (true, "1/(x + 0 * y) = (1 + 0 * y)/x"),
    (true, "x + bot = bot"),
    (true, "bot = 1/0"),
    (true, "x/0 = bot"),
    (true, "bot * x = bot + y"),
    (true, "(x + y) + z = x + (y + z)"),
    (true, "x * (y + z) = x * y + x * z"),
    (true, "-(-x) = x"),
    (true, "x = x/1"),
    (true, "-(x/y) = (-x)/y"),
    (true, "(x/y) * (u/v) = (x * u)/(y * v)"),
    (true, "x/y + u/v = (x * v + y * u)/(y * v)"),
    (true, "x/(u/v) = x * ((v * v)/(u * v))"),
    (true, "(x + 1) * (x + 1) = x * x + 2 * x + 1"),
    (true, "x * 0 = 0 * x"),
    (true, "(x * y)/(x * y) = (x/x) * (y/y)"),
    (true, "1/(x * x) = (1/x) * (1/x)"),
    (true, "(x/y)/z = x/(y * z)"),
    (true, "2/2 = 1 + 0 * (1/2)"),
    (true, "0/2 = 0 * (1/2)"),
    (true, "1/2 + 1/2 = 2/2"),
    (true, "(x * x - 1)/(x - 1) = (x + 1) * ((x - 1)/(x - 1))"),
    (true, "(x + y) * (x - y) = x * x - y * y + 0 * x"),
    (true, "x/(x * y) = (x * x)/(x * x * y)"),
    (true, "3/6 = 1/2 + 0 * (1/3)"),
    (false, "x - x = 0"),
    (false, "x * 1 + (-x) = 0"),
    (false, "x * 0 = 0"),
    (false, "x/x = 1"),
    (false, "1/2 = 3/6"),
    (false, "0/1 = 0/x"),
    (false, "x/x = 1 + 0 * x"),
    (false, "(x * x)/(x * x) = 1"),
    (false, "1/x = x/(x * x * x)"),
    (false, "x/x + 0 * y = (x * y)/(x * y)"),
    (false, "1/x = 1/(x + 1) * (x + 1)/x"),
    (false, "(x * y)/(x * y) = y/y + 0 * x"),
    (false, "x/(x * y) = 2 * x/(x * y)"),
    (false, "x + y = y + x + 0 * z"),
    (false, "x * x = x"),
    (false, "x * x * x = x"),
    (false, "1/3 = 2/6"),
    (false, "2/2 = 1"),
    (false, "1 + 1 = 0"),
    (false, "x/(y/z) = (x * z)/y"),
    (false, "(1/x) * x = 1"),
    (false, "bot = 0 * x"),
    (false, "x/0 = 0/x"),
    (false, "0 * x = 0 * y"),
];

fn decision_procedure() -> Outcome {
    let oracle = OracleConfig::default();
    let mut failures = Vec::new();
    for &(expect_valid, text) in CURATED {
        let e = parse_equation(text).expect("curated equation parses");
        let verdict = decide(&e);
        let refuted = oracle_battery(&e, &oracle).is_refuted();
        let ok = match &verdict {
            Verdict::Valid { .. } => expect_valid && !refuted,
            Verdict::Invalid { countermodel, .. } => {
                !expect_valid && refuted && countermodel.as_ref().is_some_and(|cm| cm.refutes(&e))
            }
        };
        if !ok {
            failures.push(text);
        }
    }
    let valid = CURATED.iter().filter(|(v, _)| *v).count();
    Outcome {
        passed: failures.is_empty() && CURATED.len() >= 40,
        detail: format!(
            "{} equations ({valid} valid, {} invalid), {} mismatches{}",
            CURATED.len(),
            CURATED.len() - valid,
            failures.len(),
            failures.first().map_or(String::new(), |e| format!(", first: {e}"))
        ),
    }
}

fn differential_campaign() -> Outcome {
    let started = Instant::now();
    let report = differential_run(500, &GenConfig::default().with_seed(20_240_501));
    let refuted_valid = report.count(Mismatch::ValidButRefuted);
    Outcome {
        passed: report.passed() && refuted_valid == 0 && started.elapsed() < Duration::from_secs(600),
        detail: report.summary(),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: u32) -> Poly {
    loop {
        let terms = rng.random_range(1..=4);
        let p = Poly::from_terms((0..terms).map(|_| {
            let total = rng.random_range(0..=max_degree);
            let mut powers = [0u32; 3];
            for _ in 0..total {
                powers[rng.random_range(0..3)] += 1;
            }
            let m = Monomial::from_powers(
                VARS.iter()
                    .zip(powers)
                    .filter(|(_, e)| *e > 0)
                    .map(|(x, e)| (x.to_string(), e)),
            );
            let c = rng.random_range(1..=4) * if rng.random_bool(0.5) { 1 } else { -1 };
            (m, q(c, 1))
        }));
        if !p.is_zero() {
            return p;
        }
    }
}

fn polynomial_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = [0usize; 3];
    for _ in 0..1000 {
        // gcd(a c, b c) = gcd(a, b) c up to a constant; degrees stay <= 6
        let (a, b, c) = (
            random_poly(&mut rng, 3),
            random_poly(&mut rng, 3),
            random_poly(&mut rng, 3),
        );
        let lhs = gcd(&(&a * &c), &(&b * &c)).expect("nonzero");
        let rhs = &gcd(&a, &b).expect("nonzero") * &c;
        failures[0] += usize::from(!associated(&lhs, &rhs));

        // squarefree part is idempotent, also on a square
        let p = random_poly(&mut rng, 6);
        let s = squarefree_part(&p).expect("nonzero");
        let square = squarefree_part(&a.pow(2)).expect("nonzero");
        let ok = associated(&squarefree_part(&s).expect("nonzero"), &s)
            && associated(&square, &squarefree_part(&a).expect("nonzero"));
        failures[1] += usize::from(!ok);

        // equal zero sets form an equivalence relation
        let k = Poly::int(rng.random_range(1..=5));
        let (x, y, z) = (a.clone(), &a.pow(2) * &k, &(&a * &a) * &a);
        let rel = |u: &Poly, v: &Poly| same_zero_set(u, v).expect("nonzero");
        let ok = rel(&p, &p)
            && rel(&p, &b) == rel(&b, &p)
            && rel(&x, &y)
            && rel(&y, &x)
            && rel(&y, &z)
            && rel(&x, &z)
            && (!(rel(&p, &b) && rel(&b, &c)) || rel(&p, &c));
        failures[2] += usize::from(!ok);
    }
    Outcome {
        passed: failures == [0, 0, 0],
        detail: format!(
            "1000 instances; failures gcd={} squarefree={} zero-set={}",
            failures[0], failures[1], failures[2]
        ),
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 6] = [
        ("axiom-soundness", axiom_soundness),
        ("flattening", flattening),
        ("normalization", normalization),
        ("decision-procedure", decision_procedure),
        ("differential-campaign", differential_campaign),
        ("polynomial-kernel", polynomial_kernel),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        report(i + 1, name, started, &outcome);
        if !outcome.passed {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn curated_suite_is_large_enough_and_unique() {
    let mut seen = std::collections::BTreeSet::new();
    for (_, text) in CURATED {
        let e = parse_equation(text).unwrap();
        assert!(seen.insert(e.to_string()), "duplicate: {text}");
        assert!(e.lhs != Term::Zero || e.rhs != Term::Zero);
    }
    assert!(CURATED.len() >= 40);
}
