mod common;

use std::collections::BTreeMap;

use common::*;
use num_bigint::BigUint;
use proptest::prelude::*;

use meadow::polyalg::{
    content_primitive, divides, gcd, poly_to_sumterm, same_prime_support, same_zero_set, small_prime_factors,
    squarefree_part, term_to_poly,
};
use meadow::{Poly, SignatureTag};

proptest! {
    #[test]
    fn sumterm_round_trip(p in poly(4, 6)) {
        let t = poly_to_sumterm(&p);
        prop_assert!(t.is_pure(SignatureTag::Meadow));
        prop_assert_eq!(term_to_poly(&t).unwrap(), p);
    }

    #[test]
    fn expansion_agrees_with_reference_evaluation(t in term(SignatureTag::Ring, 5), xs in prop::collection::vec(-5i64..=5, 3)) {
        let p = term_to_poly(&t).unwrap();
        let env: BTreeMap<String, Option<_>> = VARS.iter().zip(&xs).map(|(v, &k)| (v.to_string(), Some(q(k, 1)))).collect();
        let point = env.iter().map(|(k, v)| (k.clone(), v.clone().unwrap())).collect();
        prop_assert_eq!(p.eval(&point), ref_eval_q(&t, &env));
    }

    #[test]
    fn content_times_primitive_reconstructs(p in nonzero_poly(5, 6)) {
        let split = content_primitive(&p).unwrap();
        prop_assert_eq!(split.reconstruct(), p);
        prop_assert!(split.primitive.is_integral());
        let again = content_primitive(&split.primitive).unwrap();
        prop_assert_eq!(again.content, q(1, 1));
    }

    #[test]
    fn prime_support_is_symmetric(a in 1u64..5000, b in 1u64..5000) {
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        prop_assert_eq!(same_prime_support(&a, &b), same_prime_support(&b, &a));
        prop_assert!(same_prime_support(&a, &(&a * &a)));
        let (fa, rest) = small_prime_factors(&a, 100);
        let product: BigUint = fa.iter().map(|&p| BigUint::from(p)).product();
        prop_assert!((&a % &product) == BigUint::from(0u32));
        prop_assert!(fa.iter().all(|p| (&rest % p) != BigUint::from(0u32)));
    }
}

// Polynomial kernel suites, at the sizes used by the acceptance run.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gcd_divides_both_and_is_multiplicative(a in nonzero_poly(3, 4), b in nonzero_poly(3, 4), c in nonzero_poly(3, 3)) {
        let g = gcd(&a, &b).unwrap();
        prop_assert!(divides(&g, &a) && divides(&g, &b));
        let gc = gcd(&(&a * &c), &(&b * &c)).unwrap();
        prop_assert!(associated(&gc, &(&g * &c)), "gcd(ac, bc) = {} but gcd(a, b) * c = {}", gc, &g * &c);
    }

    #[test]
    fn gcd_is_symmetric(a in poly(6, 5), b in poly(6, 5)) {
        prop_assume!(!(a.is_zero() && b.is_zero()));
        prop_assert!(associated(&gcd(&a, &b).unwrap(), &gcd(&b, &a).unwrap()));
    }

    #[test]
    fn squarefree_is_idempotent(a in nonzero_poly(3, 4), k in 1u32..=2) {
        let p = a.pow(k);
        let s = squarefree_part(&p).unwrap();
        prop_assert!(divides(&s, &p));
        prop_assert!(associated(&squarefree_part(&s).unwrap(), &s));
        prop_assert!(associated(&s, &squarefree_part(&a).unwrap()));
    }

    #[test]
    fn zero_set_is_an_equivalence(a in nonzero_poly(2, 3), b in nonzero_poly(2, 3), c in -3i64..=3, k in 1u32..=3) {
        prop_assume!(c != 0);
        // reflexive
        prop_assert!(same_zero_set(&a, &a).unwrap());
        // same roots: a, c * a^k, a^k * a
        let x = &a.pow(k) * &Poly::int(c);
        let y = &a.pow(k) * &a;
        prop_assert!(same_zero_set(&a, &x).unwrap());
        prop_assert_eq!(same_zero_set(&a, &x).unwrap(), same_zero_set(&x, &a).unwrap());
        prop_assert!(same_zero_set(&x, &y).unwrap());
        // symmetric on arbitrary pairs
        prop_assert_eq!(same_zero_set(&a, &b).unwrap(), same_zero_set(&b, &a).unwrap());
        // transitive through a multiple
        let ab = &a * &b;
        if same_zero_set(&a, &ab).unwrap() && same_zero_set(&ab, &x).unwrap() {
            prop_assert!(same_zero_set(&a, &x).unwrap());
        }
    }
}

#[test]
fn squarefree_examples_with_integer_content() {
    let p = |s: &str| term_to_poly(&meadow::parse(s).unwrap()).unwrap();
    let s = squarefree_part(&p("4*(x+1)*(x+1)*y")).unwrap();
    assert!(associated(&s, &p("(x+1)*y")));
    assert!(same_zero_set(&p("2*x*x"), &p("3*x")).unwrap());
    assert!(!same_zero_set(&p("x*(x+1)"), &p("x")).unwrap());
}
