use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use octic_core::polyring::{allowed_residues, constancy_mod, ConstancyResult, IntPolynomial, Monomial, Var};
use proptest::prelude::*;

fn vars() -> [Var; 3] {
    [Var::x(2), Var::x(3), Var::n()]
}

/// Up to six terms in three variables, exponents below `max_exp`.
fn poly(max_exp: u32, coef: i64) -> impl Strategy<Value = IntPolynomial> {
    prop::collection::vec((-coef..=coef, prop::array::uniform3(0..max_exp)), 0..6).prop_map(|terms| {
        IntPolynomial::from_terms(terms.into_iter().map(|(c, e)| {
            let m = Monomial::from_pairs(vars().into_iter().zip(e));
            (m, BigInt::from(c))
        }))
    })
}

/// Total degree at most 4, for the exhaustive constancy oracle.
fn low_degree_poly() -> impl Strategy<Value = IntPolynomial> {
    poly(3, 40).prop_filter("degree <= 4", |p| p.total_degree() <= 4)
}

fn eval_mod(p: &IntPolynomial, point: &[i64; 3], k: u32) -> u64 {
    let bindings: HashMap<Var, BigInt> = vars().into_iter().zip(point.map(BigInt::from)).collect();
    let v = p.eval(&bindings).unwrap();
    let m = BigInt::from(1u64 << k);
    (((v % &m) + &m) % &m).try_into().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in poly(4, 50), b in poly(4, 50), c in poly(4, 50)) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, IntPolynomial::zero());
        prop_assert_eq!(&a * &IntPolynomial::one(), a.clone());
        prop_assert_eq!(&a + &IntPolynomial::zero(), a.clone());
        prop_assert_eq!(-(-a.clone()), a);
    }

    #[test]
    fn exact_division_undoes_multiplication(a in poly(4, 50), b in poly(4, 50)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn canonical_text_parses_back(a in poly(5, 1000)) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<IntPolynomial>().unwrap(), a);
    }

    #[test]
    fn substitution_is_a_homomorphism(a in poly(3, 20), b in poly(3, 20), s in poly(2, 5), t in poly(2, 5)) {
        let sigma = HashMap::from([(Var::x(2), s), (Var::n(), t)]);
        prop_assert_eq!((&a * &b).substitute(&sigma), &a.substitute(&sigma) * &b.substitute(&sigma));
        prop_assert_eq!((&a + &b).substitute(&sigma), &a.substitute(&sigma) + &b.substitute(&sigma));
    }

    #[test]
    fn modular_substitution_agrees_with_reduction(a in poly(4, 1000), s in poly(2, 5), k in 1u32..6) {
        let sigma = HashMap::from([(Var::x(3), s)]);
        prop_assert_eq!(a.substitute_mod_pow2(&sigma, k), a.substitute(&sigma).reduce_mod_pow2(k));
    }

    #[test]
    fn constancy_matches_exhaustive_evaluation(p in low_degree_poly(), k in 1u32..=4) {
        // integer polynomials are 2^k-periodic modulo 2^k in each variable
        let period = 1i64 << k;
        let mut values = BTreeSet::new();
        for a in 0..period {
            for b in 0..period {
                for c in 0..period {
                    values.insert(eval_mod(&p, &[a, b, c], k));
                }
            }
        }
        match constancy_mod(&p, k) {
            ConstancyResult::Constant(r) => prop_assert_eq!(values, BTreeSet::from([r])),
            ConstancyResult::NonConstant(w) => {
                prop_assert!(values.len() > 1);
                prop_assert_ne!(w.first_residue, w.second_residue);
                for (point, residue) in [(&w.first, w.first_residue), (&w.second, w.second_residue)] {
                    let coords = vars().map(|v| point.get(&v.name()).copied().unwrap_or(0));
                    prop_assert_eq!(eval_mod(&p, &coords, k), residue);
                }
            }
        }
    }

    #[test]
    fn allowed_residues_are_closed_under_negation(coeffs in prop::collection::vec(-9i64..=9, 1..5), k in 1u32..7) {
        let set = allowed_residues(&coeffs, k);
        let modulus = 1u64 << k;
        for &r in &set {
            prop_assert!(set.contains(&((modulus - r) % modulus)));
        }
        let brute: BTreeSet<u64> = (0..1u32 << coeffs.len())
            .map(|signs| {
                let s: i64 = coeffs.iter().enumerate()
                    .map(|(l, &c)| if signs >> l & 1 == 1 { -c } else { c })
                    .sum();
                s.rem_euclid(modulus as i64) as u64
            })
            .collect();
        prop_assert_eq!(set, brute);
    }
}
