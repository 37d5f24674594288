use octic_core::field::FieldElement;
use octic_core::oracle::direct_index;
use octic_core::polyring::{DyadicPolynomial, IntPolynomial};
use octic_core::{CaseTag, ConjugationIndex, Var};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = CaseTag> {
    prop_oneof![Just(CaseTag::CaseI), Just(CaseTag::CaseII)]
}

/// Coordinates `(a + b n) / 2^e` with small integers.
fn coordinate() -> impl Strategy<Value = DyadicPolynomial> {
    (-6i64..=6, -3i64..=3, 0u32..=2).prop_map(|(a, b, e)| {
        let num = IntPolynomial::constant(a) + IntPolynomial::var(Var::n()).scale(&b.into());
        DyadicPolynomial::new(num, e)
    })
}

fn element(case: CaseTag) -> impl Strategy<Value = FieldElement> {
    prop::array::uniform8(coordinate()).prop_map(move |c| FieldElement::from_coords(case, c))
}

fn pair() -> impl Strategy<Value = (FieldElement, FieldElement)> {
    case().prop_flat_map(|c| (element(c), element(c)))
}

fn constant_element(case: CaseTag, c: [i64; 8]) -> FieldElement {
    FieldElement::from_coords(case, c.map(DyadicPolynomial::constant))
}

fn sigma() -> impl Strategy<Value = ConjugationIndex> {
    (1u8..=2, 1u8..=4).prop_map(|(j, k)| ConjugationIndex::new(j, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn conjugation_is_a_ring_homomorphism((a, b) in pair(), s in sigma()) {
        prop_assert_eq!((&a * &b).conjugate(s), &a.conjugate(s) * &b.conjugate(s));
        prop_assert_eq!((&a + &b).conjugate(s), &a.conjugate(s) + &b.conjugate(s));
    }

    #[test]
    fn identity_conjugation_fixes_everything((a, _) in pair()) {
        prop_assert_eq!(a.conjugate(ConjugationIndex::new(1, 1)), a);
    }

    #[test]
    fn field_multiplication_axioms((a, b) in pair(), c in coordinate()) {
        prop_assert_eq!(&a * &b, &b * &a);
        let scaled = a.scale(&c);
        prop_assert_eq!(&scaled * &b, (&a * &b).scale(&c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn norm_is_multiplicative(c in case(), a in prop::array::uniform8(-3i64..=3), b in prop::array::uniform8(-3i64..=3)) {
        let a = constant_element(c, a);
        let b = constant_element(c, b);
        prop_assert_eq!((&a * &b).norm().unwrap(), &a.norm().unwrap() * &b.norm().unwrap());
    }
}

fn admissible_m() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![2i64, 3, 6, 7, 11, 14])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_ignores_sign_and_rational_shift(m in admissible_m(), x in prop::array::uniform8(-3i64..=3), c in -5i64..=5) {
        let base = match direct_index(m, &x) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        let mut shifted = x.map(|v| -v);
        shifted[0] += c;
        prop_assert_eq!(direct_index(m, &shifted).unwrap(), base);
    }
}
