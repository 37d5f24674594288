mod common;

use common::q_factors;
use num_bigint::BigInt;
use num_traits::Zero;
use octic_core::oracle::{crosscheck, direct_index, direct_s_factors, field_discriminant, specialize};
use octic_core::polyring::IntPolynomial;
use octic_core::{CaseTag, Error};

fn at_n0(case: CaseTag, x: &[i64; 8]) -> Vec<BigInt> {
    let names = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
    let mut bindings: Vec<(&str, i64)> = names.iter().copied().zip(x.iter().copied()).collect();
    bindings.push(("n", 0));
    q_factors(case).q.iter().map(|p| specialize(p, &bindings).unwrap()).collect()
}

#[test]
fn specialize_examples() {
    let p: IntPolynomial = "2^24*m^6".parse().unwrap();
    assert_eq!(specialize(&p, &[("m", 2)]).unwrap(), BigInt::from(1u64 << 30));
    assert_eq!(specialize(&IntPolynomial::zero(), &[("x2", 5)]).unwrap(), BigInt::zero());
    let unbound: IntPolynomial = "x2 + n".parse().unwrap();
    assert!(matches!(specialize(&unbound, &[("x2", 1)]), Err(Error::UnboundVariable(_))));
}

#[test]
fn subfield_generators_are_not_primitive() {
    // theta and (i + theta^2)/2 each have only four distinct conjugates
    assert!(matches!(direct_index(2, &[0, 1, 0, 0, 0, 0, 0, 0]), Err(Error::NotPrimitive)));
    assert!(matches!(direct_index(6, &[0, 1, 0, 0, 0, 0, 0, 0]), Err(Error::NotPrimitive)));
    assert!(matches!(direct_index(3, &[0, 0, 0, 0, 1, 0, 0, 0]), Err(Error::NotPrimitive)));
    // and the index form vanishes there
    assert!(at_n0(CaseTag::CaseII, &[0, 0, 0, 0, 1, 0, 0, 0]).iter().any(Zero::is_zero));
    assert!(at_n0(CaseTag::CaseI, &[0, 1, 0, 0, 0, 0, 0, 0]).iter().any(Zero::is_zero));
}

#[test]
fn golden_indices() {
    assert_eq!(direct_index(2, &[0, 1, 0, 0, 1, 0, 0, 0]).unwrap(), BigInt::from(73728));
    assert_eq!(direct_index(3, &[0, 1, 0, 0, 1, 0, 0, 0]).unwrap(), BigInt::from(29939));
    assert_eq!(direct_index(6, &[0, 0, 0, 0, 0, 1, 0, 0]).unwrap(), BigInt::from(56953125));
    let q = at_n0(CaseTag::CaseII, &[0, 1, 0, 0, 1, 0, 0, 0]);
    assert_eq!(q, [49, -1, 1, 1, -47, 13].map(BigInt::from).to_vec());
}

#[test]
fn discriminants_at_fixed_m() {
    assert_eq!(field_discriminant(2).unwrap(), BigInt::from(1u64 << 24));
    assert_eq!(field_discriminant(3).unwrap(), BigInt::from(65536u64 * 729));
    assert!(matches!(field_discriminant(5), Err(Error::InadmissibleParameter(5))));
}

#[test]
fn s_factors_match_the_symbolic_ones() {
    for (m, case) in [(2, CaseTag::CaseI), (7, CaseTag::CaseII)] {
        let x = [3, -1, 2, 0, 1, 1, -2, 1];
        let direct = direct_s_factors(m, &x).unwrap();
        let n = m / 4;
        let names = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
        let mut bindings: Vec<(&str, i64)> = names.iter().copied().zip(x).collect();
        bindings.push(("n", n));
        let s = &common::s_factors(case).s;
        for l in 0..6 {
            assert_eq!(specialize(&s[l], &bindings).unwrap(), direct[l], "S{}", l + 1);
        }
    }
}

#[test]
fn zero_bound_skips_everything() {
    let r = crosscheck(q_factors(CaseTag::CaseII), 7, 5, 0, 1).unwrap();
    assert_eq!((r.checked, r.skipped_non_primitive), (0, 5));
    assert_eq!(r.min_index, None);
}

#[test]
fn crosscheck_is_seeded() {
    let q = q_factors(CaseTag::CaseI);
    let a = crosscheck(q, 6, 6, 3, 42).unwrap();
    let b = crosscheck(q, 6, 6, 3, 42).unwrap();
    assert_eq!(a, b);
    assert!(matches!(crosscheck(q, 7, 1, 3, 1), Err(Error::CaseMismatch)));
    assert!(matches!(crosscheck(q, 18, 1, 3, 1), Err(Error::InadmissibleParameter(18))));
}
