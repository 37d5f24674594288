//! Residues of integer polynomials modulo powers of two.
//!
//! A polynomial `p` with integer coefficients induces a function
//! `Z^v -> Z/2^k`. Writing each power `t^d` in the binomial basis,
//! `t^d = sum_j surj(d, j) * C(t, j)` where `surj(d, j) = j! * S(d, j)`,
//! turns `p` into an integer combination of products `prod_v C(t_v, j_v)`.
//! These coefficients are the iterated forward differences of `p` at the
//! origin, so the function is constant iff every coefficient with `j != 0`
//! vanishes mod `2^k`. The test costs time proportional to the expanded term
//! count, never to the size of `(Z/2^k)^v`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::poly::low_u64;
use super::{IntPolynomial, Monomial, Var};

/// Outcome of [`constancy_mod`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstancyResult {
    Constant(u64),
    NonConstant(Witness),
}

impl ConstancyResult {
    pub fn residue(&self) -> Option<u64> {
        match self {
            ConstancyResult::Constant(r) => Some(*r),
            ConstancyResult::NonConstant(_) => None,
        }
    }
}

/// Two integer points at which a polynomial takes different residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub first: BTreeMap<String, i64>,
    pub first_residue: u64,
    pub second: BTreeMap<String, i64>,
    pub second_residue: u64,
}

fn mask(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `surj[d][j] = j! * S(d, j)` modulo `2^64`, for `d <= max_deg`.
fn surjection_table(max_deg: u32) -> Vec<Vec<u64>> {
    let max = max_deg as usize;
    let mut table = vec![vec![0u64; max + 1]; max + 1];
    table[0][0] = 1;
    for d in 1..=max {
        for j in 1..=d {
            let s = table[d - 1][j].wrapping_add(table[d - 1][j - 1]);
            table[d][j] = (j as u64).wrapping_mul(s);
        }
    }
    table
}

/// Coefficients of `p` on the multi-binomial basis, reduced mod `2^k`.
///
/// The returned monomial keys are reinterpreted: exponent `j` on variable
/// `v` stands for the factor `C(v, j)`. Zero coefficients are omitted.
pub fn binomial_coefficients(p: &IntPolynomial, k: u32) -> BTreeMap<Monomial, u64> {
    assert!((1..=64).contains(&k), "modulus exponent must lie in 1..=64");
    let max_deg = p
        .terms()
        .flat_map(|(m, _)| m.iter().map(|(_, e)| e))
        .max()
        .unwrap_or(0);
    let surj = surjection_table(max_deg);
    let mut acc: HashMap<Monomial, u64> = HashMap::new();
    for (mono, c) in p.terms() {
        let c = low_u64(c);
        // expand the product over variables one factor at a time
        let mut partial: Vec<(Monomial, u64)> = vec![(Monomial::one(), c)];
        for (v, d) in mono.iter() {
            let row = &surj[d as usize];
            let mut next = Vec::with_capacity(partial.len() * d as usize);
            for (m, a) in &partial {
                for (j, &s) in row.iter().enumerate().skip(1) {
                    let coef = a.wrapping_mul(s);
                    if coef & mask(k) != 0 {
                        next.push((m.mul(&Monomial::pow_of(v, j as u32)), coef));
                    }
                }
            }
            partial = next;
        }
        for (m, a) in partial {
            let e = acc.entry(m).or_insert(0);
            *e = e.wrapping_add(a);
        }
    }
    acc.into_iter()
        .map(|(m, a)| (m, a & mask(k)))
        .filter(|(_, a)| *a != 0)
        .collect()
}

/// Decides whether the function induced by `p` on integer points is constant
/// modulo `2^k`.
///
/// For a non-constant function the witness pair is the origin and the
/// binomial index of a lowest-degree surviving coefficient; below that index
/// every other coefficient vanishes, so the two residues differ by exactly
/// that coefficient.
pub fn constancy_mod(p: &IntPolynomial, k: u32) -> ConstancyResult {
    let coeffs = binomial_coefficients(p, k);
    let constant = coeffs.get(&Monomial::one()).copied().unwrap_or(0);
    let witness_index = coeffs
        .keys()
        .filter(|m| !m.is_one())
        .min_by_key(|m| m.degree());
    let Some(index) = witness_index else {
        return ConstancyResult::Constant(constant);
    };
    let origin: BTreeMap<Var, i64> = p.vars().into_iter().map(|v| (v, 0)).collect();
    let mut shifted = origin.clone();
    for (v, j) in index.iter() {
        shifted.insert(v, j as i64);
    }
    let eval = |point: &BTreeMap<Var, i64>| {
        let bindings: HashMap<Var, i64> = point.iter().map(|(&v, &x)| (v, x)).collect();
        p.eval_wrapping(&bindings).expect("all variables bound") & mask(k)
    };
    let named = |point: &BTreeMap<Var, i64>| {
        point.iter().map(|(v, &x)| (v.name(), x)).collect::<BTreeMap<_, _>>()
    };
    let first_residue = eval(&origin);
    let second_residue = eval(&shifted);
    debug_assert_ne!(first_residue, second_residue);
    ConstancyResult::NonConstant(Witness {
        first: named(&origin),
        first_residue,
        second: named(&shifted),
        second_residue,
    })
}

/// All residues `sum_i c_i * e_i mod 2^k` over sign vectors `e` in `{1,-1}^r`.
pub fn allowed_residues(coeffs: &[i64], k: u32) -> BTreeSet<u64> {
    assert!(!coeffs.is_empty(), "empty coefficient list");
    assert!(coeffs.len() < 32, "too many coefficients");
    let mut out = BTreeSet::new();
    for signs in 0u32..(1 << coeffs.len()) {
        let total = coeffs.iter().enumerate().fold(0i64, |acc, (i, &c)| {
            if signs >> i & 1 == 1 {
                acc.wrapping_sub(c)
            } else {
                acc.wrapping_add(c)
            }
        });
        out.insert(total as u64 & mask(k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn constant_examples() {
        assert_eq!(constancy_mod(&p("8*t2^2 + 8*t2"), 4), ConstancyResult::Constant(0));
        assert_eq!(constancy_mod(&p("37"), 4), ConstancyResult::Constant(5));
        assert_eq!(constancy_mod(&p("-1"), 3), ConstancyResult::Constant(7));
        assert_eq!(constancy_mod(&IntPolynomial::zero(), 5), ConstancyResult::Constant(0));
        // x^2 - x is always even, x^3 - x divisible by 6
        assert_eq!(constancy_mod(&p("x2^2 - x2 + 1"), 1), ConstancyResult::Constant(1));
        assert_eq!(constancy_mod(&p("x2^3 - x2"), 1), ConstancyResult::Constant(0));
    }

    #[test]
    fn nonconstant_shape_from_the_final_stage() {
        let q = p("8*t5^2 + 8*t7^2 + 8*t7 + 9");
        match constancy_mod(&q, 4) {
            ConstancyResult::NonConstant(w) => {
                assert_eq!(w.first_residue, 9);
                assert_eq!(w.second_residue, 1);
                assert_eq!(w.second["t5"], 1);
                assert_eq!(w.second["t7"], 0);
            }
            other => panic!("expected non-constant, got {other:?}"),
        }
        // the t7 part alone is constant
        assert_eq!(constancy_mod(&p("8*t7^2 + 8*t7 + 9"), 4), ConstancyResult::Constant(9));
    }

    #[test]
    fn allowed_sets() {
        assert_eq!(allowed_residues(&[1], 4), BTreeSet::from([1, 15]));
        assert_eq!(allowed_residues(&[1], 3), BTreeSet::from([1, 7]));
        assert_eq!(allowed_residues(&[1, -1, 1, -1], 4), BTreeSet::from([0, 2, 4, 12, 14]));
        assert_eq!(allowed_residues(&[1, -1], 3), BTreeSet::from([0, 2, 6]));
        assert_eq!(allowed_residues(&[1, -1], 5), BTreeSet::from([0, 2, 30]));
    }

    #[test]
    fn surjections() {
        let t = surjection_table(4);
        // 4! * S(4, j) = 1, 14, 36, 24
        assert_eq!(&t[4][1..], &[1, 14, 36, 24]);
    }
}
