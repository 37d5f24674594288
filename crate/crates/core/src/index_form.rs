//! The index form of `K` split into six integer factors.
//!
//! For `α = x1 + x2 b2 + ... + x8 b8` on the closed-form integral basis, the
//! 28 conjugate differences `α^σ - α^τ` are grouped into six products
//! `S1..S6`, each of which is a rational integer polynomial in `n, x2..x8`.
//! Dividing out known constant factors leaves `Q1..Q6` with
//! `|Q1 ⋯ Q6| = I(α)`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{basis_discriminant, known_basis};
use crate::error::{Error, Result};
use crate::field::{linear_combination, norm_over_m, product_tree, CaseTag, ConjugationIndex, FieldElement};
use crate::polyring::{DyadicPolynomial, IntPolynomial, Var};

/// `x1 + x2 b2 + ... + x8 b8` with symbolic `x`.
pub fn generic_element(case: CaseTag) -> FieldElement {
    let basis = known_basis(case);
    let coeffs: Vec<DyadicPolynomial> = (1..=8)
        .map(|l| DyadicPolynomial::integral(IntPolynomial::var(Var::x(l))))
        .collect();
    let terms: Vec<(DyadicPolynomial, &FieldElement)> =
        coeffs.into_iter().zip(basis.elements()).collect();
    linear_combination(case, &terms)
}

fn ci(j: u8, k: u8) -> ConjugationIndex {
    ConjugationIndex::new(j, k)
}

/// Which conjugate differences make up one factor.
#[derive(Clone, Debug)]
pub struct FactorLayout {
    /// Ordered pairs `(σ, τ)` contributing `α^σ - α^τ`. For factors taken
    /// through `N_{M/Q}` these are written for `j = 1` and `second_j` holds
    /// the `j = 2` instance.
    pub pairs: Vec<(ConjugationIndex, ConjugationIndex)>,
    pub through_norm: bool,
}

impl FactorLayout {
    fn with_j(&self, j: u8) -> Vec<(ConjugationIndex, ConjugationIndex)> {
        self.pairs
            .iter()
            .map(|&(a, b)| (ci(j, a.k()), ci(j, b.k())))
            .collect()
    }

    /// Every difference the factor multiplies, with `N_{M/Q}` expanded.
    pub fn all_pairs(&self) -> Vec<(ConjugationIndex, ConjugationIndex)> {
        if self.through_norm {
            let mut v = self.with_j(1);
            v.extend(self.with_j(2));
            v
        } else {
            self.pairs.clone()
        }
    }
}

/// The six groupings, orientation included.
pub fn factor_layouts() -> [FactorLayout; 6] {
    let cyclic = |shift: u8| -> Vec<(ConjugationIndex, ConjugationIndex)> {
        (1..=4).map(|k| (ci(1, k), ci(2, (k + 3 + shift - 1) % 4 + 1))).collect()
    };
    [
        FactorLayout {
            pairs: vec![(ci(1, 1), ci(1, 2)), (ci(1, 2), ci(1, 3)), (ci(1, 3), ci(1, 4)), (ci(1, 4), ci(1, 1))],
            through_norm: true,
        },
        FactorLayout {
            pairs: vec![(ci(1, 1), ci(1, 3)), (ci(1, 2), ci(1, 4))],
            through_norm: true,
        },
        // (1,k) - (2,k)
        FactorLayout { pairs: cyclic(1), through_norm: false },
        // (1,k) - (2,k-1)
        FactorLayout { pairs: cyclic(0), through_norm: false },
        // (1,k) - (2,k+2)
        FactorLayout { pairs: cyclic(3), through_norm: false },
        // (1,k) - (2,k+1)
        FactorLayout { pairs: cyclic(2), through_norm: false },
    ]
}

/// `S1..S6` as integer polynomials in `n, x2..x8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SFactorSet {
    pub case: CaseTag,
    pub s: [IntPolynomial; 6],
}

fn build_factor(alpha: &FieldElement, layout: &FactorLayout) -> Result<IntPolynomial> {
    let conj: HashMap<ConjugationIndex, FieldElement> =
        ConjugationIndex::all().map(|idx| (idx, alpha.conjugate(idx))).collect();
    let diffs = |pairs: Vec<(ConjugationIndex, ConjugationIndex)>| -> FieldElement {
        product_tree(pairs.iter().map(|(a, b)| &conj[a] - &conj[b]).collect())
    };
    let value = if layout.through_norm {
        norm_over_m(|j| diffs(layout.with_j(j)))
    } else {
        diffs(layout.pairs.clone())
    };
    value.assert_integral_rational()
}

pub fn build_s_factors(case: CaseTag) -> Result<SFactorSet> {
    let alpha = generic_element(case);
    let layouts = factor_layouts();
    let built: Vec<IntPolynomial> = layouts
        .par_iter()
        .map(|layout| build_factor(&alpha, layout))
        .collect::<Result<_>>()?;
    Ok(SFactorSet { case, s: built.try_into().unwrap() })
}

/// The constant factors with `S_i = multiplier_i · Q_i`.
pub fn multiplier_table(case: CaseTag) -> [IntPolynomial; 6] {
    let p = |s: &str| s.parse::<IntPolynomial>().expect("static multiplier");
    match case {
        CaseTag::CaseI => [p("16*(2*n + 1)^2"), p("16*(2*n + 1)"), p("2"), p("2"), p("2"), p("2")],
        CaseTag::CaseII => [p("(4*n + 3)^2"), p("16*(4*n + 3)"), p("1"), p("4"), p("1"), p("4")],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QFactorSet {
    pub case: CaseTag,
    pub q: [IntPolynomial; 6],
    pub multipliers: [IntPolynomial; 6],
}

impl QFactorSet {
    /// `Q_i` with 1-based `i`.
    pub fn get(&self, i: usize) -> &IntPolynomial {
        &self.q[i - 1]
    }
}

pub fn extract_q_factors(s: &SFactorSet) -> Result<QFactorSet> {
    extract_q_factors_with(s, multiplier_table(s.case))
}

/// Divides each `S_i` by the given multiplier; any remainder is an error.
pub fn extract_q_factors_with(s: &SFactorSet, multipliers: [IntPolynomial; 6]) -> Result<QFactorSet> {
    let q: Vec<IntPolynomial> = s
        .s
        .par_iter()
        .zip(multipliers.par_iter())
        .map(|(si, d)| si.exact_div(d))
        .collect::<Result<_>>()?;
    Ok(QFactorSet { case: s.case, q: q.try_into().unwrap(), multipliers })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductIdentityReport {
    pub multiplier_product: String,
    pub expected: String,
    /// `(prod multipliers)^2 = D_K` of the closed-form basis.
    pub squares_to_discriminant: bool,
    /// `S1 ⋯ S6 = (prod multipliers) · Q1 ⋯ Q6`, checked factor by factor.
    pub factors_consistent: bool,
    pub passed: bool,
}

/// Checks `prod multipliers = 2^9 m^3` (`m = 4n+2`) or `2^8 m^3`
/// (`m = 4n+3`), and that this is `sqrt(|D_K|)`.
pub fn verify_product_identity(s: &SFactorSet, q: &QFactorSet) -> Result<ProductIdentityReport> {
    let case = q.case;
    let product = q.multipliers.iter().fold(IntPolynomial::one(), |acc, d| &acc * d);
    let power = match case {
        CaseTag::CaseI => 9,
        CaseTag::CaseII => 8,
    };
    let expected = IntPolynomial::constant(BigInt::one() << power) * case.m_poly().pow(3);
    let disc = basis_discriminant(&known_basis(case))?;
    let squares_to_discriminant = &product * &product == disc;
    let factors_consistent = s.case == case
        && s.s.iter().zip(&q.q).zip(&q.multipliers).all(|((si, qi), d)| &(d * qi) == si);
    let passed = product == expected && squares_to_discriminant && factors_consistent;
    Ok(ProductIdentityReport {
        multiplier_product: product.to_string(),
        expected: expected.to_string(),
        squares_to_discriminant,
        factors_consistent,
        passed,
    })
}

/// `Q1 ⋯ Q6` kept as its factors; the expanded product has total degree 28
/// in seven variables and is never needed in full.
#[derive(Clone, Debug)]
pub struct IndexForm {
    pub case: CaseTag,
    pub factors: [IntPolynomial; 6],
}

impl IndexForm {
    /// Signed value of `Q1 ⋯ Q6` at a point; `|value| = I(α)`.
    pub fn eval(&self, bindings: &HashMap<Var, BigInt>) -> Result<BigInt> {
        let mut acc = BigInt::one();
        for f in &self.factors {
            acc *= f.eval(bindings)?;
        }
        Ok(acc)
    }

    /// `I(α)` for integer coordinates `x1..x8` and parameter `n`.
    pub fn index_at(&self, n: i64, x: &[i64; 8]) -> Result<BigInt> {
        let mut bindings: HashMap<Var, BigInt> = (1..=8).map(|l| (Var::x(l), BigInt::from(x[l - 1]))).collect();
        bindings.insert(Var::n(), BigInt::from(n));
        Ok(self.eval(&bindings)?.abs())
    }

    /// The expanded product. Cost grows quickly with term counts; intended
    /// for specialized (few-variable) forms.
    pub fn expand(&self) -> IntPolynomial {
        crate::polyring::product_tree(self.factors.to_vec())
    }

    pub fn specialize(&self, bindings: &HashMap<Var, IntPolynomial>) -> IndexForm {
        IndexForm {
            case: self.case,
            factors: std::array::from_fn(|i| self.factors[i].substitute(bindings)),
        }
    }
}

pub fn index_form(q: &QFactorSet) -> IndexForm {
    IndexForm { case: q.case, factors: q.q.clone() }
}

/// `Q1 ⋯ Q6` for a case, built from scratch.
pub fn index_symbolic(case: CaseTag) -> Result<IndexForm> {
    let s = build_s_factors(case)?;
    Ok(index_form(&extract_q_factors(&s)?))
}

/// Term count and degrees of one factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorStats {
    pub name: String,
    pub terms: usize,
    pub total_degree: u32,
    pub degree_in_n: u32,
}

pub fn factor_stats(prefix: &str, polys: &[IntPolynomial]) -> Vec<FactorStats> {
    polys
        .iter()
        .enumerate()
        .map(|(i, p)| FactorStats {
            name: format!("{prefix}{}", i + 1),
            terms: p.len(),
            total_degree: p.total_degree(),
            degree_in_n: p.degree_in(Var::n()),
        })
        .collect()
}

/// Unordered pairs covered by the six layouts, with multiplicity.
pub fn pair_coverage() -> Vec<BTreeSet<ConjugationIndex>> {
    factor_layouts()
        .iter()
        .flat_map(FactorLayout::all_pairs)
        .map(|(a, b)| BTreeSet::from([a, b]))
        .collect()
}

impl SFactorSet {
    pub fn check_free_of_x1(&self) -> Result<()> {
        for (i, s) in self.s.iter().enumerate() {
            if s.contains_var(Var::x(1)) {
                return Err(Error::Parse(format!("S{} depends on x1", i + 1)));
            }
        }
        Ok(())
    }
}
