//! Integral bases of `K` and their discriminants.
//!
//! Besides the two closed-form bases, this module rediscovers them: starting
//! from `{i^a θ^b}` it repeatedly looks for an algebraic integer of the form
//! `(λ1 b1 + ... + λ8 b8) / 2` with `λ ∈ {0,1}^8` and swaps it into the basis,
//! which divides the discriminant by 4 each time.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{linear_combination, CaseTag, ConjugationIndex, FieldElement};
use crate::polyring::{DyadicPolynomial, IntPolynomial, Var};

/// An ordered basis of eight field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    elements: Vec<FieldElement>,
    case: CaseTag,
}

impl Basis {
    pub fn new(case: CaseTag, elements: Vec<FieldElement>) -> Result<Basis> {
        assert_eq!(elements.len(), 8, "a basis of K has eight elements");
        if elements.iter().any(|e| e.case() != case) {
            return Err(Error::CaseMismatch);
        }
        Ok(Basis { elements, case })
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn replace(&self, idx: usize, e: FieldElement) -> Basis {
        let mut elements = self.elements.clone();
        elements[idx] = e;
        Basis { elements, case: self.case }
    }

    /// `sum_l λ_l b_l` for the bits of `tuple`.
    pub fn combination(&self, tuple: CandidateTuple) -> FieldElement {
        let terms: Vec<(DyadicPolynomial, &FieldElement)> = (0..8)
            .filter(|&l| tuple.bit(l))
            .map(|l| (DyadicPolynomial::one(), &self.elements[l]))
            .collect();
        linear_combination(self.case, &terms)
    }

    pub fn render(&self) -> Vec<String> {
        self.elements.iter().map(ToString::to_string).collect()
    }
}

/// A nonzero coefficient vector `λ ∈ {0,1}^8`; bit `l` holds `λ_{l+1}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateTuple(u8);

impl CandidateTuple {
    pub fn new(bits: u8) -> CandidateTuple {
        assert!(bits != 0, "the zero tuple is not a candidate");
        CandidateTuple(bits)
    }

    pub fn from_lambdas(lambdas: [u8; 8]) -> CandidateTuple {
        let bits = lambdas
            .iter()
            .enumerate()
            .fold(0u8, |acc, (l, &b)| acc | ((b & 1) << l));
        CandidateTuple::new(bits)
    }

    /// All 255 candidates in increasing binary value.
    pub fn all() -> impl Iterator<Item = CandidateTuple> {
        (1..=255u8).map(CandidateTuple)
    }

    pub fn bit(self, l: usize) -> bool {
        self.0 >> l & 1 == 1
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// `λ1 λ2 ... λ8` as a string of digits.
    pub fn label(self) -> String {
        (0..8).map(|l| if self.bit(l) { '1' } else { '0' }).collect()
    }
}

fn el(case: CaseTag, a: usize, b: usize) -> FieldElement {
    FieldElement::monomial(case, a, b)
}

fn halve(e: FieldElement) -> FieldElement {
    e.scale(&DyadicPolynomial::dyadic_constant(1, 1))
}

/// `{1, θ, θ², θ³, i, iθ, iθ², iθ³}`.
pub fn initial_basis(case: CaseTag) -> Basis {
    let elements = (0..2)
        .flat_map(|a| (0..4).map(move |b| (a, b)))
        .map(|(a, b)| el(case, a, b))
        .collect();
    Basis { elements, case }
}

/// The closed-form integral basis for each residue class.
pub fn known_basis(case: CaseTag) -> Basis {
    let one = el(case, 0, 0);
    let th = el(case, 0, 1);
    let th2 = el(case, 0, 2);
    let th3 = el(case, 0, 3);
    let i = el(case, 1, 0);
    let ith = el(case, 1, 1);
    let ith2 = el(case, 1, 2);
    let ith3 = el(case, 1, 3);
    let elements = match case {
        CaseTag::CaseI => vec![
            one.clone(),
            th.clone(),
            th2.clone(),
            th3.clone(),
            i,
            // ((1+i)θ + θ³)/2
            halve(&(&th + &ith) + &th3),
            // (1+i)θ²/2
            halve(&th2 + &ith2),
            // (1+i)θ³/2
            halve(&th3 + &ith3),
        ],
        CaseTag::CaseII => vec![
            one.clone(),
            th.clone(),
            th2.clone(),
            th3.clone(),
            halve(&i + &th2),
            halve(&ith + &th3),
            halve(&one + &ith2),
            halve(&th + &ith3),
        ],
    };
    Basis { elements, case }
}

/// Determinant of a square matrix over `K` by cofactor expansion with
/// memoized minors (`2^d` subsets instead of `d!` permutations).
pub fn determinant(rows: &[Vec<FieldElement>]) -> FieldElement {
    let d = rows.len();
    assert!(d > 0 && d <= 16 && rows.iter().all(|r| r.len() == d));
    let case = rows[0][0].case();
    // minors[S] = det of the last |S| rows restricted to column set S
    let mut minors: Vec<Option<FieldElement>> = vec![None; 1 << d];
    minors[0] = Some(FieldElement::one(case));
    let mut by_size: Vec<usize> = (1..(1usize << d)).collect();
    by_size.sort_by_key(|s| s.count_ones());
    for s in by_size {
        let size = s.count_ones() as usize;
        let row = &rows[d - size];
        let mut acc = FieldElement::zero(case);
        let mut sign_pos = true;
        for c in 0..d {
            if s >> c & 1 == 0 {
                continue;
            }
            let entry = &row[c];
            if !entry.is_zero() {
                let sub = minors[s & !(1 << c)].as_ref().unwrap();
                let term = entry * sub;
                acc = if sign_pos { &acc + &term } else { &acc - &term };
            }
            sign_pos = !sign_pos;
        }
        minors[s] = Some(acc);
    }
    minors[(1 << d) - 1].take().unwrap()
}

/// `det(b_l^{(j,k)})^2`, a polynomial in `n`.
pub fn basis_discriminant(basis: &Basis) -> Result<IntPolynomial> {
    let rows: Vec<Vec<FieldElement>> = ConjugationIndex::all()
        .map(|idx| basis.elements.iter().map(|b| b.conjugate(idx)).collect())
        .collect();
    let det = determinant(&rows);
    (&det * &det).assert_integral_rational()
}

/// The same discriminant through the trace form `det(Tr(b_i b_j))`, using
/// `Tr(i^a θ^b) = 8` for `a = b = 0` and zero otherwise.
pub fn trace_form_discriminant(basis: &Basis) -> Result<IntPolynomial> {
    let traces: Vec<Vec<DyadicPolynomial>> = basis
        .elements
        .iter()
        .map(|x| {
            basis
                .elements
                .iter()
                .map(|y| (x * y).coords()[0].scale_int(&IntPolynomial::constant(8)))
                .collect()
        })
        .collect();
    // Bareiss elimination over Z[n] after clearing denominators row-wise
    let mut shift = 0u32;
    let mut mat: Vec<Vec<IntPolynomial>> = traces
        .iter()
        .map(|row| {
            let k = row.iter().map(DyadicPolynomial::denom_exp).max().unwrap_or(0);
            shift += k;
            row.iter().map(|d| d.numerator().shl(k - d.denom_exp())).collect()
        })
        .collect();
    let det = bareiss(&mut mat)?;
    let value = DyadicPolynomial::new(det, shift);
    value
        .clone()
        .into_integral()
        .ok_or(Error::NotIntegral { value: value.to_string() })
}

fn bareiss(mat: &mut [Vec<IntPolynomial>]) -> Result<IntPolynomial> {
    let d = mat.len();
    let mut prev = IntPolynomial::one();
    let mut sign = false;
    for k in 0..d {
        if mat[k][k].is_zero() {
            let Some(swap) = (k + 1..d).find(|&r| !mat[r][k].is_zero()) else {
                return Ok(IntPolynomial::zero());
            };
            mat.swap(k, swap);
            sign = !sign;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &(&mat[i][j] * &mat[k][k]) - &(&mat[i][k] * &mat[k][j]);
                mat[i][j] = num.exact_div(&prev)?;
            }
        }
        prev = mat[k][k].clone();
    }
    let det = mat[d - 1][d - 1].clone();
    Ok(if sign { -det } else { det })
}

/// Discriminant of `{1, θ, θ², θ³}` over the four embeddings with `j = 1`.
pub fn subfield_discriminant(case: CaseTag) -> Result<IntPolynomial> {
    let th = FieldElement::theta(case);
    let rows: Vec<Vec<FieldElement>> = (1..=4)
        .map(|k| {
            let conj = th.conjugate(ConjugationIndex::new(1, k));
            (0..4).map(|b| conj.pow(b)).collect()
        })
        .collect();
    let det = determinant(&rows);
    (&det * &det).assert_integral_rational()
}

/// `h` with `disc = 2^h m^6`, if the discriminant has that shape.
pub fn two_power_over_m6(disc: &IntPolynomial, case: CaseTag) -> Option<u32> {
    let rest = disc.exact_div(&case.m_poly().pow(6)).ok()?;
    let c = rest.as_constant()?;
    if c.is_positive() && (&c & (&c - 1u32)).is_zero() {
        Some(c.trailing_zeros().unwrap() as u32)
    } else {
        None
    }
}

/// Parameters of the candidate screening step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichmentConfig {
    /// `n` runs over the residues `0..residue_count`.
    pub residue_count: u32,
    /// The norm of the numerator must be divisible by this.
    pub norm_divisor: u64,
}

impl Default for EnrichmentConfig {
    fn default() -> Self {
        EnrichmentConfig { residue_count: 64, norm_divisor: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormTestReport {
    pub passed: bool,
    /// Residues of `n` at which the norm was not divisible.
    pub failing_residues: Vec<u32>,
}

/// Checks that `N(sum λ_l b_l)` is divisible by `norm_divisor` for every
/// tested residue of `n`.
pub fn candidate_norm_test(
    tuple: CandidateTuple,
    basis: &Basis,
    config: &EnrichmentConfig,
) -> Result<NormTestReport> {
    let norm = basis.combination(tuple).norm()?;
    let norm = norm
        .clone()
        .into_integral()
        .ok_or(Error::NotIntegral { value: norm.to_string() })?;
    let divisor = BigInt::from(config.norm_divisor);
    let mut failing = Vec::new();
    let mut bindings = std::collections::HashMap::new();
    for r in 0..config.residue_count {
        bindings.insert(Var::n(), BigInt::from(r));
        let value = norm.eval(&bindings)?;
        if !(value % &divisor).is_zero() {
            failing.push(r);
        }
    }
    Ok(NormTestReport { passed: failing.is_empty(), failing_residues: failing })
}

/// Whether every coefficient of the characteristic polynomial of `e` has
/// integer coefficients as a polynomial in `n`.
pub fn integrality_test(e: &FieldElement) -> Result<bool> {
    Ok(e.min_poly()?.iter().all(DyadicPolynomial::is_integral))
}

/// One screened candidate, as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub lambda: String,
    pub norm_test: bool,
    pub failing_residue_count: usize,
    pub integral: Option<bool>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichmentRound {
    pub discriminant_before: String,
    pub two_power_before: Option<u32>,
    pub candidates: Vec<CandidateRecord>,
    /// `(candidate, 1-based index of the replaced element)`.
    pub replaced: Option<(String, usize)>,
    pub new_element: Option<String>,
    pub discriminant_after: Option<String>,
}

pub enum EnrichmentOutcome {
    ImprovedBasis { basis: Basis, round: EnrichmentRound },
    NoCandidate { round: EnrichmentRound },
}

/// One round of the enrichment loop.
///
/// Candidates are scanned in increasing binary value. The first one that
/// passes the norm screen and is integral replaces the highest-indexed basis
/// element with `λ_l = 1` (the only positions where the swap keeps the
/// elements independent), provided the discriminant strictly drops.
pub fn enrich(basis: &Basis, config: &EnrichmentConfig) -> Result<EnrichmentOutcome> {
    let disc = basis_discriminant(basis)?;
    let screened: Vec<(CandidateTuple, NormTestReport)> = CandidateTuple::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| candidate_norm_test(t, basis, config).map(|r| (t, r)))
        .collect::<Result<_>>()?;

    let mut round = EnrichmentRound {
        discriminant_before: disc.to_string(),
        two_power_before: two_power_over_m6(&disc, basis.case),
        candidates: Vec::with_capacity(255),
        replaced: None,
        new_element: None,
        discriminant_after: None,
    };
    let mut improved = None;
    for (tuple, report) in screened {
        let mut record = CandidateRecord {
            lambda: tuple.label(),
            norm_test: report.passed,
            failing_residue_count: report.failing_residues.len(),
            integral: None,
            accepted: false,
        };
        if report.passed && improved.is_none() {
            let candidate = halve(basis.combination(tuple));
            let integral = integrality_test(&candidate)?;
            record.integral = Some(integral);
            if integral {
                for l in (0..8).rev().filter(|&l| tuple.bit(l)) {
                    let next = basis.replace(l, candidate.clone());
                    let next_disc = basis_discriminant(&next)?;
                    if next_disc.is_zero() {
                        continue;
                    }
                    // strictly smaller: old = 4^s * new with s >= 1
                    if let Ok(q) = disc.exact_div(&next_disc) {
                        if q.as_constant().is_some_and(|c| c > BigInt::one()) {
                            record.accepted = true;
                            round.replaced = Some((tuple.label(), l + 1));
                            round.new_element = Some(candidate.to_string());
                            round.discriminant_after = Some(next_disc.to_string());
                            improved = Some(next);
                            break;
                        }
                    }
                }
            }
        }
        round.candidates.push(record);
    }
    Ok(match improved {
        Some(basis) => EnrichmentOutcome::ImprovedBasis { basis, round },
        None => EnrichmentOutcome::NoCandidate { round },
    })
}

/// Result of running [`enrich`] to a fixed point.
pub struct EnrichmentTrace {
    pub rounds: Vec<EnrichmentRound>,
    pub final_basis: Basis,
    pub final_discriminant: IntPolynomial,
}

pub fn enrich_to_fixed_point(start: Basis, config: &EnrichmentConfig) -> Result<EnrichmentTrace> {
    let mut basis = start;
    let mut rounds = Vec::new();
    loop {
        match enrich(&basis, config)? {
            EnrichmentOutcome::ImprovedBasis { basis: next, round } => {
                rounds.push(round);
                basis = next;
            }
            EnrichmentOutcome::NoCandidate { round } => {
                rounds.push(round);
                let final_discriminant = basis_discriminant(&basis)?;
                return Ok(EnrichmentTrace { rounds, final_basis: basis, final_discriminant });
            }
        }
    }
}

/// Coordinates of the basis elements as rows of a rational matrix. Only
/// bases with constant coordinates qualify.
fn coordinate_matrix(basis: &Basis) -> Result<Vec<Vec<BigRational>>> {
    basis
        .elements
        .iter()
        .map(|e| {
            e.coords()
                .iter()
                .map(|c| {
                    let num = c.numerator().as_constant().ok_or_else(|| {
                        Error::Parse(format!("basis coordinate {c} depends on a variable"))
                    })?;
                    Ok(BigRational::new(num, BigInt::one() << c.denom_exp()))
                })
                .collect()
        })
        .collect()
}

/// Inverts a square rational matrix; `None` if singular.
fn invert(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let d = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..d)
        .map(|r| (0..d).map(|c| if r == c { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for c in 0..d {
            a[col][c] = &a[col][c] / &p;
            inv[col][c] = &inv[col][c] / &p;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..d {
                    let t = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &t;
                    let t = &f * &inv[col][c];
                    inv[r][c] = &inv[r][c] - &t;
                }
            }
        }
    }
    Some(inv)
}

fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let d = a.len();
    let mut det = BigRational::one();
    for col in 0..d {
        let Some(pivot) = (col..d).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = &row[col] / &p;
            for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = &*x - &(&f * y);
            }
        }
    }
    det
}

/// The matrix `C` with `from = C · to` on coordinates, i.e. the rows of `C`
/// express each element of `from` in terms of `to`.
pub fn change_of_basis(from: &Basis, to: &Basis) -> Result<Vec<Vec<BigRational>>> {
    let a = coordinate_matrix(from)?;
    let b = coordinate_matrix(to)?;
    let b_inv = invert(b).ok_or_else(|| Error::Parse("target basis is singular".into()))?;
    Ok(a.iter()
        .map(|row| {
            (0..8)
                .map(|c| row.iter().zip(&b_inv).fold(BigRational::zero(), |acc, (x, brow)| acc + x * &brow[c]))
                .collect()
        })
        .collect())
}

/// Whether two bases span the same lattice: the change-of-basis matrix is
/// integral with determinant ±1.
pub fn same_lattice(a: &Basis, b: &Basis) -> Result<bool> {
    let c = change_of_basis(a, b)?;
    if !c.iter().flatten().all(|x| x.is_integer()) {
        return Ok(false);
    }
    let det = rational_det(c);
    Ok(det.abs().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc_shape(case: CaseTag, h: u32) -> IntPolynomial {
        IntPolynomial::constant(BigInt::one() << h) * case.m_poly().pow(6)
    }

    #[test]
    fn basis_listings() {
        let b = initial_basis(CaseTag::CaseI);
        assert_eq!(b.elements()[4], FieldElement::i(CaseTag::CaseI));
        assert_eq!(initial_basis(CaseTag::CaseII).elements()[1], FieldElement::theta(CaseTag::CaseII));

        let k1 = known_basis(CaseTag::CaseI);
        assert_eq!(k1.elements()[6].to_string(), "θ^2/2 + i*θ^2/2");
        let k2 = known_basis(CaseTag::CaseII);
        assert_eq!(k2.elements()[4].to_string(), "θ^2/2 + i/2");
        assert_eq!(k2.elements()[0], FieldElement::one(CaseTag::CaseII));
    }

    #[test]
    fn discriminants() {
        for case in CaseTag::all() {
            assert_eq!(basis_discriminant(&initial_basis(case)).unwrap(), disc_shape(case, 24));
        }
        assert_eq!(basis_discriminant(&known_basis(CaseTag::CaseI)).unwrap(), disc_shape(CaseTag::CaseI, 18));
        assert_eq!(basis_discriminant(&known_basis(CaseTag::CaseII)).unwrap(), disc_shape(CaseTag::CaseII, 16));
    }

    #[test]
    fn trace_form_route_agrees() {
        for case in CaseTag::all() {
            for basis in [initial_basis(case), known_basis(case)] {
                assert_eq!(basis_discriminant(&basis).unwrap(), trace_form_discriminant(&basis).unwrap());
            }
        }
    }

    #[test]
    fn subfield() {
        for case in CaseTag::all() {
            let d = subfield_discriminant(case).unwrap();
            let expected = IntPolynomial::constant(-256) * case.m_poly().pow(3);
            assert_eq!(d, expected);
            assert!(d.leading_term().unwrap().1.is_negative());
        }
    }

    #[test]
    fn two_power_extraction() {
        let case = CaseTag::CaseII;
        assert_eq!(two_power_over_m6(&disc_shape(case, 16), case), Some(16));
        assert_eq!(two_power_over_m6(&(disc_shape(case, 16) * IntPolynomial::constant(3)), case), None);
        assert_eq!(two_power_over_m6(&case.m_poly(), case), None);
    }

    #[test]
    fn norm_screen() {
        let config = EnrichmentConfig::default();
        let case = CaseTag::CaseII;
        let b = initial_basis(case);
        // i + θ² has λ5 = λ3 = 1
        let t = CandidateTuple::from_lambdas([0, 0, 1, 0, 1, 0, 0, 0]);
        assert!(candidate_norm_test(t, &b, &config).unwrap().passed);
        let one = CandidateTuple::from_lambdas([1, 0, 0, 0, 0, 0, 0, 0]);
        let r = candidate_norm_test(one, &b, &config).unwrap();
        assert!(!r.passed);
        assert_eq!(r.failing_residues.len(), 64);
    }

    #[test]
    fn integrality() {
        let case = CaseTag::CaseII;
        let good = halve(&FieldElement::i(case) + &FieldElement::theta(case).pow(2));
        assert!(integrality_test(&good).unwrap());
        assert!(!integrality_test(&halve(FieldElement::theta(case))).unwrap());
        assert!(integrality_test(&FieldElement::i(case)).unwrap());
    }

    #[test]
    fn enrichment_reaches_the_closed_form_bases() {
        let config = EnrichmentConfig::default();
        for (case, h, rounds) in [(CaseTag::CaseI, 18, 3), (CaseTag::CaseII, 16, 4)] {
            let trace = enrich_to_fixed_point(initial_basis(case), &config).unwrap();
            assert_eq!(trace.final_discriminant, disc_shape(case, h));
            assert_eq!(trace.rounds.len(), rounds + 1);
            assert!(same_lattice(&trace.final_basis, &known_basis(case)).unwrap());
        }
    }

    #[test]
    fn lattice_comparison() {
        let case = CaseTag::CaseI;
        let b = known_basis(case);
        assert!(same_lattice(&b, &b).unwrap());
        // reorder and add a multiple of one element to another: same lattice
        let mut els = b.elements().to_vec();
        els.swap(2, 5);
        els[7] = &els[7] + &els[1];
        let shuffled = Basis::new(case, els).unwrap();
        assert!(same_lattice(&shuffled, &b).unwrap());
        assert!(!same_lattice(&initial_basis(case), &b).unwrap());
    }
}
