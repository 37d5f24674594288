//! Arithmetic in `K = Q(i, θ)` with `θ^4 = m` and `m` a polynomial in `n`.
//!
//! Elements are stored on the monomial basis `i^a θ^b` (`a < 2`, `b < 4`),
//! coordinate index `4a + b`, so the order is `1, θ, θ², θ³, i, iθ, iθ², iθ³`.
//!
//! The eight embeddings are indexed `(j, k)` with `j ∈ {1, 2}`,
//! `k ∈ {1, 2, 3, 4}`: `i ↦ i` for `j = 1` and `i ↦ -i` for `j = 2`, and
//! `θ ↦ i^(k-1) θ` in both cases. Every index-form factor downstream depends
//! on this exact labelling.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{dyadic_sum, DyadicPolynomial, IntPolynomial, PolyAccumulator, Var};

/// Which residue class `m` lies in, with `m` written through the parameter `n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// `m = 4n + 2`
    CaseI,
    /// `m = 4n + 3`
    CaseII,
}

impl CaseTag {
    pub fn m_poly(self) -> IntPolynomial {
        let n = IntPolynomial::var(Var::n());
        &n.scale(&4.into()) + &IntPolynomial::constant(self.residue())
    }

    /// `m mod 4`.
    pub fn residue(self) -> i64 {
        match self {
            CaseTag::CaseI => 2,
            CaseTag::CaseII => 3,
        }
    }

    pub fn from_residue(r: i64) -> Option<CaseTag> {
        match r {
            2 => Some(CaseTag::CaseI),
            3 => Some(CaseTag::CaseII),
            _ => None,
        }
    }

    /// The case containing a concrete `m`, together with its parameter `n`.
    pub fn of_m(m: i64) -> Option<(CaseTag, i64)> {
        let tag = CaseTag::from_residue(m.rem_euclid(4))?;
        Some((tag, m.div_euclid(4)))
    }

    pub fn all() -> [CaseTag; 2] {
        [CaseTag::CaseI, CaseTag::CaseII]
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::CaseI => f.write_str("m = 4n+2"),
            CaseTag::CaseII => f.write_str("m = 4n+3"),
        }
    }
}

/// Embedding label `(j, k)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConjugationIndex {
    j: u8,
    k: u8,
}

impl ConjugationIndex {
    pub fn new(j: u8, k: u8) -> ConjugationIndex {
        assert!((1..=2).contains(&j) && (1..=4).contains(&k), "bad conjugation index ({j},{k})");
        ConjugationIndex { j, k }
    }

    pub fn j(self) -> u8 {
        self.j
    }

    pub fn k(self) -> u8 {
        self.k
    }

    /// All eight labels, `j` major.
    pub fn all() -> impl Iterator<Item = ConjugationIndex> {
        (1..=2).flat_map(|j| (1..=4).map(move |k| ConjugationIndex { j, k }))
    }

    /// Where the basis monomial `i^a θ^b` goes: `(sign, a')` with image
    /// `sign · i^a' θ^b`.
    fn image_of(self, a: usize, b: usize) -> (bool, usize) {
        let negate_i = self.j == 2 && a == 1;
        let e = (a + (self.k as usize - 1) * b) % 4;
        let (neg, a2) = match e {
            0 => (false, 0),
            1 => (false, 1),
            2 => (true, 0),
            _ => (true, 1),
        };
        (neg ^ negate_i, a2)
    }
}

impl fmt::Display for ConjugationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

pub const BASIS_LABELS: [&str; 8] = ["1", "θ", "θ^2", "θ^3", "i", "i*θ", "i*θ^2", "i*θ^3"];

/// An element of `K` with dyadic polynomial coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    coords: [DyadicPolynomial; 8],
    case: CaseTag,
}

impl FieldElement {
    pub fn from_coords(case: CaseTag, coords: [DyadicPolynomial; 8]) -> Self {
        FieldElement { coords, case }
    }

    pub fn zero(case: CaseTag) -> Self {
        FieldElement { coords: Default::default(), case }
    }

    pub fn one(case: CaseTag) -> Self {
        Self::rational(case, DyadicPolynomial::one())
    }

    pub fn rational(case: CaseTag, value: DyadicPolynomial) -> Self {
        let mut e = Self::zero(case);
        e.coords[0] = value;
        e
    }

    /// The basis monomial `i^a θ^b`.
    pub fn monomial(case: CaseTag, a: usize, b: usize) -> Self {
        assert!(a < 2 && b < 4);
        let mut e = Self::zero(case);
        e.coords[4 * a + b] = DyadicPolynomial::one();
        e
    }

    pub fn theta(case: CaseTag) -> Self {
        Self::monomial(case, 0, 1)
    }

    pub fn i(case: CaseTag) -> Self {
        Self::monomial(case, 1, 0)
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn coords(&self) -> &[DyadicPolynomial; 8] {
        &self.coords
    }

    pub fn coord(&self, a: usize, b: usize) -> &DyadicPolynomial {
        &self.coords[4 * a + b]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(DyadicPolynomial::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(DyadicPolynomial::is_zero)
    }

    fn check_case(&self, other: &FieldElement) -> Result<()> {
        if self.case == other.case {
            Ok(())
        } else {
            Err(Error::CaseMismatch)
        }
    }

    pub fn try_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_case(other)?;
        let coords = std::array::from_fn(|idx| &self.coords[idx] + &other.coords[idx]);
        Ok(FieldElement { coords, case: self.case })
    }

    pub fn try_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.try_add(&-other)
    }

    /// Product with `i^2 = -1` and `θ^4 = m(n)`.
    pub fn try_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_case(other)?;
        // shared denominators: 2^ka on self, 2^kb on other
        let ka = self.coords.iter().map(DyadicPolynomial::denom_exp).max().unwrap();
        let kb = other.coords.iter().map(DyadicPolynomial::denom_exp).max().unwrap();
        let lift = |d: &DyadicPolynomial, k: u32| d.numerator().shl(k - d.denom_exp());
        let xa: Vec<IntPolynomial> = self.coords.iter().map(|d| lift(d, ka)).collect();
        let xb: Vec<IntPolynomial> = other.coords.iter().map(|d| lift(d, kb)).collect();

        // plain[t] collects products landing on t; wrapped[t] those that
        // picked up a factor θ^4 = m.
        let mut plain: Vec<PolyAccumulator> = (0..8).map(|_| PolyAccumulator::new()).collect();
        let mut wrapped: Vec<PolyAccumulator> = (0..8).map(|_| PolyAccumulator::new()).collect();
        for (s, pa) in xa.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (t, pb) in xb.iter().enumerate() {
                if pb.is_zero() {
                    continue;
                }
                let (a1, b1, a2, b2) = (s / 4, s % 4, t / 4, t % 4);
                let negate = a1 + a2 == 2;
                let a = (a1 + a2) % 2;
                let b = b1 + b2;
                if b >= 4 {
                    wrapped[4 * a + b - 4].add_product(pa, pb, negate);
                } else {
                    plain[4 * a + b].add_product(pa, pb, negate);
                }
            }
        }
        let m = self.case.m_poly();
        let mut coords: [DyadicPolynomial; 8] = Default::default();
        for (idx, (p, w)) in plain.into_iter().zip(wrapped).enumerate() {
            let num = &p.finish() + &(&w.finish() * &m);
            coords[idx] = DyadicPolynomial::new(num, ka + kb);
        }
        Ok(FieldElement { coords, case: self.case })
    }

    pub fn scale(&self, c: &DyadicPolynomial) -> FieldElement {
        let coords = std::array::from_fn(|idx| &self.coords[idx] * c);
        FieldElement { coords, case: self.case }
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut out = FieldElement::one(self.case);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Image under the embedding `idx`, read back inside `K` through the
    /// identity embedding `(1,1)`.
    pub fn conjugate(&self, idx: ConjugationIndex) -> FieldElement {
        let mut coords: [DyadicPolynomial; 8] = Default::default();
        for a in 0..2 {
            for b in 0..4 {
                let src = &self.coords[4 * a + b];
                if src.is_zero() {
                    continue;
                }
                let (neg, a2) = idx.image_of(a, b);
                coords[4 * a2 + b] = if neg { -src } else { src.clone() };
            }
        }
        FieldElement { coords, case: self.case }
    }

    pub fn conjugates(&self) -> Vec<FieldElement> {
        ConjugationIndex::all().map(|idx| self.conjugate(idx)).collect()
    }

    /// The rational value of a rational element.
    pub fn assert_rational(&self) -> Result<DyadicPolynomial> {
        for (idx, c) in self.coords.iter().enumerate().skip(1) {
            if !c.is_zero() {
                return Err(Error::NotRational {
                    coord: BASIS_LABELS[idx].to_string(),
                    value: c.to_string(),
                });
            }
        }
        Ok(self.coords[0].clone())
    }

    /// Like [`assert_rational`](Self::assert_rational), additionally
    /// requiring integer coefficients.
    pub fn assert_integral_rational(&self) -> Result<IntPolynomial> {
        let value = self.assert_rational()?;
        if !value.is_integral() {
            return Err(Error::NotIntegral { value: value.to_string() });
        }
        Ok(value.into_integral().unwrap())
    }

    /// `N_{K/Q}`: product of the eight conjugates.
    pub fn norm(&self) -> Result<DyadicPolynomial> {
        product_tree(self.conjugates()).assert_rational()
    }

    /// Coefficients of `prod_{(j,k)} (X - e^{(j,k)})`, constant term first;
    /// nine entries with the last equal to 1.
    pub fn min_poly(&self) -> Result<Vec<DyadicPolynomial>> {
        let case = self.case;
        let mut coeffs = vec![FieldElement::one(case)];
        for conj in self.conjugates() {
            // multiply by (X - conj)
            let mut next = vec![FieldElement::zero(case); coeffs.len() + 1];
            for (d, c) in coeffs.iter().enumerate() {
                next[d + 1] = &next[d + 1] + c;
                next[d] = &next[d] - &(&conj * c);
            }
            coeffs = next;
        }
        coeffs.iter().map(FieldElement::assert_rational).collect()
    }

    /// Substitutes integer polynomials for variables in every coordinate.
    pub fn substitute(
        &self,
        bindings: &std::collections::HashMap<Var, IntPolynomial>,
    ) -> FieldElement {
        let coords = std::array::from_fn(|idx| {
            let c = &self.coords[idx];
            DyadicPolynomial::new(c.numerator().substitute(bindings), c.denom_exp())
        });
        FieldElement { coords, case: self.case }
    }
}

/// `N_{M/Q}` for `M = Q(i)` applied to an expression written with a free
/// conjugation index `j`: the product of its `j = 1` and `j = 2` instances.
pub fn norm_over_m<F>(expr: F) -> FieldElement
where
    F: Fn(u8) -> FieldElement,
{
    &expr(1) * &expr(2)
}

/// Product in a balanced tree.
pub fn product_tree(mut factors: Vec<FieldElement>) -> FieldElement {
    assert!(!factors.is_empty(), "empty product");
    while factors.len() > 1 {
        let mut next = Vec::with_capacity(factors.len().div_ceil(2));
        let mut it = factors.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(&a * &b),
                None => next.push(a),
            }
        }
        factors = next;
    }
    factors.pop().unwrap()
}

/// `sum_l coeffs[l] * elems[l]` with the sum formed over a common denominator.
pub fn linear_combination(case: CaseTag, terms: &[(DyadicPolynomial, &FieldElement)]) -> FieldElement {
    let coords = std::array::from_fn(|idx| {
        let parts: Vec<DyadicPolynomial> =
            terms.iter().map(|(c, e)| c * &e.coords[idx]).collect();
        dyadic_sum(parts.iter())
    });
    FieldElement { coords, case }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.try_add(rhs).expect("case mismatch")
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.try_sub(rhs).expect("case mismatch")
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.try_mul(rhs).expect("case mismatch")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            coords: std::array::from_fn(|idx| -&self.coords[idx]),
            case: self.case,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let label = BASIS_LABELS[idx];
            let single = c.numerator().len() == 1;
            match (idx, c.denom_exp(), single) {
                (0, _, _) => write!(f, "{c}")?,
                (_, 0, true) if c.numerator() == &IntPolynomial::one() => f.write_str(label)?,
                (_, 0, true) => write!(f, "{c}*{label}")?,
                (_, 0, false) => write!(f, "({c})*{label}")?,
                (_, k, true) if c.numerator() == &IntPolynomial::one() => {
                    write!(f, "{label}/{}", 1u64 << k)?
                }
                (_, k, true) => write!(f, "{}*{label}/{}", c.numerator(), 1u64 << k)?,
                (_, k, false) => write!(f, "({})*{label}/{}", c.numerator(), 1u64 << k)?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement[{:?}]({self})", self.case)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    fn half() -> DyadicPolynomial {
        DyadicPolynomial::dyadic_constant(1, 1)
    }

    #[test]
    fn reduction_rules() {
        let case = CaseTag::CaseII;
        let th = FieldElement::theta(case);
        let prod = &th * &th.pow(3);
        assert_eq!(prod.assert_integral_rational().unwrap(), p("4*n + 3"));
        let i = FieldElement::i(case);
        assert_eq!((&i * &i).assert_rational().unwrap(), DyadicPolynomial::constant(-1));

        let one_plus_i = &FieldElement::one(case) + &i;
        let e = (&one_plus_i * &th.pow(2)).scale(&half());
        let doubled = &e * &FieldElement::rational(case, DyadicPolynomial::constant(2));
        assert_eq!(doubled, &one_plus_i * &th.pow(2));
    }

    #[test]
    fn mixing_cases_is_an_error() {
        let a = FieldElement::theta(CaseTag::CaseI);
        let b = FieldElement::theta(CaseTag::CaseII);
        assert!(matches!(a.try_mul(&b), Err(Error::CaseMismatch)));
        assert!(matches!(a.try_add(&b), Err(Error::CaseMismatch)));
    }

    #[test]
    fn conjugation_examples() {
        let case = CaseTag::CaseI;
        let th = FieldElement::theta(case);
        let i = FieldElement::i(case);
        assert_eq!(th.conjugate(ConjugationIndex::new(1, 2)), &i * &th);
        assert_eq!(i.conjugate(ConjugationIndex::new(2, 3)), -&i);
        let r = FieldElement::rational(case, DyadicPolynomial::new(p("n + 5"), 1));
        for idx in ConjugationIndex::all() {
            assert_eq!(r.conjugate(idx), r);
        }
    }

    #[test]
    fn conjugations_are_distinct_on_theta_plus_i() {
        let case = CaseTag::CaseII;
        let e = &FieldElement::theta(case) + &FieldElement::i(case);
        let images = e.conjugates();
        for a in 0..8 {
            for b in a + 1..8 {
                assert_ne!(images[a], images[b]);
            }
        }
    }

    #[test]
    fn norm_over_m_examples() {
        let case = CaseTag::CaseI;
        let i = FieldElement::i(case);
        let e = norm_over_m(|j| if j == 1 { i.clone() } else { -&i });
        assert_eq!(e, FieldElement::one(case));
        assert_eq!(norm_over_m(|_| FieldElement::one(case)), FieldElement::one(case));
    }

    #[test]
    fn rationality_checks() {
        let case = CaseTag::CaseI;
        let th = FieldElement::theta(case);
        assert_eq!(th.pow(4).assert_integral_rational().unwrap(), p("4*n + 2"));
        assert!(matches!(th.assert_rational(), Err(Error::NotRational { .. })));
        let half_elem = FieldElement::rational(case, half());
        assert!(matches!(half_elem.assert_integral_rational(), Err(Error::NotIntegral { .. })));
    }

    #[test]
    fn norms() {
        for case in CaseTag::all() {
            let m = case.m_poly();
            assert_eq!(FieldElement::theta(case).norm().unwrap(), DyadicPolynomial::integral(m.pow(2)));
            assert_eq!(FieldElement::i(case).norm().unwrap(), DyadicPolynomial::one());
            let two = FieldElement::rational(case, DyadicPolynomial::constant(2));
            assert_eq!(two.norm().unwrap(), DyadicPolynomial::constant(256));
        }
    }

    #[test]
    fn minimal_polynomials() {
        let case = CaseTag::CaseII;
        let ints = |v: &[i64]| -> Vec<DyadicPolynomial> {
            v.iter().map(|&c| DyadicPolynomial::constant(c)).collect()
        };
        assert_eq!(FieldElement::i(case).min_poly().unwrap(), ints(&[1, 0, 4, 0, 6, 0, 4, 0, 1]));
        assert_eq!(
            FieldElement::zero(case).min_poly().unwrap(),
            ints(&[0, 0, 0, 0, 0, 0, 0, 0, 1])
        );
        let m = case.m_poly();
        let mut expected = vec![DyadicPolynomial::zero(); 9];
        expected[0] = DyadicPolynomial::integral(m.pow(2));
        expected[4] = DyadicPolynomial::integral(m.scale(&(-2).into()));
        expected[8] = DyadicPolynomial::one();
        assert_eq!(FieldElement::theta(case).min_poly().unwrap(), expected);
    }

    #[test]
    fn rendering() {
        let case = CaseTag::CaseII;
        let e = (&FieldElement::i(case) + &FieldElement::theta(case).pow(2)).scale(&half());
        assert_eq!(e.to_string(), "θ^2/2 + i/2");
        assert_eq!(FieldElement::zero(case).to_string(), "0");
        assert_eq!(FieldElement::theta(case).to_string(), "θ");
    }
}
