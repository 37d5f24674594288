//! Fixed-`m` verifier.
//!
//! Everything here works with a concrete integer `m` and exact rationals,
//! and shares no arithmetic with the parametric pipeline: the field
//! multiplication, conjugation, basis table and factor pairings are written
//! out again from the defining formulas. Agreement between the two sides
//! is the main evidence that the symbolic factors are right.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::CaseTag;
use crate::index_form::QFactorSet;
use crate::polyring::{IntPolynomial, Var};

/// Element of `Q(i, m^(1/4))` for a concrete `m`; coordinate `4a + b`
/// belongs to `i^a theta^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericFieldElement {
    m: BigInt,
    c: [BigRational; 8],
}

impl NumericFieldElement {
    pub fn new(m: i64, c: [BigRational; 8]) -> Self {
        NumericFieldElement { m: m.into(), c }
    }

    pub fn zero(m: i64) -> Self {
        Self::new(m, std::array::from_fn(|_| BigRational::zero()))
    }

    pub fn integer(m: i64, v: i64) -> Self {
        let mut e = Self::zero(m);
        e.c[0] = BigRational::from_integer(v.into());
        e
    }

    /// `i^a theta^b` with `a < 2`, `b < 4`.
    pub fn unit(m: i64, a: usize, b: usize) -> Self {
        let mut e = Self::zero(m);
        e.c[4 * a + b] = BigRational::one();
        e
    }

    pub fn coords(&self) -> &[BigRational; 8] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn rational_value(&self) -> Option<BigRational> {
        self.c[1..].iter().all(Zero::is_zero).then(|| self.c[0].clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { m: self.m.clone(), c: std::array::from_fn(|l| &self.c[l] + &o.c[l]) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { m: self.m.clone(), c: std::array::from_fn(|l| &self.c[l] - &o.c[l]) }
    }

    pub fn neg(&self) -> Self {
        Self { m: self.m.clone(), c: std::array::from_fn(|l| -&self.c[l]) }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self { m: self.m.clone(), c: std::array::from_fn(|l| &self.c[l] * s) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(0);
        out.m = self.m.clone();
        let m = BigRational::from_integer(self.m.clone());
        for (p, x) in self.c.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (q, y) in o.c.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let (mut a, mut b) = (p / 4 + q / 4, p % 4 + q % 4);
                let mut v = x * y;
                if a >= 2 {
                    a -= 2;
                    v = -v;
                }
                if b >= 4 {
                    b -= 4;
                    v *= &m;
                }
                out.c[4 * a + b] += v;
            }
        }
        out
    }

    fn pow(&self, e: usize) -> Self {
        let mut acc = Self::integer(0, 1);
        acc.m = self.m.clone();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Image under `i -> +-i` (`+` for `j = 1`) and `theta -> i^(k-1) theta`.
    pub fn conjugate(&self, j: u8, k: u8) -> Self {
        let m = self.m.to_i64().expect("m fits in i64");
        let omega = if j == 1 { Self::unit(m, 1, 0) } else { Self::unit(m, 1, 0).neg() };
        let theta = Self::unit(m, 1, 0).pow(k as usize - 1).mul(&Self::unit(m, 0, 1));
        let mut out = Self::zero(m);
        for (l, x) in self.c.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            let image = omega.pow(l / 4).mul(&theta.pow(l % 4));
            out = out.add(&image.scale(x));
        }
        out
    }

    /// Conjugates in the order `(1,1) .. (1,4), (2,1) .. (2,4)`.
    pub fn conjugates(&self) -> Vec<Self> {
        (1..=2).flat_map(|j| (1..=4).map(move |k| (j, k))).map(|(j, k)| self.conjugate(j, k)).collect()
    }
}

impl fmt::Display for NumericFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = ["", "t", "t^2", "t^3", "i", "i*t", "i*t^2", "i*t^3"];
        let parts: Vec<String> = self
            .c
            .iter()
            .zip(labels)
            .filter(|(x, _)| !x.is_zero())
            .map(|(x, l)| if l.is_empty() { x.to_string() } else { format!("({x})*{l}") })
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Case of an admissible `m`: square-free, positive, `m = 2, 3 (mod 4)`.
pub fn admissible_case(m: i64) -> Result<CaseTag> {
    if m < 2 {
        return Err(Error::InadmissibleParameter(m));
    }
    let square_free = (2..).take_while(|d| d * d <= m).all(|d| m % (d * d) != 0);
    match (square_free, m % 4) {
        (true, 2) => Ok(CaseTag::CaseI),
        (true, 3) => Ok(CaseTag::CaseII),
        _ => Err(Error::InadmissibleParameter(m)),
    }
}

/// Integral basis for the case of `m`, each element a list of
/// `(coefficient, i-power, theta-power)` over the denominator 2.
fn basis_table(case: CaseTag) -> [&'static [(i64, usize, usize)]; 8] {
    match case {
        CaseTag::CaseI => [
            &[(2, 0, 0)],
            &[(2, 0, 1)],
            &[(2, 0, 2)],
            &[(2, 0, 3)],
            &[(2, 1, 0)],
            &[(1, 0, 1), (1, 1, 1), (1, 0, 3)],
            &[(1, 0, 2), (1, 1, 2)],
            &[(1, 0, 3), (1, 1, 3)],
        ],
        CaseTag::CaseII => [
            &[(2, 0, 0)],
            &[(2, 0, 1)],
            &[(2, 0, 2)],
            &[(2, 0, 3)],
            &[(1, 1, 0), (1, 0, 2)],
            &[(1, 1, 1), (1, 0, 3)],
            &[(1, 0, 0), (1, 1, 2)],
            &[(1, 0, 1), (1, 1, 3)],
        ],
    }
}

/// `x_1 b_1 + ... + x_8 b_8` for the integral basis of the case of `m`.
pub fn element_from_basis(m: i64, x: &[i64; 8]) -> Result<NumericFieldElement> {
    let case = admissible_case(m)?;
    let mut c: [BigRational; 8] = std::array::from_fn(|_| BigRational::zero());
    for (xl, terms) in x.iter().zip(basis_table(case)) {
        for &(coef, a, b) in terms {
            c[4 * a + b] += BigRational::new(BigInt::from(coef * xl), BigInt::from(2));
        }
    }
    Ok(NumericFieldElement::new(m, c))
}

/// `|D_K|` for an admissible `m`.
pub fn field_discriminant(m: i64) -> Result<BigInt> {
    let two_power = match admissible_case(m)? {
        CaseTag::CaseI => 18,
        CaseTag::CaseII => 16,
    };
    Ok(BigInt::from(2).pow(two_power) * BigInt::from(m).pow(6))
}

/// `I(alpha) = sqrt(|D(alpha)| / |D_K|)` with `D(alpha)` the product of the
/// squared differences over all 28 conjugate pairs.
pub fn direct_index(m: i64, x: &[i64; 8]) -> Result<BigInt> {
    let alpha = element_from_basis(m, x)?;
    let conj = alpha.conjugates();
    let mut prod = NumericFieldElement::integer(m, 1);
    for s in 0..8 {
        for t in s + 1..8 {
            let d = conj[s].sub(&conj[t]);
            if d.is_zero() {
                return Err(Error::NotPrimitive);
            }
            prod = prod.mul(&d).mul(&d);
        }
    }
    let disc = prod
        .rational_value()
        .ok_or_else(|| Error::NotRational { coord: "1".into(), value: prod.to_string() })?;
    if !disc.is_integer() {
        return Err(Error::NotIntegral { value: disc.to_string() });
    }
    let (quotient, rem) = disc.to_integer().abs().div_rem(&field_discriminant(m)?);
    if !rem.is_zero() {
        return Err(Error::NonSquareQuotient { quotient: format!("{disc} / D_K") });
    }
    let root = quotient.sqrt();
    if &root * &root != quotient {
        return Err(Error::NonSquareQuotient { quotient: quotient.to_string() });
    }
    Ok(root)
}

/// `(j, k)` of an embedding.
type Embedding = (u8, u8);

/// The six conjugate-difference products at a concrete point, in the
/// grouping of the factorization (norms from `Q(i)` for the first two).
pub fn direct_s_factors(m: i64, x: &[i64; 8]) -> Result<[BigInt; 6]> {
    let alpha = element_from_basis(m, x)?;
    let at = |j: u8, k: u8| alpha.conjugate(j, k);
    let product = |pairs: &[(Embedding, Embedding)]| {
        pairs.iter().fold(NumericFieldElement::integer(m, 1), |acc, &((j1, k1), (j2, k2))| {
            acc.mul(&at(j1, k1).sub(&at(j2, k2)))
        })
    };
    let with_j = |j: u8, pairs: &[(u8, u8)]| -> Vec<((u8, u8), (u8, u8))> {
        pairs.iter().map(|&(a, b)| ((j, a), (j, b))).collect()
    };
    let s1_pairs = [(1, 2), (2, 3), (3, 4), (4, 1)];
    let s2_pairs = [(1, 3), (2, 4)];
    let products = [
        product(&with_j(1, &s1_pairs)).mul(&product(&with_j(2, &s1_pairs))),
        product(&with_j(1, &s2_pairs)).mul(&product(&with_j(2, &s2_pairs))),
        product(&[((1, 1), (2, 1)), ((1, 2), (2, 2)), ((1, 3), (2, 3)), ((1, 4), (2, 4))]),
        product(&[((1, 1), (2, 4)), ((1, 2), (2, 1)), ((1, 3), (2, 2)), ((1, 4), (2, 3))]),
        product(&[((1, 1), (2, 3)), ((1, 2), (2, 4)), ((1, 3), (2, 1)), ((1, 4), (2, 2))]),
        product(&[((1, 1), (2, 2)), ((1, 2), (2, 3)), ((1, 3), (2, 4)), ((1, 4), (2, 1))]),
    ];
    let mut out = Vec::with_capacity(6);
    for p in products {
        let v = p.rational_value().ok_or_else(|| Error::NotRational { coord: "1".into(), value: p.to_string() })?;
        if !v.is_integer() {
            return Err(Error::NotIntegral { value: v.to_string() });
        }
        out.push(v.to_integer());
    }
    Ok(out.try_into().unwrap())
}

/// Exact evaluation of a polynomial at integer bindings given by name.
pub fn specialize(p: &IntPolynomial, bindings: &[(&str, i64)]) -> Result<BigInt> {
    let map: HashMap<Var, BigInt> = bindings.iter().map(|&(v, x)| (Var::new(v), BigInt::from(x))).collect();
    p.eval(&map)
}

/// Bindings `n`, `x1..x8` for a concrete `m` of the factors' case.
fn point_bindings(n: i64, x: &[i64; 8]) -> HashMap<Var, BigInt> {
    let mut map: HashMap<Var, BigInt> = (1..=8).map(|l| (Var::x(l), BigInt::from(x[l - 1]))).collect();
    map.insert(Var::n(), n.into());
    map
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub coords: [i64; 8],
    pub index: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub m: i64,
    pub n: i64,
    pub case: CaseTag,
    pub seed: u64,
    pub bound: i64,
    pub samples: usize,
    pub checked: usize,
    pub skipped_non_primitive: usize,
    /// Samples whose six factors were also compared one by one.
    pub factor_checks: usize,
    pub min_index: Option<String>,
    pub max_index: Option<String>,
    pub records: Vec<SampleRecord>,
}

impl CrosscheckReport {
    pub fn table(&self) -> String {
        let mut out = format!(
            "m = {} ({}), seed {}, bound {}: {} checked, {} skipped as non-primitive, {} factor-wise\n",
            self.m, self.case, self.seed, self.bound, self.checked, self.skipped_non_primitive, self.factor_checks
        );
        out.push_str(&format!("{:<40} {}\n", "coordinates", "index"));
        for r in &self.records {
            out.push_str(&format!("{:<40} {}\n", format!("{:?}", r.coords), r.index));
        }
        out
    }
}

enum Outcome {
    Skipped,
    Checked { index: BigInt, factor_checked: bool },
}

fn check_sample(q: &QFactorSet, m: i64, n: i64, x: &[i64; 8], factor_wise: bool) -> Result<Outcome> {
    let direct = match direct_index(m, x) {
        Ok(v) => v,
        Err(Error::NotPrimitive) => return Ok(Outcome::Skipped),
        Err(e) => return Err(e),
    };
    let bindings = point_bindings(n, x);
    let values: Vec<BigInt> = q.q.iter().map(|p| p.eval(&bindings)).collect::<Result<_>>()?;
    let symbolic: BigInt = values.iter().product::<BigInt>().abs();
    let mismatch = |symbolic: String| Error::Mismatch {
        m,
        coords: x.to_vec(),
        direct: direct.to_string(),
        symbolic,
    };
    if symbolic != direct {
        return Err(mismatch(symbolic.to_string()));
    }
    if factor_wise {
        let s = direct_s_factors(m, x)?;
        for l in 0..6 {
            let expected = &values[l] * q.multipliers[l].eval(&bindings)?;
            if expected != s[l] {
                return Err(mismatch(format!("S{} = {} but multiplier * Q{} = {}", l + 1, s[l], l + 1, expected)));
            }
        }
    }
    Ok(Outcome::Checked { index: direct, factor_checked: factor_wise })
}

/// Compares the direct index with `|Q1 ... Q6|` at `samples` random points
/// with coordinates in `[-bound, bound]`. The first few samples are also
/// compared factor by factor.
pub fn crosscheck(q: &QFactorSet, m: i64, samples: usize, bound: i64, seed: u64) -> Result<CrosscheckReport> {
    let case = admissible_case(m)?;
    if case != q.case {
        return Err(Error::CaseMismatch);
    }
    let n = (m - case.residue()) / 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[i64; 8]> = (0..samples)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-bound..=bound)))
        .collect();
    const FACTOR_WISE: usize = 8;
    let outcomes: Vec<Outcome> = points
        .par_iter()
        .enumerate()
        .map(|(idx, x)| check_sample(q, m, n, x, idx < FACTOR_WISE))
        .collect::<Result<_>>()?;

    let mut report = CrosscheckReport {
        m,
        n,
        case,
        seed,
        bound,
        samples,
        checked: 0,
        skipped_non_primitive: 0,
        factor_checks: 0,
        min_index: None,
        max_index: None,
        records: Vec::new(),
    };
    let mut min: Option<BigInt> = None;
    let mut max: Option<BigInt> = None;
    for (x, outcome) in points.iter().zip(outcomes) {
        match outcome {
            Outcome::Skipped => report.skipped_non_primitive += 1,
            Outcome::Checked { index, factor_checked } => {
                report.checked += 1;
                report.factor_checks += factor_checked as usize;
                if min.as_ref().is_none_or(|v| &index < v) {
                    min = Some(index.clone());
                }
                if max.as_ref().is_none_or(|v| &index > v) {
                    max = Some(index.clone());
                }
                report.records.push(SampleRecord { coords: *x, index: index.to_string() });
            }
        }
    }
    report.min_index = min.map(|v| v.to_string());
    report.max_index = max.map(|v| v.to_string());
    log::info!(
        "crosscheck m = {m}: {} checked, {} skipped, min index {:?}",
        report.checked,
        report.skipped_non_primitive,
        report.min_index
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn arithmetic_identities() {
        let i = NumericFieldElement::unit(7, 1, 0);
        let t = NumericFieldElement::unit(7, 0, 1);
        assert_eq!(i.mul(&i), NumericFieldElement::integer(7, -1));
        assert_eq!(t.pow(4), NumericFieldElement::integer(7, 7));
        assert_eq!(t.conjugate(1, 2), i.mul(&t));
        assert_eq!(i.conjugate(2, 3), i.neg());
    }

    #[test]
    fn admissibility() {
        assert_eq!(admissible_case(2).unwrap(), CaseTag::CaseI);
        assert_eq!(admissible_case(7).unwrap(), CaseTag::CaseII);
        assert!(admissible_case(18).is_err());
        assert!(admissible_case(5).is_err());
        assert!(admissible_case(12).is_err());
    }

    #[test]
    fn rational_elements_are_not_primitive() {
        assert!(matches!(direct_index(3, &[5, 0, 0, 0, 0, 0, 0, 0]), Err(Error::NotPrimitive)));
    }

    #[test]
    fn basis_elements_are_integral() {
        // (i + theta^2)/2 squared is (theta^4 - 1 + 2 i theta^2)/4 = (m - 1)/4 + (i theta^2)/2,
        // and with b7 = (1 + i theta^2)/2 that is an integer combination.
        let b5 = element_from_basis(3, &[0, 0, 0, 0, 1, 0, 0, 0]).unwrap();
        let sq = b5.mul(&b5);
        let expected = element_from_basis(3, &[0, 0, 0, 0, 0, 0, 1, 0]).unwrap();
        assert_eq!(sq, expected);
        assert_eq!(element_from_basis(2, &[1, 0, 0, 0, 0, 0, 0, 0]).unwrap().coords()[0], r(1));
    }

    #[test]
    fn shift_invariance() {
        let x = [0, 1, 0, 0, 1, 0, 0, 0];
        let base = direct_index(2, &x).unwrap();
        for c in [-3, 1, 7] {
            let mut y = x;
            y[0] = c;
            assert_eq!(direct_index(2, &y).unwrap(), base);
        }
        let neg = x.map(|v| -v);
        assert_eq!(direct_index(2, &neg).unwrap(), base);
    }
}
