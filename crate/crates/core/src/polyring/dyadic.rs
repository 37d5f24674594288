use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use super::IntPolynomial;

/// `numerator / 2^denom_exp`, kept normalized: either the exponent is zero
/// or some coefficient of the numerator is odd.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DyadicPolynomial {
    numerator: IntPolynomial,
    denom_exp: u32,
}

impl DyadicPolynomial {
    pub fn new(numerator: IntPolynomial, denom_exp: u32) -> Self {
        let mut d = DyadicPolynomial { numerator, denom_exp };
        d.normalize();
        d
    }

    pub fn integral(numerator: IntPolynomial) -> Self {
        DyadicPolynomial { numerator, denom_exp: 0 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::integral(IntPolynomial::one())
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        Self::integral(IntPolynomial::constant(c))
    }

    /// `c / 2^k` as a constant.
    pub fn dyadic_constant<T: Into<BigInt>>(c: T, k: u32) -> Self {
        Self::new(IntPolynomial::constant(c), k)
    }

    fn normalize(&mut self) {
        if self.denom_exp == 0 {
            return;
        }
        let shift = match self.numerator.two_adic_valuation() {
            None => self.denom_exp,
            Some(v) => v.min(self.denom_exp as u64) as u32,
        };
        if shift > 0 {
            self.numerator = self.numerator.shr_exact(shift);
            self.denom_exp -= shift;
        }
    }

    pub fn numerator(&self) -> &IntPolynomial {
        &self.numerator
    }

    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.denom_exp == 0
    }

    pub fn into_integral(self) -> Option<IntPolynomial> {
        (self.denom_exp == 0).then_some(self.numerator)
    }

    /// The numerator rescaled to denominator `2^k` (`k >= denom_exp`).
    fn numerator_at(&self, k: u32) -> IntPolynomial {
        self.numerator.shl(k - self.denom_exp)
    }

    pub fn scale_int(&self, p: &IntPolynomial) -> Self {
        Self::new(&self.numerator * p, self.denom_exp)
    }
}

/// Sums dyadics over a shared denominator, normalizing once at the end.
pub fn dyadic_sum<'a, I: IntoIterator<Item = &'a DyadicPolynomial>>(items: I) -> DyadicPolynomial {
    let items: Vec<&DyadicPolynomial> = items.into_iter().collect();
    let k = items.iter().map(|d| d.denom_exp).max().unwrap_or(0);
    let mut acc = IntPolynomial::zero();
    for d in items {
        acc = acc + d.numerator_at(k);
    }
    DyadicPolynomial::new(acc, k)
}

impl<'a> Add<&'a DyadicPolynomial> for &'a DyadicPolynomial {
    type Output = DyadicPolynomial;
    fn add(self, rhs: &DyadicPolynomial) -> DyadicPolynomial {
        if self.denom_exp == rhs.denom_exp {
            return DyadicPolynomial::new(&self.numerator + &rhs.numerator, self.denom_exp);
        }
        let k = self.denom_exp.max(rhs.denom_exp);
        DyadicPolynomial::new(self.numerator_at(k) + rhs.numerator_at(k), k)
    }
}

impl<'a> Sub<&'a DyadicPolynomial> for &'a DyadicPolynomial {
    type Output = DyadicPolynomial;
    fn sub(self, rhs: &DyadicPolynomial) -> DyadicPolynomial {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a DyadicPolynomial> for &'a DyadicPolynomial {
    type Output = DyadicPolynomial;
    fn mul(self, rhs: &DyadicPolynomial) -> DyadicPolynomial {
        DyadicPolynomial::new(&self.numerator * &rhs.numerator, self.denom_exp + rhs.denom_exp)
    }
}

impl Neg for &DyadicPolynomial {
    type Output = DyadicPolynomial;
    fn neg(self) -> DyadicPolynomial {
        DyadicPolynomial { numerator: -&self.numerator, denom_exp: self.denom_exp }
    }
}

impl From<IntPolynomial> for DyadicPolynomial {
    fn from(p: IntPolynomial) -> Self {
        DyadicPolynomial::integral(p)
    }
}

impl fmt::Display for DyadicPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom_exp == 0 {
            return write!(f, "{}", self.numerator);
        }
        let denom = BigInt::from(1) << self.denom_exp;
        if self.numerator.len() == 1 {
            write!(f, "{}/{}", self.numerator, denom)
        } else {
            write!(f, "({})/{}", self.numerator, denom)
        }
    }
}

impl fmt::Debug for DyadicPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn normalizes_on_construction() {
        let d = DyadicPolynomial::new(p("4*n + 2"), 3);
        assert_eq!(d.denom_exp(), 2);
        assert_eq!(d.numerator(), &p("2*n + 1"));
        let z = DyadicPolynomial::new(IntPolynomial::zero(), 5);
        assert_eq!(z.denom_exp(), 0);
        assert_eq!(DyadicPolynomial::new(p("8"), 2), DyadicPolynomial::constant(2));
    }

    #[test]
    fn arithmetic_clears_denominators() {
        let half = DyadicPolynomial::dyadic_constant(1, 1);
        assert_eq!(&half + &half, DyadicPolynomial::one());
        let a = DyadicPolynomial::new(p("n + 1"), 1);
        let b = DyadicPolynomial::new(p("n - 1"), 2);
        assert_eq!(&a + &b, DyadicPolynomial::new(p("3*n + 1"), 2));
        assert_eq!(&a * &DyadicPolynomial::constant(2), DyadicPolynomial::integral(p("n + 1")));
        assert_eq!(dyadic_sum([&a, &b, &half]).to_string(), "(3*n + 3)/4");
    }
}
