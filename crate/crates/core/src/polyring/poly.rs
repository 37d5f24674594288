use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Monomial, Var};
use crate::error::{Error, Result};

/// Sparse multivariate polynomial with arbitrary-precision integer
/// coefficients. Zero coefficients are never stored, so structural equality
/// is polynomial equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct IntPolynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(v: Var) -> Self {
        Self::term(1, Monomial::var(v))
    }

    /// Shorthand for `Self::var(Var::new(name))`.
    pub fn named(name: &str) -> Self {
        Self::var(Var::new(name))
    }

    pub fn term<T: Into<BigInt>>(c: T, m: Monomial) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigInt)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    fn from_map(map: HashMap<Monomial, BigInt>) -> Self {
        Self {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.mul(mono), a * c))
                .collect(),
        }
    }

    /// Multiplies every coefficient by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a << k)).collect(),
        }
    }

    /// Divides every coefficient by `2^k`; the caller guarantees exactness.
    pub(crate) fn shr_exact(&self, k: u32) -> Self {
        if k == 0 {
            return self.clone();
        }
        Self {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a >> k)).collect(),
        }
    }

    /// Minimum 2-adic valuation over the coefficients (`None` for zero).
    pub fn two_adic_valuation(&self) -> Option<u64> {
        self.terms.values().filter_map(|c| c.trailing_zeros()).min()
    }

    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Reduces coefficients into `[0, 2^k)`, dropping those that vanish.
    pub fn reduce_mod_pow2(&self, k: u32) -> Self {
        let modulus = BigInt::one() << k;
        Self {
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let r = c.mod_floor(&modulus);
                    (!r.is_zero()).then(|| (m.clone(), r))
                })
                .collect(),
        }
    }

    /// Composes `self` with the given bindings; unbound variables pass through.
    pub fn substitute(&self, bindings: &HashMap<Var, IntPolynomial>) -> Self {
        self.substitute_impl(bindings, None)
    }

    /// `substitute` followed by coefficient reduction mod `2^k`, reducing
    /// intermediate products as it goes.
    pub fn substitute_mod_pow2(&self, bindings: &HashMap<Var, IntPolynomial>, k: u32) -> Self {
        self.substitute_impl(bindings, Some(k))
    }

    fn substitute_impl(&self, bindings: &HashMap<Var, IntPolynomial>, k: Option<u32>) -> Self {
        let reduce = |p: IntPolynomial| match k {
            Some(k) => p.reduce_mod_pow2(k),
            None => p,
        };
        // power cache per bound variable
        let mut powers: HashMap<Var, Vec<IntPolynomial>> = HashMap::new();
        let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
        for (mono, c) in &self.terms {
            let mut free = Monomial::one();
            let mut bound = IntPolynomial::one();
            for (v, e) in mono.iter() {
                match bindings.get(&v) {
                    None => free = free.mul(&Monomial::pow_of(v, e)),
                    Some(image) => {
                        let cache = powers.entry(v).or_insert_with(|| vec![IntPolynomial::one()]);
                        while cache.len() <= e as usize {
                            let next = reduce(cache.last().unwrap() * image);
                            cache.push(next);
                        }
                        bound = reduce(&bound * &cache[e as usize]);
                    }
                }
            }
            for (m, a) in bound.terms {
                let entry = acc.entry(m.mul(&free)).or_default();
                *entry += a * c;
            }
        }
        reduce(Self::from_map(acc))
    }

    /// Exact evaluation; every variable of `self` must be bound.
    pub fn eval(&self, bindings: &HashMap<Var, BigInt>) -> Result<BigInt> {
        let mut powers: HashMap<(Var, u32), BigInt> = HashMap::new();
        let mut total = BigInt::zero();
        for (mono, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in mono.iter() {
                let p = match powers.get(&(v, e)) {
                    Some(p) => p,
                    None => {
                        let base = bindings
                            .get(&v)
                            .ok_or_else(|| Error::UnboundVariable(v.name()))?;
                        powers.entry((v, e)).or_insert_with(|| num_traits::pow(base.clone(), e as usize))
                    }
                };
                t *= p;
            }
            total += t;
        }
        Ok(total)
    }

    /// Evaluation modulo `2^64` using wrapping machine arithmetic. Reduce the
    /// result further for any smaller power-of-two modulus.
    pub fn eval_wrapping(&self, bindings: &HashMap<Var, i64>) -> Result<u64> {
        let mut total = 0u64;
        for (mono, c) in &self.terms {
            let mut t = low_u64(c);
            for (v, e) in mono.iter() {
                let base = *bindings
                    .get(&v)
                    .ok_or_else(|| Error::UnboundVariable(v.name()))? as u64;
                t = t.wrapping_mul(base.wrapping_pow(e));
            }
            total = total.wrapping_add(t);
        }
        Ok(total)
    }

    /// Precomputes a fast evaluator modulo `2^64` over the variables in `slots`.
    pub fn compile_wrapping(&self, slots: &[Var]) -> Result<WrappingPolynomial> {
        let slot = |v: Var| {
            slots
                .iter()
                .position(|&s| s == v)
                .ok_or_else(|| Error::UnboundVariable(v.name()))
        };
        let terms = self
            .terms
            .iter()
            .map(|(mono, c)| {
                let powers = mono.iter().map(|(v, e)| Ok((slot(v)?, e))).collect::<Result<_>>()?;
                Ok((low_u64(c), powers))
            })
            .collect::<Result<_>>()?;
        Ok(WrappingPolynomial { slots: slots.len(), terms })
    }

    /// Divides by `d`, failing unless the division is exact.
    ///
    /// Constant divisors reduce to coefficient division; anything else runs
    /// leading-term division, which for a single divisor leaves a zero
    /// remainder exactly when `d` divides `self`.
    pub fn exact_div(&self, d: &IntPolynomial) -> Result<IntPolynomial> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(c) = d.as_constant() {
            let mut q = BTreeMap::new();
            let mut rem = IntPolynomial::zero();
            for (m, a) in &self.terms {
                let (qq, r) = a.div_rem(&c);
                if !r.is_zero() {
                    rem.add_term(m.clone(), a.clone());
                } else {
                    q.insert(m.clone(), qq);
                }
            }
            if !rem.is_zero() {
                return Err(Error::NotDivisible { remainder: rem.to_string() });
            }
            return Ok(IntPolynomial { terms: q });
        }
        let (lm, lc) = d.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rest = self.clone();
        let mut quotient = IntPolynomial::zero();
        while let Some((m, c)) = rest.leading_term().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = match m.div(&lm) {
                Some(qm) => qm,
                None => return Err(Error::NotDivisible { remainder: rest.to_string() }),
            };
            let (qc, r) = c.div_rem(&lc);
            if !r.is_zero() {
                return Err(Error::NotDivisible { remainder: rest.to_string() });
            }
            for (dm, dc) in &d.terms {
                rest.add_term(dm.mul(&qm), -(dc * &qc));
            }
            quotient.add_term(qm, qc);
        }
        Ok(quotient)
    }

    /// Views `self` as a polynomial in `v` with coefficients in the other
    /// variables, indexed by degree.
    pub fn coefficients_in(&self, v: Var) -> Vec<IntPolynomial> {
        let mut out = vec![IntPolynomial::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_var(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn map_coefficients<F: FnMut(&BigInt) -> BigInt>(&self, mut f: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

/// Accumulates sums of products without re-sorting after every addition.
#[derive(Default)]
pub struct PolyAccumulator {
    acc: HashMap<Monomial, BigInt>,
}

impl PolyAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// `self += sign * a * b`.
    pub fn add_product(&mut self, a: &IntPolynomial, b: &IntPolynomial, negate: bool) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let prod = ca * cb;
                let entry = self.acc.entry(ma.mul(mb)).or_default();
                if negate {
                    *entry -= prod;
                } else {
                    *entry += prod;
                }
            }
        }
    }

    pub fn add(&mut self, a: &IntPolynomial) {
        for (m, c) in &a.terms {
            *self.acc.entry(m.clone()).or_default() += c;
        }
    }

    pub fn finish(self) -> IntPolynomial {
        IntPolynomial::from_map(self.acc)
    }
}

/// Low 64 bits of the two's-complement representation of `c`.
/// An [`IntPolynomial`] lowered to machine words for repeated evaluation
/// modulo `2^64`.
#[derive(Clone, Debug)]
pub struct WrappingPolynomial {
    slots: usize,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl WrappingPolynomial {
    /// `point[i]` is the value of the `i`-th slot variable.
    pub fn eval(&self, point: &[i64]) -> u64 {
        assert_eq!(point.len(), self.slots, "point has the wrong number of slots");
        self.terms.iter().fold(0u64, |total, (c, powers)| {
            let t = powers
                .iter()
                .fold(*c, |t, &(i, e)| t.wrapping_mul((point[i] as u64).wrapping_pow(e)));
            total.wrapping_add(t)
        })
    }
}

pub(crate) fn low_u64(c: &BigInt) -> u64 {
    let mag = c.magnitude().iter_u64_digits().next().unwrap_or(0);
    if c.is_negative() {
        mag.wrapping_neg()
    } else {
        mag
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPolynomial({self})")
    }
}

impl<'a> Add<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        let mut acc: HashMap<Monomial, BigInt> =
            HashMap::with_capacity(self.len().saturating_mul(rhs.len()).min(1 << 20));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let entry = acc.entry(ma.mul(mb)).or_default();
                *entry += ca * cb;
            }
        }
        IntPolynomial::from_map(acc)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<IntPolynomial> for IntPolynomial {
            type Output = IntPolynomial;
            fn $method(self, rhs: IntPolynomial) -> IntPolynomial {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a IntPolynomial> for IntPolynomial {
            type Output = IntPolynomial;
            fn $method(self, rhs: &IntPolynomial) -> IntPolynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        -&self
    }
}

impl From<i64> for IntPolynomial {
    fn from(c: i64) -> Self {
        IntPolynomial::constant(c)
    }
}

impl From<BigInt> for IntPolynomial {
    fn from(c: BigInt) -> Self {
        IntPolynomial::constant(c)
    }
}

impl From<Var> for IntPolynomial {
    fn from(v: Var) -> Self {
        IntPolynomial::var(v)
    }
}

/// Sum of products of polynomials in a balanced tree, keeping intermediate
/// operands of similar size.
pub fn product_tree(mut factors: Vec<IntPolynomial>) -> IntPolynomial {
    if factors.is_empty() {
        return IntPolynomial::one();
    }
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

#[cfg(test)]
mod tests {
    #[test]
    fn compiled_evaluation_matches_wrapping_eval() {
        let p: super::IntPolynomial = "-3*x2^5*n + 7*x3^2 - 123456789123456789123*n^3 + 5".parse().unwrap();
        let slots = [super::Var::x(2), super::Var::x(3), super::Var::n()];
        let compiled = p.compile_wrapping(&slots).unwrap();
        for point in [[0i64, 0, 0], [3, -4, 7], [-1000, 999, -17]] {
            let bindings = slots.iter().copied().zip(point).collect();
            assert_eq!(compiled.eval(&point), p.eval_wrapping(&bindings).unwrap());
        }
        assert!(p.compile_wrapping(&slots[..2]).is_err());
    }

    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn basic_identities() {
        assert_eq!(p("n + 1") * p("n - 1"), p("n^2 - 1"));
        assert_eq!(p("2*n + 1").pow(2), p("4*n^2 + 4*n + 1"));
        let q = p("3*x2*x3 - n^2 + 7");
        assert_eq!(&q * &IntPolynomial::zero(), IntPolynomial::zero());
        assert_eq!(&q * &IntPolynomial::one(), q);
        assert_eq!(&q - &q, IntPolynomial::zero());
    }

    #[test]
    fn substitution() {
        let mut b = HashMap::new();
        b.insert(Var::x(5), p("2*t5"));
        assert_eq!(p("x5^2").substitute(&b), p("4*t5^2"));

        let t5p = Var::new("t5p");
        let mut b = HashMap::new();
        b.insert(Var::t(5), IntPolynomial::constant(4) * IntPolynomial::var(t5p) + IntPolynomial::constant(2));
        assert_eq!(p("t5").substitute(&b), p("4*t5p + 2"));

        // unbound variables pass through
        assert_eq!(p("x2*x3 + x3").substitute(&b), p("x2*x3 + x3"));

        let mut b = HashMap::new();
        b.insert(Var::m(), p("4*n + 2"));
        assert_eq!(p("m^2 + m").substitute(&b), p("16*n^2 + 20*n + 6"));
    }

    #[test]
    fn substitution_mod_pow2_matches_full() {
        let mut b = HashMap::new();
        b.insert(Var::x(2), p("2*t2 + 1"));
        b.insert(Var::n(), p("2*t9"));
        let q = p("5*x2^4*n + 3*x2^3 - 11*n^2*x3 + 9");
        assert_eq!(
            q.substitute_mod_pow2(&b, 5),
            q.substitute(&b).reduce_mod_pow2(5)
        );
    }

    #[test]
    fn exact_division() {
        let d = p("16*(2*n + 1)^2");
        let q = p("x2^2 + 1");
        assert_eq!((&d * &q).exact_div(&d).unwrap(), q);
        assert!(matches!(
            p("n^2 + 1").exact_div(&p("n")),
            Err(Error::NotDivisible { .. })
        ));
        assert!(matches!(p("3*n + 1").exact_div(&p("2")), Err(Error::NotDivisible { .. })));
        assert_eq!(p("6*n + 4").exact_div(&p("2")).unwrap(), p("3*n + 2"));
        assert!(matches!(p("n").exact_div(&IntPolynomial::zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn evaluation() {
        let mut b = HashMap::new();
        b.insert(Var::m(), BigInt::from(2));
        let d = IntPolynomial::constant(BigInt::one() << 24) * p("m").pow(6);
        assert_eq!(d.eval(&b).unwrap(), BigInt::one() << 30);
        assert_eq!(IntPolynomial::zero().eval(&HashMap::new()).unwrap(), BigInt::zero());
        assert!(matches!(p("x2").eval(&b), Err(Error::UnboundVariable(_))));
        let mut w = HashMap::new();
        w.insert(Var::x(2), -3i64);
        assert_eq!(p("x2^3 - 1").eval_wrapping(&w).unwrap(), (-28i64) as u64);
    }

    #[test]
    fn canonical_text() {
        assert_eq!(p("9 + 8*t7 + 8*t5^2 + 8*t7^2").to_string(), "8*t5^2 + 8*t7^2 + 8*t7 + 9");
        assert_eq!(p("-x2 - 1").to_string(), "-x2 - 1");
        assert_eq!(IntPolynomial::zero().to_string(), "0");
    }
}
