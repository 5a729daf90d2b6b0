//! Finite sums `sum_q a_q t^q` with cyclotomic coefficients and rational
//! exponents: a concrete, exact model of elements of an algebraically closed
//! non-Archimedean field. The valuation is the smallest exponent carrying a
//! nonzero coefficient.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::cyclotomic::CycElement;
use crate::error::{Error, Result};
use crate::scalar::{fmt_rational, Coeff, Real};

/// A valuation value: a rational, or `+inf` for zero. `Finite < Infinite`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(BigRational),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite(q) => Some(q),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// `exp(-v)`, with `exp(-inf) = 0`.
    pub fn abs_value<F: Real>(&self) -> F {
        match self {
            Valuation::Finite(q) => (-F::from_rational(q)).exp(),
            Valuation::Infinite => F::zero(),
        }
    }
}

impl Add for &Valuation {
    type Output = Valuation;
    fn add(self, rhs: Self) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(q) => f.write_str(&fmt_rational(q)),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Element of K: exponents ascending, no zero coefficients stored.
#[derive(Clone, PartialEq, Debug)]
pub struct FieldElement<C> {
    order: u64,
    terms: BTreeMap<BigRational, CycElement<C>>,
}

impl<C: Coeff> FieldElement<C> {
    pub fn zero(order: u64) -> Self {
        FieldElement {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(order: u64) -> Self {
        Self::monomial(CycElement::one(order), BigRational::zero())
    }

    /// `coeff * t^exponent`; a zero coefficient gives the zero element.
    pub fn monomial(coeff: CycElement<C>, exponent: BigRational) -> Self {
        let order = coeff.order();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exponent, coeff);
        }
        FieldElement { order, terms }
    }

    /// `zeta_N^k * t^exponent`.
    pub fn unit_monomial(order: u64, zeta_exp: i64, exponent: BigRational) -> Self {
        Self::monomial(CycElement::zeta_pow(order, zeta_exp), exponent)
    }

    pub fn from_terms(
        order: u64,
        terms: impl IntoIterator<Item = (BigRational, CycElement<C>)>,
    ) -> Result<Self> {
        let mut out = Self::zero(order);
        for (q, c) in terms {
            if c.order() != order {
                return Err(Error::OrderMismatch(order, c.order()));
            }
            out.add_term(q, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, q: BigRational, c: CycElement<C>) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&q) {
            Some(prev) => {
                let sum = &prev + &c;
                if !sum.is_zero() {
                    self.terms.insert(q, sum);
                }
            }
            None => {
                self.terms.insert(q, c);
            }
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &CycElement<C>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Minimum exponent with nonzero coefficient; `+inf` for zero.
    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(q) => Valuation::Finite(q.clone()),
            None => Valuation::Infinite,
        }
    }

    pub fn leading_coeff(&self) -> Option<&CycElement<C>> {
        self.terms.values().next()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add_term(q.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        let mut out = Self::zero(self.order);
        for (qa, a) in &self.terms {
            for (qb, b) in &other.terms {
                out.add_term(qa + qb, a * b);
            }
        }
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        FieldElement {
            order: self.order,
            terms: self.terms.iter().map(|(q, c)| (q.clone(), -c)).collect(),
        }
    }

    /// Multiply by the unit monomial `zeta_N^k t^w`; never cancels.
    pub fn mul_monomial(&self, zeta_exp: i64, t_exp: &BigRational) -> Self {
        FieldElement {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(q, c)| (q + t_exp, c.mul_zeta_pow(zeta_exp)))
                .collect(),
        }
    }

    pub fn lift(&self, to: u64) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (q, c) in &self.terms {
            terms.insert(q.clone(), c.lift(to)?);
        }
        Ok(FieldElement { order: to, terms })
    }

    /// Non-negative integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// If `self` is a single term `zeta^k t^w` with unit root-of-unity coefficient,
    /// return `(k, w)`.
    pub fn as_unit_monomial(&self) -> Option<(i64, BigRational)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (q, c) = self.terms.iter().next().unwrap();
        (0..self.order as i64)
            .find(|&k| CycElement::zeta_pow(self.order, k) == *c)
            .map(|k| (k, q.clone()))
    }
}

/// Free function form of [`FieldElement::valuation`].
pub fn series_valuation<C: Coeff>(x: &FieldElement<C>) -> Valuation {
    x.valuation()
}

impl<C: Coeff> Add for &FieldElement<C> {
    type Output = FieldElement<C>;
    fn add(self, rhs: Self) -> FieldElement<C> {
        self.checked_add(rhs).expect("field element add")
    }
}

impl<C: Coeff> Sub for &FieldElement<C> {
    type Output = FieldElement<C>;
    fn sub(self, rhs: Self) -> FieldElement<C> {
        self.checked_add(&rhs.negated()).expect("field element sub")
    }
}

impl<C: Coeff> Mul for &FieldElement<C> {
    type Output = FieldElement<C>;
    fn mul(self, rhs: Self) -> FieldElement<C> {
        self.checked_mul(rhs).expect("field element mul")
    }
}

impl<C: Coeff> Neg for &FieldElement<C> {
    type Output = FieldElement<C>;
    fn neg(self) -> FieldElement<C> {
        self.negated()
    }
}

/// Terms `(cyc)*t^(q)` joined by ` + `; zero prints as `0`.
impl fmt::Display for FieldElement<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (q, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c.coeffs().iter().filter(|x| !x.is_zero()).count() > 1 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
            if !q.is_zero() {
                if q.is_one() {
                    f.write_str("*t")?;
                } else {
                    write!(f, "*t^({})", fmt_rational(q))?;
                }
            }
        }
        Ok(())
    }
}
