//! Exact arithmetic in the cyclotomic field Q(zeta_N).
//!
//! Elements are stored as coordinate vectors in the power basis
//! `1, zeta, ..., zeta^(phi(N)-1)`. Reduction uses a per-order table of
//! `x^j mod Phi_N` for `0 <= j < N`, which is integral because `Phi_N` is monic.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

/// Euler's totient.
pub fn euler_phi(n: u64) -> usize {
    assert!(n >= 1, "euler_phi of zero");
    let mut result = n;
    let mut rest = n;
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if rest > 1 {
        result -= result / rest;
    }
    result as usize
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}

/// Exact quotient of `num` by the monic polynomial `den` (ascending coefficients).
fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = rem.len() - dn;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let lead = rem[i + dn];
        quot[i] = lead;
        if lead != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= lead * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    quot
}

/// Coefficients (constant term first) of the N-th cyclotomic polynomial over Z.
pub fn cyclotomic_poly_int(n: u64) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic polynomial of order zero");
    let mut known: HashMap<u64, Vec<i64>> = HashMap::new();
    for d in divisors(n) {
        // x^d - 1
        let mut num = vec![0i64; d as usize + 1];
        num[0] = -1;
        num[d as usize] = 1;
        let mut poly = num;
        for e in divisors(d) {
            if e < d {
                poly = div_monic(&poly, &known[&e]);
            }
        }
        known.insert(d, poly);
    }
    known.remove(&n).unwrap()
}

/// The monic N-th cyclotomic polynomial, coefficients ascending, degree phi(N).
pub fn cyclotomic_poly<C: Coeff>(n: u64) -> Vec<C> {
    cyclotomic_poly_int(n)
        .into_iter()
        .map(|c| C::from_i64(c).expect("integer embeds in coefficient field"))
        .collect()
}

struct CycloTable {
    phi: usize,
    /// `powers[j]` = x^j mod Phi_N, length phi each, for 0 <= j < N.
    powers: Vec<Vec<i64>>,
}

impl CycloTable {
    fn build(n: u64) -> Self {
        let poly = cyclotomic_poly_int(n);
        let phi = poly.len() - 1;
        let mut powers = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        if phi > 0 {
            cur[0] = 1;
        }
        for _ in 0..n {
            powers.push(cur.clone());
            // multiply by x and fold the overflow coefficient
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c -= top * poly[i];
                }
            }
        }
        CycloTable { phi, powers }
    }
}

fn table(n: u64) -> Arc<CycloTable> {
    static TABLES: OnceLock<Mutex<HashMap<u64, Arc<CycloTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(CycloTable::build(n)))
        .clone()
}

fn embed<C: Coeff>(c: i64) -> C {
    C::from_i64(c).expect("integer embeds in coefficient field")
}

/// Exact element of Q(zeta_N) (or C(zeta_N) for a generic coefficient field C).
#[derive(Clone, PartialEq, Debug)]
pub struct CycElement<C> {
    order: u64,
    coeffs: Vec<C>,
}

impl<C: Coeff> CycElement<C> {
    pub fn new(order: u64, coeffs: Vec<C>) -> Result<Self> {
        assert!(order >= 1, "cyclotomic order must be positive");
        let expected = euler_phi(order);
        if coeffs.len() != expected {
            return Err(Error::BadLength {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(CycElement { order, coeffs })
    }

    pub fn zero(order: u64) -> Self {
        CycElement {
            order,
            coeffs: vec![C::zero(); euler_phi(order)],
        }
    }

    pub fn from_scalar(order: u64, c: C) -> Self {
        let mut out = Self::zero(order);
        out.coeffs[0] = c;
        out
    }

    pub fn one(order: u64) -> Self {
        Self::from_scalar(order, C::one())
    }

    /// `zeta_N^k`, for any integer k.
    pub fn zeta_pow(order: u64, k: i64) -> Self {
        let mut out = Self::zero(order);
        let mut dense = vec![C::zero(); order as usize];
        dense[k.rem_euclid(order as i64) as usize] = C::one();
        out.coeffs = reduce_dense(order, dense);
        out
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Exact: the power basis is a basis.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            Err(Error::OrderMismatch(self.order, other.order))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(CycElement {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.order as usize;
        let mut dense = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % n;
                dense[k] = dense[k].clone() + a.clone() * b.clone();
            }
        }
        Ok(CycElement {
            order: self.order,
            coeffs: reduce_dense(self.order, dense),
        })
    }

    fn neg_ref(&self) -> Self {
        CycElement {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        CycElement {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Multiplication by `zeta_N^k`.
    pub fn mul_zeta_pow(&self, k: i64) -> Self {
        let n = self.order as usize;
        let shift = k.rem_euclid(n as i64) as usize;
        let mut dense = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            dense[(i + shift) % n] = a.clone();
        }
        CycElement {
            order: self.order,
            coeffs: reduce_dense(self.order, dense),
        }
    }

    /// Image under Q(zeta_N) -> Q(zeta_L), zeta_N -> zeta_L^(L/N).
    pub fn lift(&self, to: u64) -> Result<Self> {
        if !to.is_multiple_of(self.order) {
            return Err(Error::BadLift {
                from: self.order,
                to,
            });
        }
        if to == self.order {
            return Ok(self.clone());
        }
        let step = (to / self.order) as usize;
        let mut dense = vec![C::zero(); to as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            dense[i * step] = a.clone();
        }
        Ok(CycElement {
            order: to,
            coeffs: reduce_dense(to, dense),
        })
    }
}

/// Reduce a length-N coefficient vector (indices mod N) modulo Phi_N.
fn reduce_dense<C: Coeff>(order: u64, dense: Vec<C>) -> Vec<C> {
    let t = table(order);
    let mut out: Vec<C> = dense.iter().take(t.phi).cloned().collect();
    for (j, v) in dense.into_iter().enumerate().skip(t.phi) {
        if v.is_zero() {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(&t.powers[j]) {
            if p != 0 {
                *o = o.clone() + v.clone() * embed::<C>(p);
            }
        }
    }
    out
}

impl<C: Coeff> Add for &CycElement<C> {
    type Output = CycElement<C>;
    fn add(self, rhs: Self) -> CycElement<C> {
        self.checked_add(rhs).expect("cyclotomic add")
    }
}

impl<C: Coeff> Sub for &CycElement<C> {
    type Output = CycElement<C>;
    fn sub(self, rhs: Self) -> CycElement<C> {
        self.checked_sub(rhs).expect("cyclotomic sub")
    }
}

impl<C: Coeff> Mul for &CycElement<C> {
    type Output = CycElement<C>;
    fn mul(self, rhs: Self) -> CycElement<C> {
        self.checked_mul(rhs).expect("cyclotomic mul")
    }
}

impl<C: Coeff> Neg for &CycElement<C> {
    type Output = CycElement<C>;
    fn neg(self) -> CycElement<C> {
        self.neg_ref()
    }
}

/// Parenthesized rational coefficients times powers of `z`, e.g.
/// `(3/2) + (-1)*z^2`; the zero element prints as `0`.
impl fmt::Display for CycElement<num_rational::BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::Zero;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})", crate::scalar::fmt_rational(c))?;
            match i {
                0 => {}
                1 => f.write_str("*z")?,
                _ => write!(f, "*z^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Least common multiple of two orders.
pub fn lcm_order(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q_vec(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&c| rat_int(c)).collect()
    }

    #[test]
    fn small_cyclotomic_polys() {
        assert_eq!(cyclotomic_poly_int(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly_int(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly_int(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly_int(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly_int(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly::<Q>(4), q_vec(&[1, 0, 1]));
        // first coefficient of absolute value 2
        assert!(cyclotomic_poly_int(105).contains(&-2));
    }

    #[test]
    fn degrees_are_totients() {
        for n in 1..=120 {
            assert_eq!(cyclotomic_poly_int(n).len() - 1, euler_phi(n), "n = {n}");
        }
    }

    #[test]
    fn zeta4_squared_is_minus_one() {
        let z = CycElement::<Q>::zeta_pow(4, 1);
        assert_eq!(&z * &z, CycElement::from_scalar(4, rat_int(-1)));
    }

    #[test]
    fn zeta3_squared() {
        let z = CycElement::<Q>::zeta_pow(3, 1);
        let expected = CycElement::new(3, q_vec(&[-1, -1])).unwrap();
        assert_eq!(&z * &z, expected);
    }

    #[test]
    fn identity_multiplication() {
        let a = CycElement::new(5, vec![rat(1, 2), rat_int(-3), rat_int(0), rat(7, 5)]).unwrap();
        assert_eq!(&CycElement::one(5) * &a, a);
    }

    #[test]
    fn zero_tests() {
        let one = CycElement::<Q>::one(3);
        let z = CycElement::zeta_pow(3, 1);
        let z2 = CycElement::zeta_pow(3, 2);
        assert!((&(&one + &z) + &z2).is_zero());
        assert!(CycElement::<Q>::zero(7).is_zero());
        assert!(!CycElement::<Q>::zeta_pow(4, 1).is_zero());
    }

    #[test]
    fn order_mismatch_rejected() {
        let a = CycElement::<Q>::one(3);
        let b = CycElement::<Q>::one(4);
        assert_eq!(a.checked_mul(&b), Err(Error::OrderMismatch(3, 4)));
        assert!(CycElement::<Q>::new(5, q_vec(&[1, 2])).is_err());
    }

    #[test]
    fn lift_maps_zeta_to_power() {
        let z4 = CycElement::<Q>::zeta_pow(4, 1);
        assert_eq!(z4.lift(8).unwrap(), CycElement::zeta_pow(8, 2));
        assert!(z4.lift(6).is_err());
        let z3 = CycElement::<Q>::zeta_pow(3, 2);
        assert_eq!(z3.lift(12).unwrap(), CycElement::zeta_pow(12, 8));
    }

    #[test]
    fn mul_zeta_pow_matches_mul() {
        let a = CycElement::new(12, q_vec(&[1, -2, 0, 5])).unwrap();
        for k in -13..13 {
            assert_eq!(a.mul_zeta_pow(k), &a * &CycElement::zeta_pow(12, k));
        }
    }

    #[test]
    fn generic_over_small_rationals() {
        use num_rational::Ratio;
        let z = CycElement::<Ratio<i64>>::zeta_pow(6, 1);
        // zeta_6^3 = -1
        assert_eq!(&(&z * &z) * &z, CycElement::from_scalar(6, Ratio::from_integer(-1)));
    }

    #[test]
    fn display_form() {
        let a = CycElement::new(3, vec![rat(3, 2), rat_int(-1)]).unwrap();
        assert_eq!(a.to_string(), "(3/2) + (-1)*z");
        assert_eq!(CycElement::<Q>::zero(3).to_string(), "0");
    }
}
