//! Scalar abstractions shared by the exact and floating-point layers.
//!
//! Exact structures (cyclotomic elements, valued series, Laurent polynomials)
//! are generic over a coefficient field [`Coeff`]; real-valued outputs
//! (integrals, Weyl sums, discrepancies) are generic over [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Exact coefficient field used inside cyclotomic arithmetic.
///
/// Only ring operations and integer embedding are required; division is never
/// used because every modulus is a monic integer polynomial.
pub trait Coeff:
    Clone + PartialEq + Debug + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
}

impl<T> Coeff for T where
    T: Clone + PartialEq + Debug + Num + Neg<Output = T> + FromPrimitive + Send + Sync + 'static
{
}

/// Floating point: f32 or f64.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Nearest representable value of an exact rational.
    fn from_rational(q: &BigRational) -> Self {
        Self::from_f64(q.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(Self::nan)
    }

    fn tau() -> Self {
        Self::from_f64(std::f64::consts::TAU).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sum with a fixed binary tree shape, so the result only depends on the
/// order of `values`, never on how they were produced.
pub fn pairwise_sum<F: Real>(values: &[F]) -> F {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(F::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Fractional part in `[0, 1)`.
pub fn frac(q: &BigRational) -> BigRational {
    q - q.floor()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Canonical textual form `p` or `p/q`.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
