//! Short Weierstrass curves `y^2 = x^3 + a x + b` over a [`FiniteField`].

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::field::{FiniteField, Fq};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Infinity,
    Affine(Fq, Fq),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => f.write_str("O"),
            Point::Affine(x, y) => write!(f, "({},{})", x.0, y.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticCurve {
    field: Arc<FiniteField>,
    a: Fq,
    b: Fq,
}

impl EllipticCurve {
    pub fn new(field: Arc<FiniteField>, a: Fq, b: Fq) -> Result<Self> {
        let f = &*field;
        let disc = f.add(f.scale(4, f.pow(a, 3)), f.scale(27, f.pow(b, 2)));
        if disc == f.zero() {
            return Err(Error::SingularCurve);
        }
        Ok(EllipticCurve { field, a, b })
    }

    /// Curve over F_{p^k} with integer coefficients reduced mod p.
    pub fn from_integers(p: u64, k: u32, a: i64, b: i64) -> Result<Self> {
        let field = Arc::new(FiniteField::new(p, k)?);
        let (a, b) = (field.from_int(a), field.from_int(b));
        Self::new(field, a, b)
    }

    /// The same equation over F_{p^k}; needs `a, b` in the prime field.
    pub fn base_change(&self, k: u32) -> Result<Self> {
        let f = &self.field;
        if !f.in_prime_field(self.a) || !f.in_prime_field(self.b) {
            return Err(Error::Unsupported(
                "base change needs coefficients in the prime field".into(),
            ));
        }
        Self::from_integers(f.p(), k, self.a.0 as i64, self.b.0 as i64)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FiniteField> {
        self.field.clone()
    }

    pub fn a(&self) -> Fq {
        self.a
    }

    pub fn b(&self) -> Fq {
        self.b
    }

    /// `x^3 + a x + b`.
    pub fn rhs(&self, x: Fq) -> Fq {
        let f = &*self.field;
        f.add(f.add(f.pow(x, 3), f.mul(self.a, x)), self.b)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match *pt {
            Point::Infinity => true,
            Point::Affine(x, y) => self.field.mul(y, y) == self.rhs(x),
        }
    }

    pub fn point(&self, x: Fq, y: Fq) -> Result<Point> {
        let pt = Point::Affine(x, y);
        if self.contains(&pt) {
            Ok(pt)
        } else {
            Err(Error::NotOnCurve)
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match *pt {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p1: &Point, p2: &Point) -> Point {
        let f = &*self.field;
        let (x1, y1, x2, y2) = match (*p1, *p2) {
            (Point::Infinity, q) | (q, Point::Infinity) => return q,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if f.add(y1, y2) == f.zero() {
                return Point::Infinity;
            }
            let num = f.add(f.scale(3, f.mul(x1, x1)), self.a);
            f.mul(num, f.inv(f.scale(2, y1)).expect("y != 0"))
        } else {
            f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)).expect("x1 != x2"))
        };
        let x3 = f.sub(f.sub(f.mul(lambda, lambda), x1), x2);
        let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn double(&self, pt: &Point) -> Point {
        self.add(pt, pt)
    }

    /// `[n] pt` by double-and-add.
    pub fn mul(&self, n: i64, pt: &Point) -> Point {
        let base = if n < 0 { self.neg(pt) } else { *pt };
        let mut k = n.unsigned_abs();
        let (mut acc, mut b) = (Point::Infinity, base);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &b);
            }
            b = self.double(&b);
            k >>= 1;
        }
        acc
    }

    /// Smallest `n >= 1` with `[n] pt = O`.
    pub fn point_order(&self, pt: &Point) -> u64 {
        let mut n = 1;
        let mut cur = *pt;
        while !cur.is_infinity() {
            cur = self.add(&cur, pt);
            n += 1;
        }
        n
    }
}

impl fmt::Display for EllipticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + {}x + {} over {}", self.a.0, self.b.0, self.field)
    }
}

/// Every point of E(F_q): O first, then affine points sorted by `(x, y)`.
pub fn curve_points(e: &EllipticCurve) -> Vec<Point> {
    let f = e.field();
    let mut roots: Vec<Vec<Fq>> = vec![Vec::new(); f.size() as usize];
    for y in f.elements() {
        roots[f.mul(y, y).0 as usize].push(y);
    }
    let xs: Vec<Fq> = f.elements().collect();
    let affine: Vec<Vec<Point>> = xs
        .par_iter()
        .map(|&x| {
            roots[e.rhs(x).0 as usize]
                .iter()
                .map(|&y| Point::Affine(x, y))
                .collect()
        })
        .collect();
    std::iter::once(Point::Infinity)
        .chain(affine.into_iter().flatten())
        .collect()
}

/// All `P` with `[m] P = O` over the base field.
pub fn m_torsion(e: &EllipticCurve, m: u64) -> Vec<Point> {
    torsion_among(e, &curve_points(e), m)
}

pub(crate) fn torsion_among(e: &EllipticCurve, points: &[Point], m: u64) -> Vec<Point> {
    points
        .par_iter()
        .filter(|pt| e.mul(m as i64, pt).is_infinity())
        .copied()
        .collect()
}
