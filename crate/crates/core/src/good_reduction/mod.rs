//! Good reduction, worked on the special fibre: torsion counts on elliptic
//! curves and products `E1 x E2` over finite fields.

mod curve;
mod field;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

pub use curve::{curve_points, m_torsion, EllipticCurve, Point};
pub use field::{is_irreducible, FiniteField, Fq, MAX_FIELD_SIZE};

use crate::error::{Error, Result};
use crate::syntax::{eval_bivariate_mod_p, parse_expr};

/// Curves inside `E1 x E2`.
#[derive(Clone, Debug, PartialEq)]
pub enum SubvarietyModel {
    Diagonal,
    /// `{(P, [n]P)}`.
    GraphOfMultiplication(i64),
    /// `E1 x {Q}`.
    HorizontalFiber(Point),
    /// `{Q} x E2`.
    VerticalFiber(Point),
}

impl SubvarietyModel {
    /// `(Z . L)` for `L = pr1^*(3 O) + pr2^*(3 O)`, i.e.
    /// `3 deg(pr1|Z) + 3 deg(pr2|Z)`.
    pub fn intersection_degree(&self) -> u64 {
        match self {
            SubvarietyModel::Diagonal => 6,
            SubvarietyModel::GraphOfMultiplication(n) => 3 + 3 * n.unsigned_abs().pow(2),
            SubvarietyModel::HorizontalFiber(_) | SubvarietyModel::VerticalFiber(_) => 3,
        }
    }
}

impl fmt::Display for SubvarietyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubvarietyModel::Diagonal => f.write_str("diagonal"),
            SubvarietyModel::GraphOfMultiplication(n) => write!(f, "graph({n})"),
            SubvarietyModel::HorizontalFiber(q) => write!(f, "horizontal({})", fiber_label(q)),
            SubvarietyModel::VerticalFiber(q) => write!(f, "vertical({})", fiber_label(q)),
        }
    }
}

/// Comma-free so labels can sit in a CSV field.
fn fiber_label(q: &Point) -> String {
    match q {
        Point::Infinity => "O".into(),
        Point::Affine(x, y) => format!("{};{}", x.0, y.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorsionCount {
    pub count: u64,
    /// `m^2 (Z . L)`.
    pub bound: u64,
}

/// Counts points of `Z(F_q)` with both components `m`-torsion and checks the
/// count against `m^2 (Z . L)`.
pub fn subvariety_torsion_count(
    e1: &EllipticCurve,
    e2: &EllipticCurve,
    z: &SubvarietyModel,
    m: u64,
) -> Result<TorsionCount> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    if e1.field() != e2.field() {
        return Err(Error::Unsupported("factors over different fields".into()));
    }
    let same = e1 == e2;
    let is_torsion = |e: &EllipticCurve, p: &Point| e.mul(m as i64, p).is_infinity();
    let count = match z {
        SubvarietyModel::Diagonal | SubvarietyModel::GraphOfMultiplication(_) if !same => {
            return Err(Error::Unsupported(format!("{z} needs E1 = E2")));
        }
        SubvarietyModel::Diagonal => curve_points(e1)
            .par_iter()
            .filter(|p| is_torsion(e1, p) && is_torsion(e2, p))
            .count(),
        SubvarietyModel::GraphOfMultiplication(n) => curve_points(e1)
            .par_iter()
            .filter(|p| is_torsion(e1, p) && is_torsion(e2, &e1.mul(*n, p)))
            .count(),
        SubvarietyModel::HorizontalFiber(q) => {
            if !e2.contains(q) {
                return Err(Error::NotOnCurve);
            }
            curve_points(e1)
                .par_iter()
                .filter(|p| is_torsion(e1, p) && is_torsion(e2, q))
                .count()
        }
        SubvarietyModel::VerticalFiber(q) => {
            if !e1.contains(q) {
                return Err(Error::NotOnCurve);
            }
            curve_points(e2)
                .par_iter()
                .filter(|p| is_torsion(e1, q) && is_torsion(e2, p))
                .count()
        }
    } as u64;
    let bound = m * m * z.intersection_degree();
    if count > bound {
        return Err(Error::BoundViolation(format!(
            "{z}, m = {m}: {count} torsion points exceed {bound}"
        )));
    }
    Ok(TorsionCount { count, bound })
}

/// Polynomial in `x, y` with prime-field coefficients, keyed by `(i, j)` for `x^i y^j`.
pub type Bivariate = BTreeMap<(u32, u32), u64>;

pub fn parse_bivariate(text: &str, p: u64) -> Result<Bivariate> {
    eval_bivariate_mod_p(&parse_expr(text)?, p)
}

fn eval_bivariate(e: &EllipticCurve, h: &Bivariate, x: Fq, y: Fq) -> Fq {
    let f = e.field();
    h.iter().fold(f.zero(), |acc, (&(i, j), &c)| {
        let term = f.mul(f.from_int(c as i64), f.mul(f.pow(x, i as u64), f.pow(y, j as u64)));
        f.add(acc, term)
    })
}

/// Whether `h` is zero in the coordinate ring `F_q[x, y]/(y^2 - x^3 - a x - b)`.
/// Reducing `y^2` leaves `A(x) + y B(x)`, zero iff `A = B = 0`.
pub fn vanishes_on_curve(e: &EllipticCurve, h: &Bivariate) -> bool {
    let f = e.field();
    let add = |a: &mut Vec<Fq>, b: &[Fq]| {
        if a.len() < b.len() {
            a.resize(b.len(), f.zero());
        }
        for (x, y) in a.iter_mut().zip(b) {
            *x = f.add(*x, *y);
        }
    };
    let mul = |a: &[Fq], b: &[Fq]| {
        let mut out = vec![f.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(*x, *y));
            }
        }
        out
    };
    let cubic = [e.b(), e.a(), f.zero(), f.one()];
    let mut parts = [vec![f.zero()], vec![f.zero()]];
    for (&(i, j), &c) in h {
        let mut term = vec![f.zero(); i as usize + 1];
        term[i as usize] = f.from_int(c as i64);
        for _ in 0..j / 2 {
            term = mul(&term, &cubic);
        }
        add(&mut parts[(j % 2) as usize], &term);
    }
    parts.iter().all(|p| p.iter().all(|c| *c == f.zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VanishingReport {
    pub m: u64,
    /// m-torsion points on `V(h)`.
    pub torsion_zeros: u64,
    /// Affine points of `V(h)` on the curve over the base field.
    pub curve_zeros: u64,
    pub torsion_size: u64,
}

impl VanishingReport {
    pub fn fraction(&self) -> BigRational {
        BigRational::new(BigInt::from(self.torsion_zeros), BigInt::from(self.torsion_size))
    }
}

/// Fraction of `E[m]` lying on `V(h)`; needs `E[m]` to be rational over the
/// base field.
pub fn vanishing_fraction(e: &EllipticCurve, h: &Bivariate, m: u64) -> Result<VanishingReport> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    if vanishes_on_curve(e, h) {
        return Err(Error::VanishesOnCurve);
    }
    let points = curve_points(e);
    let torsion = curve::torsion_among(e, &points, m);
    if torsion.len() as u64 != m * m {
        return Err(Error::TorsionNotRational(m));
    }
    let on_h = |p: &Point| match *p {
        Point::Affine(x, y) => eval_bivariate(e, h, x, y) == e.field().zero(),
        Point::Infinity => false,
    };
    let report = VanishingReport {
        m,
        torsion_zeros: torsion.iter().filter(|p| on_h(p)).count() as u64,
        curve_zeros: points.par_iter().filter(|p| on_h(p)).count() as u64,
        torsion_size: m * m,
    };
    if report.torsion_zeros > report.curve_zeros {
        return Err(Error::BoundViolation(format!(
            "{} torsion zeros of h but only {} zeros on the curve",
            report.torsion_zeros, report.curve_zeros
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupersingularReport {
    pub p: u64,
    pub trace: i64,
    /// `#E(F_{p^k})` for `k = 1..=k_max`, by exhaustive sweep.
    pub counts: Vec<u64>,
    /// The same counts from `a_k = t a_{k-1} - p a_{k-2}`.
    pub predicted: Vec<u64>,
    /// `#E[p](F_{p^k})`.
    pub p_torsion: Vec<u64>,
    /// No point of exact order `p` over any `F_{p^k}`, `k <= k_max`.
    pub holds: bool,
}

/// `#E(F_{p^k}) = p^k + 1 - a_k` with `a_0 = 2`, `a_1 = t`.
pub fn point_counts_from_trace(p: u64, trace: i64, k_max: u32) -> Vec<u64> {
    let (p, t) = (p as i128, trace as i128);
    let mut a = vec![2i128, t];
    for k in 2..=k_max as usize {
        a.push(t * a[k - 1] - p * a[k - 2]);
    }
    (1..=k_max as usize)
        .map(|k| (p.pow(k as u32) + 1 - a[k]) as u64)
        .collect()
}

/// Checks that a supersingular curve over F_p has no `p`-torsion over the
/// extensions `F_{p^k}`, `k <= k_max`.
pub fn supersingular_p_torsion_check(e: &EllipticCurve, k_max: u32) -> Result<SupersingularReport> {
    let f = e.field();
    if f.k() != 1 {
        return Err(Error::Unsupported("curve must be defined over a prime field".into()));
    }
    let p = f.p();
    let trace = p as i64 + 1 - curve_points(e).len() as i64;
    if trace.rem_euclid(p as i64) != 0 {
        return Err(Error::NotSupersingular { trace, p });
    }
    let predicted = point_counts_from_trace(p, trace, k_max);
    let mut counts = Vec::new();
    let mut p_torsion = Vec::new();
    for k in 1..=k_max {
        let ek = e.base_change(k)?;
        let points = curve_points(&ek);
        counts.push(points.len() as u64);
        p_torsion.push(curve::torsion_among(&ek, &points, p).len() as u64);
    }
    if counts != predicted {
        return Err(Error::BoundViolation(format!(
            "point counts {counts:?} disagree with the trace recursion {predicted:?}"
        )));
    }
    let holds = p_torsion.iter().all(|&n| n == 1);
    Ok(SupersingularReport {
        p,
        trace,
        counts,
        predicted,
        p_torsion,
        holds,
    })
}
