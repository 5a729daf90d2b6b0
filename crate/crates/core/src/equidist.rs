//! Empirical torsion measures against the Haar measure on the skeleton.
//!
//! Averages are normalized by `m^(2g)` with every torus representative
//! carrying the abelian multiplicity `m^(2s)`. The normalization weight is
//! formed exactly before it touches a float, so the average of a
//! skeleton-factoring function does not depend on `s` at all.

use std::io::{self, Write};
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{haar_integral, haar_integral_exact, Lattice, SkeletonPoint};
use crate::scalar::{pairwise_sum, Coeff, Real};
use crate::tropical::{gauss_seminorm, LaurentPoly, SeminormEvaluator};
use crate::uniformization::{valuation, RaynaudData};

type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Sum over coordinates of periodic piecewise-linear profiles in `beta`.
///
/// Each profile is a list of breakpoints `(beta, value)` starting at 0 and
/// ending at 1 with equal end values, so the function is continuous on the
/// torus.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    profiles: Vec<Vec<(Q, Q)>>,
}

impl PiecewiseLinear {
    pub fn new(profiles: Vec<Vec<(Q, Q)>>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidTestFunction(msg.to_string()));
        if profiles.is_empty() {
            return bad("no profiles");
        }
        for p in &profiles {
            if p.len() < 2 {
                return bad("a profile needs at least two breakpoints");
            }
            if !p[0].0.is_zero() || !p[p.len() - 1].0.is_one() {
                return bad("breakpoints must start at 0 and end at 1");
            }
            if p.windows(2).any(|w| w[0].0 >= w[1].0) {
                return bad("breakpoints must be strictly increasing");
            }
            if p[0].1 != p[p.len() - 1].1 {
                return bad("profile is not periodic: value(0) != value(1)");
            }
        }
        Ok(PiecewiseLinear { profiles })
    }

    /// `min(beta, 1 - beta)` in every coordinate.
    pub fn tent() -> Self {
        let half = Q::new(1.into(), 2.into());
        PiecewiseLinear {
            profiles: vec![vec![
                (Q::zero(), Q::zero()),
                (half.clone(), half),
                (Q::one(), Q::zero()),
            ]],
        }
    }

    pub fn profiles(&self) -> &[Vec<(Q, Q)>] {
        &self.profiles
    }

    fn profile(&self, i: usize) -> &[(Q, Q)] {
        if self.profiles.len() == 1 {
            &self.profiles[0]
        } else {
            &self.profiles[i]
        }
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if self.profiles.len() == 1 || self.profiles.len() == r {
            Ok(())
        } else {
            Err(Error::InvalidTestFunction(format!(
                "{} profiles for rank {r}",
                self.profiles.len()
            )))
        }
    }

    /// Exact value at generator coordinates `beta in [0,1)^r`.
    pub fn value(&self, beta: &[Q]) -> Q {
        beta.iter()
            .enumerate()
            .map(|(i, b)| {
                let p = self.profile(i);
                let k = p.windows(2).position(|w| *b <= w[1].0).unwrap_or(p.len() - 2);
                let ((x0, y0), (x1, y1)) = (&p[k], &p[k + 1]);
                y0 + (y1 - y0) * (b - x0) / (x1 - x0)
            })
            .fold(Q::zero(), |a, b| a + b)
    }

    /// Largest absolute slope over all profiles.
    pub fn lipschitz(&self) -> Q {
        self.profiles
            .iter()
            .flat_map(|p| p.windows(2).map(|w| ((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).abs()))
            .fold(Q::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Continuous functions on A^an used to probe equidistribution.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction<C> {
    /// Real or imaginary part of `exp(2 pi i <k, val(x)>)`, `k` in the dual lattice.
    Character { k: Vec<Q>, part: Part },
    PiecewiseLinear(PiecewiseLinear),
    /// `x -> |f|_x = exp(-(-log|f|_x))`; does not factor through the skeleton.
    SeminormPullback(LaurentPoly<C>),
}

impl<C: Coeff> TestFunction<C> {
    pub fn validate(&self, data: &RaynaudData) -> Result<()> {
        match self {
            TestFunction::Character { k, .. } => data.lattice().dual_coordinates(k).map(|_| ()),
            TestFunction::PiecewiseLinear(pl) => pl.check_rank(data.r()),
            TestFunction::SeminormPullback(f) => {
                if f.rank() != data.r() {
                    Err(Error::DimensionMismatch {
                        expected: data.r(),
                        got: f.rank(),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn factors_through_skeleton(&self) -> bool {
        !matches!(self, TestFunction::SeminormPullback(_))
    }

    /// Value at a skeleton point; for a seminorm pullback this is the Gauss
    /// (no-cancellation) value.
    pub fn eval_skeleton<F: Real>(&self, p: &SkeletonPoint, lattice: &Lattice) -> Result<F> {
        Ok(match self {
            TestFunction::Character { k, part } => {
                let n = lattice.dual_coordinates(k)?;
                let z: Complex<F> = p.character(&n);
                match part {
                    Part::Re => z.re,
                    Part::Im => z.im,
                }
            }
            TestFunction::PiecewiseLinear(pl) => F::from_rational(&pl.value(&p.beta)),
            TestFunction::SeminormPullback(f) => gauss_seminorm(f, &p.ambient)?.abs_value(),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TestFunction::Character { .. } => "character",
            TestFunction::PiecewiseLinear(_) => "piecewise",
            TestFunction::SeminormPullback(_) => "seminorm",
        }
    }
}

/// `Pi_j [m | <k, gamma_j>]`, the exact value of the Weyl sum.
pub fn weyl_prediction(data: &RaynaudData, m: u64, k: &[Q]) -> Result<bool> {
    let n = data.lattice().dual_coordinates(k)?;
    let m = BigInt::from(m);
    Ok(n.iter().all(|x| (x % &m).is_zero()))
}

fn distinct_valuations(data: &RaynaudData, m: u64) -> Result<Vec<SkeletonPoint>> {
    let r = data.r();
    let count = m.checked_pow(r as u32).ok_or(Error::Overflow("m^r"))?;
    // With e = 0 the flat index of coset c is c * m^r.
    (0..count)
        .into_par_iter()
        .map(|ci| Ok(valuation(&data.torsion_point(m, ci * count)?, data)))
        .collect()
}

/// Exact weight of one coset `c` after collapsing the angular index:
/// `m^r * m^(2s) / m^(2g)`.
fn coset_weight(data: &RaynaudData, m: u64) -> Result<Q> {
    let cosets = m.checked_pow(data.r() as u32).ok_or(Error::Overflow("m^r"))?;
    let num = BigInt::from(cosets) * BigInt::from(data.multiplicity(m)?);
    Ok(Q::new(num, BigInt::from(data.weighted_total(m)?)))
}

fn point_weight(data: &RaynaudData, m: u64) -> Result<Q> {
    Ok(Q::new(
        BigInt::from(data.multiplicity(m)?),
        BigInt::from(data.weighted_total(m)?),
    ))
}

/// `(1/m^(2g)) sum_{x in A[m]} exp(2 pi i <k, val(x)>)`.
pub fn weyl_sum<F: Real>(data: &RaynaudData, m: u64, k: &[Q]) -> Result<Complex<F>> {
    Ok(weyl_sums(data, m, &[k.to_vec()])?.remove(0))
}

/// [`weyl_sum`] for several characters, sharing one pass over the torsion.
pub fn weyl_sums<F: Real>(data: &RaynaudData, m: u64, ks: &[Vec<Q>]) -> Result<Vec<Complex<F>>> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let ns = ks
        .iter()
        .map(|k| data.lattice().dual_coordinates(k))
        .collect::<Result<Vec<_>>>()?;
    let points = distinct_valuations(data, m)?;
    let w = F::from_rational(&coset_weight(data, m)?);
    Ok(ns
        .par_iter()
        .map(|n| {
            let values: Vec<Complex<F>> = points.iter().map(|p| p.character(n)).collect();
            let re: Vec<F> = values.iter().map(|z| z.re).collect();
            let im: Vec<F> = values.iter().map(|z| z.im).collect();
            Complex::new(pairwise_sum(&re) * w, pairwise_sum(&im) * w)
        })
        .collect())
}

/// Weighted torsion average `(1/m^(2g)) sum_x deg(x) f(x)` with `deg = 1`.
/// Skeleton-factoring functions are summed once per coset.
pub fn empirical_mean<F: Real, C: Coeff>(data: &RaynaudData, m: u64, f: &TestFunction<C>) -> Result<F> {
    if !f.factors_through_skeleton() {
        return empirical_mean_full(data, m, f);
    }
    f.validate(data)?;
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let values = distinct_valuations(data, m)?
        .par_iter()
        .map(|p| f.eval_skeleton::<F>(p, data.lattice()))
        .collect::<Result<Vec<F>>>()?;
    Ok(pairwise_sum(&values) * F::from_rational(&coset_weight(data, m)?))
}

/// The same average taken over every representative `(c, e)`.
pub fn empirical_mean_full<F: Real, C: Coeff>(data: &RaynaudData, m: u64, f: &TestFunction<C>) -> Result<F> {
    f.validate(data)?;
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let total = data.representative_count(m)?;
    let evaluator = match f {
        TestFunction::SeminormPullback(poly) => Some(SeminormEvaluator::new(poly, data, m)?),
        _ => None,
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = data.torsion_point(m, i)?;
            match &evaluator {
                Some(ev) => Ok(ev.seminorm(&x, data).abs_value::<F>()),
                None => f.eval_skeleton::<F>(&valuation(&x, data), data.lattice()),
            }
        })
        .collect::<Result<Vec<F>>>()?;
    Ok(pairwise_sum(&values) * F::from_rational(&point_weight(data, m)?))
}

/// Exact torsion average of a piecewise-linear function; `full` sums over
/// every `(c, e)` instead of once per coset.
pub fn empirical_mean_exact(data: &RaynaudData, m: u64, f: &PiecewiseLinear, full: bool) -> Result<Q> {
    f.check_rank(data.r())?;
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    if full {
        let total = data.representative_count(m)?;
        let sum = (0..total)
            .into_par_iter()
            .map(|i| Ok(f.value(&valuation(&data.torsion_point(m, i)?, data).beta)))
            .try_reduce(Q::zero, |a, b| Ok(a + b))?;
        Ok(sum * point_weight(data, m)?)
    } else {
        let sum = distinct_valuations(data, m)?
            .par_iter()
            .map(|p| f.value(&p.beta))
            .reduce(Q::zero, |a, b| a + b);
        Ok(sum * coset_weight(data, m)?)
    }
}

/// Integral against the canonical (Haar-on-skeleton) measure.
pub fn canonical_integral<F: Real, C: Coeff>(f: &TestFunction<C>, lattice: &Lattice, grid: usize) -> Result<F> {
    match f {
        TestFunction::Character { k, .. } => {
            let n = lattice.dual_coordinates(k)?;
            let trivial = n.iter().all(|x| x.is_zero());
            Ok(match f {
                TestFunction::Character { part: Part::Re, .. } if trivial => F::one(),
                _ => F::zero(),
            })
        }
        TestFunction::PiecewiseLinear(pl) => Ok(F::from_rational(&canonical_integral_exact(pl, lattice, grid))),
        TestFunction::SeminormPullback(poly) => {
            if poly.rank() != lattice.rank() {
                return Err(Error::DimensionMismatch {
                    expected: lattice.rank(),
                    got: poly.rank(),
                });
            }
            Ok(haar_integral(
                |p| gauss_seminorm(poly, &p.ambient).expect("rank checked").abs_value::<F>(),
                lattice,
                grid,
            ))
        }
    }
}

/// Exact midpoint rule for a piecewise-linear function.
pub fn canonical_integral_exact(f: &PiecewiseLinear, lattice: &Lattice, grid: usize) -> Q {
    haar_integral_exact(|p| f.value(&p.beta), lattice, grid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow<F> {
    pub m: u64,
    pub fn_id: String,
    pub empirical: F,
    pub reference: F,
    pub abs_error: F,
    pub wall_ms: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport<F> {
    pub rows: Vec<ConvergenceRow<F>>,
    /// Least-squares slope of `log abs_error` against `log m`.
    pub decay_exponent: Option<F>,
}

/// Rows with `abs_error` below this carry no slope information.
pub const FIT_FLOOR: f64 = 1e-14;

pub fn fit_decay_exponent<F: Real>(rows: &[ConvergenceRow<F>]) -> Option<F> {
    let floor = F::from_f64(FIT_FLOOR).unwrap();
    let pts: Vec<(F, F)> = rows
        .iter()
        .filter(|r| r.abs_error >= floor)
        .map(|r| (F::from_u64(r.m).unwrap().ln(), r.abs_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = F::from_usize(pts.len()).unwrap();
    let mx = pts.iter().map(|p| p.0).sum::<F>() / n;
    let my = pts.iter().map(|p| p.1).sum::<F>() / n;
    let sxy: F = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: F = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx.is_zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// One row per `m`. Piecewise-linear functions are compared exactly and only
/// the final difference is rounded.
pub fn convergence_report<F: Real, C: Coeff>(
    data: &RaynaudData,
    fn_id: &str,
    f: &TestFunction<C>,
    m_list: &[u64],
    grid: usize,
) -> Result<ConvergenceReport<F>> {
    if m_list.is_empty() {
        return Err(Error::InvalidTestFunction("empty m list".into()));
    }
    f.validate(data)?;
    let exact_reference = match f {
        TestFunction::PiecewiseLinear(pl) => Some(canonical_integral_exact(pl, data.lattice(), grid)),
        _ => None,
    };
    let reference: F = match &exact_reference {
        Some(q) => F::from_rational(q),
        None => canonical_integral(f, data.lattice(), grid)?,
    };
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let start = Instant::now();
        let (empirical, abs_error) = match (f, &exact_reference) {
            (TestFunction::PiecewiseLinear(pl), Some(reference)) => {
                let e = empirical_mean_exact(data, m, pl, false)?;
                let err = (&e - reference).abs();
                (F::from_rational(&e), F::from_rational(&err))
            }
            _ => {
                let e: F = empirical_mean(data, m, f)?;
                (e, (e - reference).abs())
            }
        };
        rows.push(ConvergenceRow {
            m,
            fn_id: fn_id.to_string(),
            empirical,
            reference,
            abs_error,
            wall_ms: F::from_f64(start.elapsed().as_secs_f64() * 1e3).unwrap(),
        });
    }
    let decay_exponent = fit_decay_exponent(&rows);
    Ok(ConvergenceReport { rows, decay_exponent })
}

/// Scientific notation with 17 significant digits.
pub fn fmt_float<F: Real>(x: F) -> String {
    format!("{:.16e}", x.to_f64().unwrap())
}

pub const CSV_HEADER: &str = "m,fn_id,empirical,reference,abs_error,wall_ms";

/// Writes rows in the `m,fn_id,empirical,reference,abs_error,wall_ms` schema.
/// Without `timings` the wall-clock column is written as 0 so output is
/// reproducible byte for byte.
pub fn write_rows<F: Real, W: Write>(out: &mut W, rows: &[ConvergenceRow<F>], timings: bool) -> io::Result<()> {
    for r in rows {
        let wall = if timings { r.wall_ms } else { F::zero() };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.m,
            r.fn_id,
            fmt_float(r.empirical),
            fmt_float(r.reference),
            fmt_float(r.abs_error),
            fmt_float(wall)
        )?;
    }
    Ok(())
}
