//! Laurent polynomials over K, their tropicalizations and corner loci, and
//! exact seminorm evaluation at torsion points.
//!
//! Everything is additive: a seminorm `|f|` is carried as `-log |f|`, so the
//! skeleton value of `f = sum a_v X^v` at `u` is `min_v (val(a_v) + <v,u>)`,
//! and cancellation at an actual point can only raise the value.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{lcm_order, FieldElement, Valuation};
use crate::scalar::Coeff;
use crate::uniformization::{coordinate_monomials, valuation, RaynaudData, TorsionPoint};

type Q = BigRational;
type Exponent = Vec<i64>;

fn dot(v: &[i64], u: &[Q]) -> Q {
    v.iter()
        .zip(u)
        .fold(Q::zero(), |acc, (&a, b)| acc + b * Q::from_integer(a.into()))
}

/// `sum_v a_v X^v` with `a_v` in K; no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<C> {
    rank: usize,
    order: u64,
    terms: BTreeMap<Exponent, FieldElement<C>>,
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero(rank: usize, order: u64) -> Self {
        LaurentPoly {
            rank,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(rank: usize, c: FieldElement<C>) -> Self {
        Self::monomial(vec![0; rank], c)
    }

    pub fn monomial(v: Exponent, c: FieldElement<C>) -> Self {
        let mut out = Self::zero(v.len(), c.order());
        out.add_term(v, c);
        out
    }

    /// `X_i` (0-based index).
    pub fn variable(rank: usize, order: u64, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Self::monomial(v, FieldElement::one(order))
    }

    pub fn from_terms(
        rank: usize,
        order: u64,
        terms: impl IntoIterator<Item = (Exponent, FieldElement<C>)>,
    ) -> Result<Self> {
        let mut out = Self::zero(rank, order);
        for (v, c) in terms {
            if v.len() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    got: v.len(),
                });
            }
            if c.order() != order {
                return Err(Error::OrderMismatch(order, c.order()));
            }
            out.add_term(v, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, v: Exponent, c: FieldElement<C>) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&v) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(v, sum);
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &FieldElement<C>)> {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (v, c) in &other.terms {
            out.add_term(v.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.rank, self.order);
        for (va, a) in &self.terms {
            for (vb, b) in &other.terms {
                let v = va.iter().zip(vb).map(|(x, y)| x + y).collect();
                out.add_term(v, a * b);
            }
        }
        Ok(out)
    }

    pub fn negated(&self) -> Self {
        LaurentPoly {
            rank: self.rank,
            order: self.order,
            terms: self.terms.iter().map(|(v, c)| (v.clone(), -c)).collect(),
        }
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut acc = Self::constant(self.rank, FieldElement::one(self.order));
        for _ in 0..k {
            acc = acc.checked_mul(self).expect("same ring");
        }
        acc
    }

    pub fn lift(&self, to: u64) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (v, c) in &self.terms {
            terms.insert(v.clone(), c.lift(to)?);
        }
        Ok(LaurentPoly {
            rank: self.rank,
            order: to,
            terms,
        })
    }

    /// Coefficients replaced by their valuations.
    pub fn tropicalize(&self) -> TropPoly {
        TropPoly {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|(v, c)| {
                    let w = c.valuation().finite().cloned().expect("stored coefficients are nonzero");
                    (v.clone(), w)
                })
                .collect(),
        }
    }
}

impl fmt::Display for LaurentPoly<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (v, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            if c.len() > 1 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
            for (i, &e) in v.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*X{}", i + 1)?,
                    _ => write!(f, "*X{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// `u -> min_v (w_v + <v,u>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TropPoly {
    pub rank: usize,
    pub terms: BTreeMap<Exponent, Q>,
}

/// Value and the set of minimizing exponents of a tropical polynomial at `u`.
/// `argmin.len() >= 2` exactly on the corner locus.
pub fn trop_eval(p: &TropPoly, u: &[Q]) -> Result<(Q, Vec<Exponent>)> {
    if u.len() != p.rank {
        return Err(Error::DimensionMismatch {
            expected: p.rank,
            got: u.len(),
        });
    }
    let mut best: Option<Q> = None;
    let mut argmin = Vec::new();
    for (v, w) in &p.terms {
        let val = w + dot(v, u);
        match &best {
            Some(b) if val > *b => {}
            Some(b) if val == *b => argmin.push(v.clone()),
            _ => {
                best = Some(val);
                argmin = vec![v.clone()];
            }
        }
    }
    best.map(|b| (b, argmin)).ok_or(Error::EmptyPolynomial)
}

/// One affine functional `u -> <v - v', u> + (w_v - w_v')` per support pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CornerFunctional {
    pub v: Exponent,
    pub v_prime: Exponent,
    pub normal: Exponent,
    pub offset: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerArrangement {
    pub functionals: Vec<CornerFunctional>,
    trop: TropPoly,
}

impl CornerArrangement {
    pub fn new(p: &TropPoly) -> Self {
        let terms: Vec<_> = p.terms.iter().collect();
        let mut functionals = Vec::new();
        for (i, (v, w)) in terms.iter().enumerate() {
            for (v2, w2) in &terms[i + 1..] {
                functionals.push(CornerFunctional {
                    v: (*v).clone(),
                    v_prime: (*v2).clone(),
                    normal: v.iter().zip(v2.iter()).map(|(a, b)| a - b).collect(),
                    offset: *w - *w2,
                });
            }
        }
        CornerArrangement {
            functionals,
            trop: p.clone(),
        }
    }

    /// `u` is on the corner locus: some functional vanishes at `u` and both
    /// of its terms attain the minimum.
    pub fn contains(&self, u: &[Q]) -> bool {
        let Ok((min, _)) = trop_eval(&self.trop, u) else {
            return false;
        };
        let term_value = |v: &Exponent| &self.trop.terms[v] + dot(v, u);
        self.functionals.iter().any(|h| {
            (dot(&h.normal, u) + &h.offset).is_zero() && term_value(&h.v) == min
        })
    }
}

/// `-log |f|` at the skeleton point `u`: the tropical value, `+inf` for `f = 0`.
pub fn gauss_seminorm<C: Coeff>(f: &LaurentPoly<C>, u: &[Q]) -> Result<Valuation> {
    if u.len() != f.rank() {
        return Err(Error::DimensionMismatch {
            expected: f.rank(),
            got: u.len(),
        });
    }
    if f.is_zero() {
        return Ok(Valuation::Infinite);
    }
    trop_eval(&f.tropicalize(), u).map(|(v, _)| Valuation::Finite(v))
}

/// Evaluates one polynomial at many torsion points of a fixed order `m`,
/// lifting coefficients once into Q(zeta_L), `L = lcm(order(f), m N0)`.
pub struct SeminormEvaluator<C> {
    lifted: LaurentPoly<C>,
    point_order: u64,
    step: i64,
}

impl<C: Coeff> SeminormEvaluator<C> {
    pub fn new(f: &LaurentPoly<C>, data: &RaynaudData, m: u64) -> Result<Self> {
        if f.rank() != data.r() {
            return Err(Error::DimensionMismatch {
                expected: data.r(),
                got: f.rank(),
            });
        }
        let point_order = m * data.n0();
        let order = lcm_order(f.order(), point_order);
        Ok(SeminormEvaluator {
            lifted: f.lift(order)?,
            point_order,
            step: (order / point_order) as i64,
        })
    }

    /// The exact value `f(x)`.
    pub fn evaluate(&self, x: &TorsionPoint, data: &RaynaudData) -> FieldElement<C> {
        debug_assert_eq!(x.m * data.n0(), self.point_order);
        let coords = coordinate_monomials(x, data);
        let mut sum = FieldElement::zero(self.lifted.order());
        for (v, a) in self.lifted.terms() {
            let zeta: i64 = v.iter().zip(&coords).map(|(&k, (b, _))| k * b).sum::<i64>() * self.step;
            let t_exp = v
                .iter()
                .zip(&coords)
                .fold(Q::zero(), |acc, (&k, (_, u))| acc + u * Q::from_integer(k.into()));
            sum = &sum + &a.mul_monomial(zeta, &t_exp);
        }
        sum
    }

    pub fn seminorm(&self, x: &TorsionPoint, data: &RaynaudData) -> Valuation {
        self.evaluate(x, data).valuation()
    }
}

/// `-log |f|_x` by exact substitution of the torsion coordinates.
pub fn point_seminorm<C: Coeff>(f: &LaurentPoly<C>, x: &TorsionPoint, data: &RaynaudData) -> Result<Valuation> {
    Ok(SeminormEvaluator::new(f, data, x.m)?.seminorm(x, data))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerCount {
    pub hits: u64,
    pub total: u64,
}

impl CornerCount {
    pub fn ratio(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Counts representatives where the point seminorm differs from the skeleton
/// value. Fails if a point seminorm falls below the skeleton value, or if a
/// disagreement happens off the corner locus.
pub fn corner_hit_count<C: Coeff>(f: &LaurentPoly<C>, data: &RaynaudData, m: u64) -> Result<CornerCount> {
    if f.is_zero() {
        return Err(Error::EmptyPolynomial);
    }
    let evaluator = SeminormEvaluator::new(f, data, m)?;
    let arrangement = CornerArrangement::new(&f.tropicalize());
    let total = data.representative_count(m)?;
    let hits = (0..total)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let x = data.torsion_point(m, i)?;
            let u = valuation(&x, data).ambient;
            let gauss = gauss_seminorm(f, &u)?;
            let actual = evaluator.seminorm(&x, data);
            if actual < gauss {
                return Err(Error::BoundViolation(format!(
                    "point seminorm {actual} below skeleton value {gauss} at c={:?} e={:?}",
                    x.c, x.e
                )));
            }
            if actual == gauss {
                return Ok(0);
            }
            if !arrangement.contains(&u) {
                return Err(Error::BoundViolation(format!(
                    "cancellation off the corner locus at c={:?} e={:?}",
                    x.c, x.e
                )));
            }
            Ok(1)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(CornerCount { hits, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::CycElement;
    use crate::scalar::{rat, rat_int};

    type Fe = FieldElement<Q>;
    type Lp = LaurentPoly<Q>;

    fn c(q: Q) -> Fe {
        Fe::monomial(CycElement::from_scalar(1, q), Q::zero())
    }

    fn t(q: Q) -> Fe {
        Fe::monomial(CycElement::one(1), q)
    }

    fn x_minus_one() -> Lp {
        Lp::from_terms(1, 1, [(vec![1], Fe::one(1)), (vec![0], c(rat_int(-1)))]).unwrap()
    }

    fn simple_trop() -> TropPoly {
        TropPoly {
            rank: 1,
            terms: [(vec![0], rat_int(0)), (vec![1], rat_int(1))].into_iter().collect(),
        }
    }

    #[test]
    fn trop_eval_examples() {
        let p = simple_trop();
        assert_eq!(trop_eval(&p, &[rat_int(0)]).unwrap(), (rat_int(0), vec![vec![0]]));
        assert_eq!(trop_eval(&p, &[rat_int(-1)]).unwrap(), (rat_int(0), vec![vec![0], vec![1]]));
        assert_eq!(trop_eval(&p, &[rat_int(1)]).unwrap(), (rat_int(0), vec![vec![0]]));
        let empty = TropPoly { rank: 1, terms: BTreeMap::new() };
        assert_eq!(trop_eval(&empty, &[rat_int(0)]), Err(Error::EmptyPolynomial));
    }

    #[test]
    fn arrangement_membership() {
        let arr = CornerArrangement::new(&simple_trop());
        assert_eq!(arr.functionals.len(), 1);
        assert!(arr.contains(&[rat_int(-1)]));
        assert!(!arr.contains(&[rat_int(0)]));
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(gauss_seminorm(&x_minus_one(), &[rat_int(0)]).unwrap(), Valuation::Finite(rat_int(0)));
        let konst = Lp::constant(2, t(rat(2, 3)));
        for u in [[rat_int(0), rat_int(5)], [rat(1, 2), rat(-7, 3)]] {
            assert_eq!(gauss_seminorm(&konst, &u).unwrap(), Valuation::Finite(rat(2, 3)));
        }
        let f = Lp::from_terms(1, 1, [(vec![1], Fe::one(1)), (vec![0], t(rat_int(1)))]).unwrap();
        assert_eq!(gauss_seminorm(&f, &[rat(1, 2)]).unwrap(), Valuation::Finite(rat(1, 2)));
        assert_eq!(gauss_seminorm(&Lp::zero(1, 1), &[rat_int(0)]).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn point_seminorm_examples() {
        let data = RaynaudData::tate();
        let id = TorsionPoint { m: 5, c: vec![0], e: vec![0], multiplicity: 1 };
        assert_eq!(point_seminorm(&x_minus_one(), &id, &data).unwrap(), Valuation::Infinite);
        for e in 1..5 {
            let x = TorsionPoint { m: 5, c: vec![0], e: vec![e], multiplicity: 1 };
            assert_eq!(point_seminorm(&x_minus_one(), &x, &data).unwrap(), Valuation::Finite(rat_int(0)));
        }
        let minus_one_plus_t = &c(rat_int(-1)) + &t(rat_int(1));
        let f = Lp::from_terms(1, 1, [(vec![1], Fe::one(1)), (vec![0], minus_one_plus_t)]).unwrap();
        assert_eq!(point_seminorm(&f, &id, &data).unwrap(), Valuation::Finite(rat_int(1)));
        assert_eq!(gauss_seminorm(&f, &[rat_int(0)]).unwrap(), Valuation::Finite(rat_int(0)));
        let rank2 = Lp::variable(2, 1, 0);
        assert!(point_seminorm(&rank2, &id, &data).is_err());
    }

    #[test]
    fn corner_counts_tate() {
        let data = RaynaudData::tate();
        let sq = Lp::from_terms(1, 1, [(vec![2], Fe::one(1)), (vec![0], c(rat_int(-1)))]).unwrap();
        for m in 2..=10u64 {
            let a = corner_hit_count(&x_minus_one(), &data, m).unwrap();
            assert_eq!(a, CornerCount { hits: 1, total: m * m });
            // x = -1 is pre-m-torsion only when m is even
            let b = corner_hit_count(&sq, &data, m).unwrap();
            assert_eq!(b.hits, if m % 2 == 0 { 2 } else { 1 }, "m = {m}");
        }
        let konst = Lp::constant(1, c(rat_int(3)));
        assert_eq!(corner_hit_count(&konst, &data, 7).unwrap().hits, 0);
        assert!(corner_hit_count(&Lp::zero(1, 1), &data, 3).is_err());
    }

    #[test]
    fn display_form() {
        assert_eq!(x_minus_one().to_string(), "(-1) + (1)*X1");
    }
}
