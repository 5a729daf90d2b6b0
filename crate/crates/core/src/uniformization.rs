//! Uniformization data `A^an = E / M` with split torus part of rank r and an
//! abelian part of good reduction of dimension s, and the pre-m-torsion
//! points of the torus together with their valuations.
//!
//! Lattice generators are monomial: the i-th coordinate of the j-th generator
//! is `zeta_N0^alpha[j][i] * t^gamma[j][i]`. A pre-m-torsion point is an `x`
//! with `x^m = q^c` for some integer vector `c`; modulo M we take
//! `c in [0,m)^r`, and the m^r roots of `q^c` are indexed by `e in [0,m)^r`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{CycElement, FieldElement};
use crate::lattice::{dual_lattice, reduce_mod_lattice, Lattice, SkeletonPoint};
use crate::scalar::Coeff;

type Q = BigRational;

/// Unchecked uniformization parameters, as read from a config.
#[derive(Clone, Debug, PartialEq)]
pub struct RaynaudSpec {
    pub r: i64,
    pub s: i64,
    pub n0: i64,
    /// `alpha[j][i]`: angular exponent of coordinate i of generator j.
    pub alpha: Vec<Vec<i64>>,
    /// `gamma[j]`: valuation vector of generator j.
    pub gamma: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RaynaudData {
    r: usize,
    s: usize,
    n0: u64,
    alpha: Vec<Vec<i64>>,
    lattice: Lattice,
    dual: Lattice,
}

/// Checks shapes and full rank of the valuation lattice.
pub fn validate(spec: &RaynaudSpec) -> Result<RaynaudData> {
    if spec.r < 0 || spec.s < 0 {
        return Err(Error::InvalidDimensions(format!(
            "negative dimension (r = {}, s = {})",
            spec.r, spec.s
        )));
    }
    if spec.r + spec.s < 1 {
        return Err(Error::InvalidDimensions("g = r + s must be at least 1".into()));
    }
    if spec.n0 < 1 {
        return Err(Error::InvalidDimensions(format!("N0 = {} must be positive", spec.n0)));
    }
    let r = spec.r as usize;
    for (name, rows) in [("alpha", spec.alpha.len()), ("gamma", spec.gamma.len())] {
        if rows != r {
            return Err(Error::InvalidDimensions(format!("{name} has {rows} rows, expected r = {r}")));
        }
    }
    if let Some(row) = spec.alpha.iter().find(|row| row.len() != r) {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: row.len(),
        });
    }
    let lattice = Lattice::from_generators(spec.gamma.clone())?;
    let dual = dual_lattice(&lattice);
    Ok(RaynaudData {
        r,
        s: spec.s as usize,
        n0: spec.n0 as u64,
        alpha: spec.alpha.clone(),
        lattice,
        dual,
    })
}

impl RaynaudData {
    /// The Tate curve with period `q = t`.
    pub fn tate() -> Self {
        validate(&RaynaudSpec {
            r: 1,
            s: 0,
            n0: 1,
            alpha: vec![vec![0]],
            gamma: vec![vec![Q::from_integer(1.into())]],
        })
        .unwrap()
    }

    /// Same toric data with a different abelian dimension.
    pub fn with_abelian_dim(&self, s: usize) -> Result<Self> {
        if self.r + s == 0 {
            return Err(Error::InvalidDimensions("g = r + s must be at least 1".into()));
        }
        Ok(RaynaudData { s, ..self.clone() })
    }

    pub fn spec(&self) -> RaynaudSpec {
        RaynaudSpec {
            r: self.r as i64,
            s: self.s as i64,
            n0: self.n0 as i64,
            alpha: self.alpha.clone(),
            gamma: self.lattice.generators(),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn g(&self) -> usize {
        self.r + self.s
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn alpha(&self) -> &[Vec<i64>] {
        &self.alpha
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dual(&self) -> &Lattice {
        &self.dual
    }

    /// Coordinates of the j-th lattice generator as elements of K.
    pub fn generator_coordinates<C: Coeff>(&self, j: usize) -> Vec<FieldElement<C>> {
        let gamma = self.lattice.generator(j);
        (0..self.r)
            .map(|i| FieldElement::unit_monomial(self.n0, self.alpha[j][i], gamma[i].clone()))
            .collect()
    }

    /// Number of torus representatives, `m^(2r)`.
    pub fn representative_count(&self, m: u64) -> Result<u64> {
        m.checked_pow(2 * self.r as u32).ok_or(Error::Overflow("m^(2r)"))
    }

    /// Abelian-part multiplicity `m^(2s)` carried by every representative.
    pub fn multiplicity(&self, m: u64) -> Result<u64> {
        m.checked_pow(2 * self.s as u32).ok_or(Error::Overflow("m^(2s)"))
    }

    /// `m^(2g)`, the number of m-torsion points of A.
    pub fn weighted_total(&self, m: u64) -> Result<u64> {
        m.checked_pow(2 * self.g() as u32).ok_or(Error::Overflow("m^(2g)"))
    }

    /// The representative with flat index `index`: the high r base-m digits
    /// are `c`, the low r digits are `e`.
    pub fn torsion_point(&self, m: u64, index: u64) -> Result<TorsionPoint> {
        if m == 0 {
            return Err(Error::ZeroOrder);
        }
        let multiplicity = self.multiplicity(m)?;
        let mut rest = index;
        let mut digits = Vec::with_capacity(2 * self.r);
        for _ in 0..2 * self.r {
            digits.push(rest % m);
            rest /= m;
        }
        let e = digits[..self.r].to_vec();
        let c = digits[self.r..].to_vec();
        Ok(TorsionPoint {
            m,
            c,
            e,
            multiplicity,
        })
    }
}

/// Representative of a pre-m-torsion point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorsionPoint {
    pub m: u64,
    /// Lattice-coset index in `[0,m)^r`.
    pub c: Vec<u64>,
    /// Angular index in `[0,m)^r`.
    pub e: Vec<u64>,
    /// `m^(2s)`.
    pub multiplicity: u64,
}

impl TorsionPoint {
    pub fn is_identity(&self) -> bool {
        self.c.iter().chain(&self.e).all(|&x| x == 0)
    }

    /// `c / m`, the generator coordinates of the valuation before reduction.
    pub fn beta(&self) -> Vec<Q> {
        self.c
            .iter()
            .map(|&c| Q::new(BigInt::from(c), BigInt::from(self.m)))
            .collect()
    }
}

/// Iterator over all `m^(2r)` representatives.
pub struct TorsionPoints<'a> {
    data: &'a RaynaudData,
    m: u64,
    next: u64,
    total: u64,
}

impl Iterator for TorsionPoints<'_> {
    type Item = TorsionPoint;

    fn next(&mut self) -> Option<TorsionPoint> {
        if self.next >= self.total {
            return None;
        }
        let p = self.data.torsion_point(self.m, self.next).ok();
        self.next += 1;
        p
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for TorsionPoints<'_> {}

pub fn torsion_points(data: &RaynaudData, m: u64) -> Result<TorsionPoints<'_>> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    data.multiplicity(m)?;
    Ok(TorsionPoints {
        data,
        m,
        next: 0,
        total: data.representative_count(m)?,
    })
}

/// `val(x)` reduced into the fundamental domain; independent of `x.e`.
pub fn valuation(x: &TorsionPoint, data: &RaynaudData) -> SkeletonPoint {
    let u = data.lattice.to_ambient(&x.beta());
    reduce_mod_lattice(&u, &data.lattice).expect("torsion point rank matches data")
}

/// Coordinates as `(b_i, u_i)`: `x_i = zeta_{m N0}^{b_i} t^{u_i}` with
/// `b_i = sum_j alpha[j][i] c_j + N0 e_i (mod m N0)` and `u = Gamma c / m`.
pub fn coordinate_monomials(x: &TorsionPoint, data: &RaynaudData) -> Vec<(i64, Q)> {
    let order = (x.m * data.n0) as i64;
    let u = data.lattice.to_ambient(&x.beta());
    (0..data.r)
        .map(|i| {
            let angular: i64 = (0..data.r)
                .map(|j| data.alpha[j][i] * x.c[j] as i64)
                .sum::<i64>()
                + data.n0 as i64 * x.e[i] as i64;
            (angular.rem_euclid(order), u[i].clone())
        })
        .collect()
}

/// Exact monomial coordinates in Q(zeta_{m N0}); `x_i^m` is the i-th
/// coordinate of `prod_j q_j^{c_j}`.
pub fn torsion_coordinates<C: Coeff>(x: &TorsionPoint, data: &RaynaudData) -> Vec<FieldElement<C>> {
    let order = x.m * data.n0;
    coordinate_monomials(x, data)
        .into_iter()
        .map(|(b, u)| FieldElement::monomial(CycElement::zeta_pow(order, b), u))
        .collect()
}
