//! Full-rank rational lattices, the real torus R^r / Gamma and integration
//! against its Haar probability measure.
//!
//! The fundamental domain is `Gamma * [0,1)^r`: a point of the torus is stored
//! by its generator coordinates `beta` together with the ambient vector
//! `Gamma * beta`, both exact.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{frac, fmt_rational, pairwise_sum, Real};

type Q = BigRational;

fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn transpose(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
}

/// Exact determinant and inverse by Gauss-Jordan elimination.
/// Returns `None` for a singular matrix.
fn det_and_inverse(m: &[Vec<Q>]) -> (Q, Option<Vec<Vec<Q>>>) {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    let mut det = Q::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return (Q::zero(), None);
        };
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in 0..n {
                    let da = &factor * &a[col][j];
                    a[r][j] -= da;
                    let di = &factor * &inv[col][j];
                    inv[r][j] -= di;
                }
            }
        }
    }
    (det, Some(inv))
}

/// Full-rank lattice Gamma in Q^r, generated by the columns of `matrix`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    matrix: Vec<Vec<Q>>,
    inverse: Vec<Vec<Q>>,
}

impl Lattice {
    /// `generators[j]` is the j-th generator gamma_j (a column of Gamma).
    pub fn from_generators(generators: Vec<Vec<Q>>) -> Result<Self> {
        let r = generators.len();
        for g in &generators {
            if g.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: g.len(),
                });
            }
        }
        Self::from_matrix(transpose(&generators))
    }

    /// Square matrix whose columns are the generators.
    pub fn from_matrix(matrix: Vec<Vec<Q>>) -> Result<Self> {
        let r = matrix.len();
        if let Some(row) = matrix.iter().find(|row| row.len() != r) {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: row.len(),
            });
        }
        match det_and_inverse(&matrix) {
            (_, Some(inverse)) => Ok(Lattice { matrix, inverse }),
            (_, None) => Err(Error::DegenerateLattice),
        }
    }

    pub fn identity(r: usize) -> Self {
        let m = (0..r)
            .map(|i| (0..r).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        Self::from_matrix(m).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.matrix
    }

    pub fn generator(&self, j: usize) -> Vec<Q> {
        self.matrix.iter().map(|row| row[j].clone()).collect()
    }

    pub fn generators(&self) -> Vec<Vec<Q>> {
        (0..self.rank()).map(|j| self.generator(j)).collect()
    }

    pub fn determinant(&self) -> Q {
        det_and_inverse(&self.matrix).0
    }

    /// `Gamma * beta`.
    pub fn to_ambient(&self, beta: &[Q]) -> Vec<Q> {
        mat_vec(&self.matrix, beta)
    }

    /// `Gamma^-1 * u`.
    pub fn to_coordinates(&self, u: &[Q]) -> Vec<Q> {
        mat_vec(&self.inverse, u)
    }

    /// Integer pairings `<k, gamma_j>` if k lies in the dual lattice.
    pub fn dual_coordinates(&self, k: &[Q]) -> Result<Vec<BigInt>> {
        if k.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: k.len(),
            });
        }
        mat_vec(&transpose(&self.matrix), k)
            .into_iter()
            .map(|p| if p.is_integer() { Ok(p.to_integer()) } else { Err(Error::NotDual) })
            .collect()
    }

    pub fn contains_dual(&self, k: &[Q]) -> bool {
        self.dual_coordinates(k).is_ok()
    }

    /// The dual vector with integer pairings `n`: `K * n` where `K = Gamma^-T`.
    pub fn dual_vector(&self, n: &[i64]) -> Vec<Q> {
        let nq: Vec<Q> = n.iter().map(|&x| Q::from_integer(x.into())).collect();
        mat_vec(&transpose(&self.inverse), &nq)
    }
}

/// A point of R^r / Gamma in the fundamental domain `Gamma [0,1)^r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkeletonPoint {
    pub beta: Vec<Q>,
    pub ambient: Vec<Q>,
}

impl SkeletonPoint {
    pub fn origin(r: usize) -> Self {
        SkeletonPoint {
            beta: vec![Q::zero(); r],
            ambient: vec![Q::zero(); r],
        }
    }

    /// `beta` as floats.
    pub fn beta_real<F: Real>(&self) -> Vec<F> {
        self.beta.iter().map(F::from_rational).collect()
    }

    /// `exp(2 pi i <k, u>)` for `k` with integer dual coordinates `n`: the phase
    /// is `<n, beta>` reduced exactly modulo 1 before leaving the rationals.
    pub fn character<F: Real>(&self, n: &[BigInt]) -> Complex<F> {
        let phase = self
            .beta
            .iter()
            .zip(n)
            .fold(Q::zero(), |acc, (b, k)| acc + b * Q::from_integer(k.clone()));
        let theta = F::tau() * F::from_rational(&frac(&phase));
        Complex::new(theta.cos(), theta.sin())
    }
}

impl std::fmt::Display for SkeletonPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.beta.iter().map(fmt_rational).collect();
        write!(f, "({})", parts.join(" "))
    }
}

pub fn reduce_mod_lattice(u: &[Q], lattice: &Lattice) -> Result<SkeletonPoint> {
    if u.len() != lattice.rank() {
        return Err(Error::DimensionMismatch {
            expected: lattice.rank(),
            got: u.len(),
        });
    }
    let beta: Vec<Q> = lattice.to_coordinates(u).iter().map(frac).collect();
    let ambient = lattice.to_ambient(&beta);
    Ok(SkeletonPoint { beta, ambient })
}

/// Gamma* = { k : <k, gamma_j> in Z }, generated by the columns of Gamma^-T.
pub fn dual_lattice(lattice: &Lattice) -> Lattice {
    Lattice::from_matrix(transpose(&lattice.inverse)).expect("inverse of a full-rank matrix")
}

fn grid_point(lattice: &Lattice, n: usize, mut index: usize) -> SkeletonPoint {
    let r = lattice.rank();
    let denom = BigInt::from(2 * n);
    let mut beta = Vec::with_capacity(r);
    for _ in 0..r {
        let i = index % n;
        index /= n;
        beta.push(Q::new(BigInt::from(2 * i + 1), denom.clone()));
    }
    let ambient = lattice.to_ambient(&beta);
    SkeletonPoint { beta, ambient }
}

fn grid_size(r: usize, n: usize) -> usize {
    n.checked_pow(r as u32).expect("grid too large")
}

/// Midpoint rule on the `n^r` grid `Gamma ((i + 1/2) / n)` against the Haar
/// probability measure. For f Lipschitz in `beta` with constant L the error is
/// at most `L r / (2n)`.
pub fn haar_integral<F, G>(f: G, lattice: &Lattice, n: usize) -> F
where
    F: Real,
    G: Fn(&SkeletonPoint) -> F + Sync,
{
    assert!(n >= 1, "grid resolution must be positive");
    let total = grid_size(lattice.rank(), n);
    let values: Vec<F> = (0..total)
        .into_par_iter()
        .map(|i| f(&grid_point(lattice, n, i)))
        .collect();
    pairwise_sum(&values) / F::from_usize(total).unwrap()
}

/// Same grid as [`haar_integral`], for exactly-valued integrands.
pub fn haar_integral_exact<G>(f: G, lattice: &Lattice, n: usize) -> Q
where
    G: Fn(&SkeletonPoint) -> Q + Sync,
{
    assert!(n >= 1, "grid resolution must be positive");
    let total = grid_size(lattice.rank(), n);
    let sum = (0..total)
        .into_par_iter()
        .map(|i| f(&grid_point(lattice, n, i)))
        .reduce(Q::zero, |a, b| a + b);
    sum / Q::from_integer(total.into())
}

/// Star discrepancy `sup_a | #{x < a}/n - a |` of points in [0,1), exactly:
/// `max_i max(i/n - x_(i), x_(i) - (i-1)/n)` over the sorted points.
pub fn star_discrepancy_1d(points: &[Q]) -> Result<Q> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    let n = Q::from_integer(sorted.len().into());
    let mut best = Q::zero();
    for (i, x) in sorted.iter().enumerate() {
        let lo = Q::from_integer(i.into()) / &n;
        let hi = Q::from_integer((i + 1).into()) / &n;
        for d in [&hi - x, x - &lo] {
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

fn dual_box(r: usize, k_max: i64) -> Vec<Vec<i64>> {
    let side = (2 * k_max + 1) as usize;
    let mut out = Vec::new();
    for mut idx in 0..side.pow(r as u32) {
        let mut n = Vec::with_capacity(r);
        for _ in 0..r {
            n.push((idx % side) as i64 - k_max);
            idx /= side;
        }
        if n.iter().any(|&x| x != 0) {
            out.push(n);
        }
    }
    out
}

/// Empirical character sum `(1/N) sum_p exp(2 pi i <k, u_p>)` where `k` has
/// integer dual coordinates `n`.
pub fn character_sum<F: Real>(points: &[SkeletonPoint], n: &[BigInt]) -> Complex<F> {
    let values: Vec<Complex<F>> = points.iter().map(|p| p.character(n)).collect();
    let re: Vec<F> = values.iter().map(|c| c.re).collect();
    let im: Vec<F> = values.iter().map(|c| c.im).collect();
    let count = F::from_usize(points.len()).unwrap();
    Complex::new(pairwise_sum(&re) / count, pairwise_sum(&im) / count)
}

/// Truncated weighted character discrepancy:
/// `( sum_{0 < |n|_inf <= K} |S(n)|^2 / prod (1+|n_i|)^2 )^(1/2)`.
pub fn diaphony<F: Real>(points: &[SkeletonPoint], lattice: &Lattice, k_max: i64) -> Result<F> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if let Some(p) = points.iter().find(|p| p.beta.len() != lattice.rank()) {
        return Err(Error::DimensionMismatch {
            expected: lattice.rank(),
            got: p.beta.len(),
        });
    }
    assert!(k_max >= 1, "k_max must be positive");
    let terms: Vec<F> = dual_box(lattice.rank(), k_max)
        .into_par_iter()
        .map(|n| {
            let weight = n
                .iter()
                .map(|&x| F::from_i64((1 + x.abs()).pow(2)).unwrap())
                .fold(F::one(), |a, b| a * b);
            let nb: Vec<BigInt> = n.iter().map(|&x| BigInt::from(x)).collect();
            character_sum::<F>(points, &nb).norm_sqr() / weight
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// Beta coordinates of the refined grid `{ c / m : c in [0,m)^r }`.
pub fn refined_grid(lattice: &Lattice, m: u64) -> Vec<SkeletonPoint> {
    let r = lattice.rank();
    let total = (m as usize).pow(r as u32);
    (0..total)
        .map(|mut idx| {
            let beta: Vec<Q> = (0..r)
                .map(|_| {
                    let c = idx % m as usize;
                    idx /= m as usize;
                    Q::new(BigInt::from(c), BigInt::from(m))
                })
                .collect();
            let ambient = lattice.to_ambient(&beta);
            SkeletonPoint { beta, ambient }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn rank2() -> Lattice {
        Lattice::from_generators(vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat(1, 2), rat(3, 2)],
        ])
        .unwrap()
    }

    #[test]
    fn reduce_identity() {
        let p = reduce_mod_lattice(&[rat(5, 4), rat(-1, 2)], &Lattice::identity(2)).unwrap();
        assert_eq!(p.beta, vec![rat(1, 4), rat(1, 2)]);
    }

    #[test]
    fn reduce_scaled_rank_one() {
        let l = Lattice::from_generators(vec![vec![rat(3, 2)]]).unwrap();
        let p = reduce_mod_lattice(&[rat_int(2)], &l).unwrap();
        assert_eq!(p.beta, vec![rat(1, 3)]);
        assert_eq!(p.ambient, vec![rat(1, 2)]);
    }

    #[test]
    fn lattice_points_reduce_to_origin() {
        let l = rank2();
        let u = l.to_ambient(&[rat_int(3), rat_int(-2)]);
        assert_eq!(reduce_mod_lattice(&u, &l).unwrap(), SkeletonPoint::origin(2));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            reduce_mod_lattice(&[rat_int(1)], &rank2()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn singular_lattice_rejected() {
        let gens = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(1), rat_int(0)]];
        assert_eq!(Lattice::from_generators(gens), Err(Error::DegenerateLattice));
    }

    #[test]
    fn dual_of_identity() {
        assert_eq!(dual_lattice(&Lattice::identity(3)), Lattice::identity(3));
    }

    #[test]
    fn dual_of_rank2_example() {
        let d = dual_lattice(&rank2());
        assert_eq!(d.generator(0), vec![rat_int(1), rat(-1, 3)]);
        assert_eq!(d.generator(1), vec![rat_int(0), rat(2, 3)]);
        assert_eq!(dual_lattice(&d), rank2());
    }

    #[test]
    fn dual_rank_one() {
        let l = Lattice::from_generators(vec![vec![rat(-5, 7)]]).unwrap();
        assert_eq!(dual_lattice(&l).generator(0), vec![rat(-7, 5)]);
    }

    #[test]
    fn dual_membership() {
        let l = rank2();
        assert!(l.contains_dual(&[rat_int(1), rat(-1, 3)]));
        assert!(!l.contains_dual(&[rat_int(0), rat(1, 3)]));
        assert_eq!(l.dual_vector(&[1, 0]), vec![rat_int(1), rat(-1, 3)]);
    }

    #[test]
    fn haar_of_constant() {
        let v: f64 = haar_integral(|_| 1.0, &rank2(), 7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_of_character_vanishes() {
        let l = Lattice::identity(2);
        for n in [[1i64, 0], [0, 1], [2, -3], [4, 4]] {
            let nb: Vec<BigInt> = n.iter().map(|&x| x.into()).collect();
            let v: f64 = haar_integral(|p| p.character::<f64>(&nb).re, &l, 64);
            assert!(v.abs() <= 1e-12, "n = {n:?}: {v}");
        }
    }

    #[test]
    fn haar_of_tent() {
        let l = Lattice::identity(1);
        let v: f64 = haar_integral(
            |p| {
                let b: f64 = p.beta_real::<f64>()[0];
                b.min(1.0 - b)
            },
            &l,
            10_000,
        );
        assert!((v - 0.25).abs() < 1e-4);
    }

    #[test]
    fn star_discrepancy_examples() {
        for m in 1..=100i64 {
            let pts: Vec<Q> = (0..m).map(|c| rat(c, m)).collect();
            assert_eq!(star_discrepancy_1d(&pts).unwrap(), rat(1, m));
        }
        assert_eq!(star_discrepancy_1d(&[rat_int(0)]).unwrap(), rat_int(1));
        assert_eq!(star_discrepancy_1d(&[rat(1, 2)]).unwrap(), rat(1, 2));
        assert_eq!(star_discrepancy_1d(&[]), Err(Error::EmptyPointSet));
    }

    #[test]
    fn diaphony_of_full_grid_vanishes() {
        let l = rank2();
        let pts = refined_grid(&l, 5);
        let d: f64 = diaphony(&pts, &l, 4).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn diaphony_of_repeated_point_is_positive() {
        let l = rank2();
        let p = reduce_mod_lattice(&[rat(1, 3), rat(1, 7)], &l).unwrap();
        let d: f64 = diaphony(&vec![p; 4], &l, 2).unwrap();
        assert!(d > 0.1);
    }

    #[test]
    fn half_shift_cancels_first_character() {
        let l = rank2();
        let shift = l.generator(0).iter().map(|x| x / rat_int(2)).collect::<Vec<_>>();
        let base = [vec![rat(1, 5), rat(2, 7)], vec![rat(3, 11), rat(0, 1)]];
        let mut pts = Vec::new();
        for u in &base {
            pts.push(reduce_mod_lattice(u, &l).unwrap());
            let v: Vec<Q> = u.iter().zip(&shift).map(|(a, b)| a + b).collect();
            pts.push(reduce_mod_lattice(&v, &l).unwrap());
        }
        let s: Complex<f64> = character_sum(&pts, &[BigInt::from(1), BigInt::from(0)]);
        assert!(s.norm() < 1e-15);
        assert!(diaphony::<f64>(&[], &l, 1).is_err());
    }
}
