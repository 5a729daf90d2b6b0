//! Finite fields F_q, q = p^k <= 10^6, with log/exp multiplication tables.
//!
//! An element is stored as the base-p integer whose digits are its
//! coefficients in the power basis of F_p[x]/(modulus). Prime-field elements
//! therefore keep their usual integer value for every k.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_FIELD_SIZE: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fq(pub u32);

impl Fq {
    pub fn index(self) -> u32 {
        self.0
    }
}

type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
            .collect(),
    )
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    acc
}

/// Remainder of `a` modulo a nonzero `f`.
fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Poly {
    let mut r = trim(a.to_vec());
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let shift = r.len() - 1 - df;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, fi) in f.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * fi % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, f, p)
}

fn poly_powmod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Poly {
    let mut acc = poly_rem(&[1], f, p);
    let mut b = poly_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `f` (monic, degree k) is irreducible over F_p iff
/// `x^(p^k) = x mod f` and `gcd(x^(p^d) - x, f) = 1` for every proper divisor
/// `d` of `k`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    if k == 0 {
        return false;
    }
    let x: Poly = poly_rem(&[0, 1], f, p);
    let mut frob = vec![x.clone()];
    for _ in 0..k {
        let next = poly_powmod(frob.last().unwrap(), p, f, p);
        frob.push(next);
    }
    if frob[k] != x {
        return false;
    }
    (1..k)
        .filter(|d| k.is_multiple_of(*d))
        .all(|d| poly_gcd(f, &poly_sub(&frob[d], &x, p), p).len() == 1)
}

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    k: u32,
    q: u64,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FiniteField {}

impl FiniteField {
    /// F_{p^k} with the lexicographically first irreducible monic modulus.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::Field(format!("p = {p} must be an odd prime")));
        }
        if k == 0 {
            return Err(Error::Field("extension degree must be positive".into()));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_FIELD_SIZE)
            .ok_or(Error::FieldTooLarge(p.saturating_pow(k)))?;
        let k_us = k as usize;
        let modulus = (0..q)
            .map(|low| {
                let mut f: Poly = Vec::with_capacity(k_us + 1);
                let mut n = low;
                for _ in 0..k_us {
                    f.push(n % p);
                    n /= p;
                }
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial of every degree exists");
        let mut field = FiniteField {
            p,
            k,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        field.build_tables();
        Ok(field)
    }

    fn to_poly(&self, idx: u64) -> Poly {
        let mut n = idx;
        trim(
            (0..self.k)
                .map(|_| {
                    let d = n % self.p;
                    n /= self.p;
                    d
                })
                .collect(),
        )
    }

    fn poly_index(&self, f: &[u64]) -> u64 {
        f.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn build_tables(&mut self) {
        let order = self.q - 1;
        let factors = prime_factors(order);
        let generator = (1..self.q)
            .map(|i| self.to_poly(i))
            .find(|g| {
                factors
                    .iter()
                    .all(|l| poly_powmod(g, order / l, &self.modulus, self.p) != [1])
            })
            .expect("the multiplicative group is cyclic");
        let n = order as usize;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![0u32; self.q as usize];
        let mut cur: Poly = vec![1];
        for i in 0..n {
            let idx = self.poly_index(&cur);
            exp[i] = idx as u32;
            exp[i + n] = idx as u32;
            log[idx as usize] = i as u32;
            cur = poly_mulmod(&cur, &generator, &self.modulus, self.p);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    /// Ascending coefficients, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    pub fn one(&self) -> Fq {
        Fq(1)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn element(&self, index: u64) -> Result<Fq> {
        if index < self.q {
            Ok(Fq(index as u32))
        } else {
            Err(Error::Field(format!("index {index} outside F_{}", self.q)))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q as u32).map(Fq)
    }

    pub fn in_prime_field(&self, x: Fq) -> bool {
        (x.0 as u64) < self.p
    }

    fn digitwise(&self, a: Fq, b: Fq, op: impl Fn(u64, u64) -> u64) -> Fq {
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let (mut out, mut place) = (0u64, 1u64);
        for _ in 0..self.k {
            out += op(x % self.p, y % self.p) % self.p * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Fq(out as u32)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        self.digitwise(a, b, |x, y| x + y)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        let p = self.p;
        self.digitwise(a, b, move |x, y| x + p - y)
    }

    pub fn neg(&self, a: Fq) -> Fq {
        self.sub(Fq(0), a)
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq(0);
        }
        Fq(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a.0 == 0 {
            return None;
        }
        let n = (self.q - 1) as u32;
        Some(Fq(self.exp[((n - self.log[a.0 as usize]) % n) as usize]))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq(1);
        }
        if a.0 == 0 {
            return Fq(0);
        }
        let n = self.q - 1;
        let l = (self.log[a.0 as usize] as u64 * (e % n)) % n;
        Fq(self.exp[l as usize])
    }

    /// `n * a` for an integer `n`.
    pub fn scale(&self, n: i64, a: Fq) -> Fq {
        self.mul(self.from_int(n), a)
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility() {
        // x^2 + 1 is irreducible mod 3, x^2 - 1 is not
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[2, 0, 1], 3));
        // (x^2 + x + 2)(x^3 + 2x + 1) over F_3: no roots, still reducible
        let f = {
            let a = [2u64, 1, 1];
            let b = [1u64, 2, 0, 1];
            let mut out = vec![0u64; 6];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] = (out[i + j] + x * y) % 3;
                }
            }
            out
        };
        assert!(!is_irreducible(&f, 3));
    }

    #[test]
    fn field_axioms_small() {
        for (p, k) in [(3, 1), (3, 2), (5, 2), (7, 1), (5, 3)] {
            let f = FiniteField::new(p, k).unwrap();
            assert_eq!(f.size(), p.pow(k));
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                assert_eq!(f.pow(a, f.size()), a);
            }
        }
    }

    #[test]
    fn distributive() {
        let f = FiniteField::new(5, 2).unwrap();
        for a in f.elements().step_by(3) {
            for b in f.elements().step_by(5) {
                for c in f.elements().step_by(7) {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn prime_field_embedding() {
        let f = FiniteField::new(5, 4).unwrap();
        assert_eq!(f.mul(f.from_int(3), f.from_int(4)), f.from_int(2));
        assert_eq!(f.add(f.from_int(3), f.from_int(4)), f.from_int(2));
    }

    #[test]
    fn rejects() {
        assert!(matches!(FiniteField::new(2, 3), Err(Error::Field(_))));
        assert!(matches!(FiniteField::new(9, 1), Err(Error::Field(_))));
        assert_eq!(FiniteField::new(7, 8), Err(Error::FieldTooLarge(5_764_801)));
    }
}
