//! Sparse multivariate polynomials keyed by multi-index.
//!
//! Coefficients are generic so the same algebra runs in `f64`, in `Complex64`
//! and in exact `BigRational` arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exponent vector `α = (α_1, …, α_n)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize, power: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = power;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }

    /// All multi-indices of `n` entries with total degree `d`, in lexicographic order.
    pub fn all_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if pos == n - 1 {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for a in 0..=left {
                cur[pos] = a;
                rec(pos + 1, left - a, cur, out);
            }
        }
        if n == 0 {
            return out;
        }
        rec(0, d, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_ratio(num: i64, den: i64) -> Self;
}

impl Coeff for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Coeff for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
}

impl Coeff for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Exact conversion of a finite float to a rational (every finite f64 is dyadic).
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Sparse polynomial in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    n: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    pub fn monomial(alpha: MultiIndex, c: C) -> Self {
        let mut p = Poly::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial from `(α, c)` pairs, summing repeated indices.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Self {
        let mut p = Poly::zero(n);
        for (a, c) in terms {
            assert_eq!(a.dim(), n, "multi-index length must equal the dimension");
            p.add_term(a, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<MultiIndex, C> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c·x^α`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&alpha);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// Degree when every term has the same total degree; `None` for mixed or zero polynomials.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::degree);
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn homogeneous_part(&self, d: u32) -> Poly<C> {
        Poly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == d)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Poly<C> {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), f(c));
        }
        out
    }

    /// `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> Poly<C> {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            let e = a.0[i];
            if e == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[i] = e - 1;
            out.add_term(b, c.clone() * C::from_ratio(e as i64, 1));
        }
        out
    }

    /// Coefficient-wise Laplacian `Σ_i ∂²/∂x_i²`.
    pub fn laplacian(&self) -> Poly<C> {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            for i in 0..self.n {
                let e = a.0[i];
                if e < 2 {
                    continue;
                }
                let mut b = a.clone();
                b.0[i] = e - 2;
                out.add_term(b, c.clone() * C::from_ratio((e * (e - 1)) as i64, 1));
            }
        }
        out
    }

    /// `(x_1² + … + x_n²)^power`.
    pub fn norm_sq_power(n: usize, power: u32) -> Poly<C> {
        let mut p = Poly::constant(n, C::one());
        let mut sq = Poly::zero(n);
        for i in 0..n {
            sq.add_term(MultiIndex::unit(n, i, 2), C::one());
        }
        for _ in 0..power {
            p = &p * &sq;
        }
        p
    }

    /// Re-embeds a polynomial in `m` variables into `n ≥ m + offset` variables,
    /// mapping variable `i` to `i + offset`.
    pub fn embed(&self, n: usize, offset: usize) -> Poly<C> {
        assert!(offset + self.n <= n);
        let mut out = Poly::zero(n);
        for (a, c) in &self.terms {
            let mut b = vec![0u32; n];
            b[offset..offset + self.n].copy_from_slice(&a.0);
            out.add_term(MultiIndex(b), c.clone());
        }
        out
    }
}

impl<'a, C: Coeff> Add for &'a Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl<'a, C: Coeff> Sub for &'a Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }
}

impl<'a, C: Coeff> Mul for &'a Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &'a Poly<C>) -> Poly<C> {
        assert_eq!(self.n, rhs.n);
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                out.add_term(a.plus(b), c.clone() * d.clone());
            }
        }
        out
    }
}

/// Table of `z_i^e` for every variable up to the maximal exponent used.
fn power_table(z: &[Complex64], max_exp: &[u32]) -> Vec<Vec<Complex64>> {
    z.iter()
        .zip(max_exp)
        .map(|(&zi, &m)| {
            let mut row = Vec::with_capacity(m as usize + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            row.push(acc);
            for _ in 0..m {
                acc *= zi;
                row.push(acc);
            }
            row
        })
        .collect()
}

fn max_exponents<C>(p: &Poly<C>) -> Vec<u32> {
    let mut m = vec![0u32; p.n];
    for a in p.terms.keys() {
        for (mi, &ai) in m.iter_mut().zip(&a.0) {
            *mi = (*mi).max(ai);
        }
    }
    m
}

impl Poly<f64> {
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut s = 0.0;
        for (a, c) in &self.terms {
            let mut t = *c;
            for (xi, &e) in x.iter().zip(&a.0) {
                t *= xi.powi(e as i32);
            }
            s += t;
        }
        s
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.n);
        let pw = power_table(z, &max_exponents(self));
        let mut s = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (row, &e) in pw.iter().zip(&a.0) {
                t *= row[e as usize];
            }
            s += t;
        }
        s
    }

    /// `Σ_α |c_α| |z_1|^{α_1} ⋯ |z_n|^{α_n}`, the natural scale of rounding error
    /// in evaluating the polynomial at `z`.
    pub fn modulus_bound(&self, z: &[Complex64]) -> f64 {
        let abs: Vec<f64> = z.iter().map(|v| v.norm()).collect();
        self.terms
            .iter()
            .map(|(a, c)| {
                a.0.iter()
                    .zip(&abs)
                    .fold(c.abs(), |acc, (&e, &r)| acc * r.powi(e as i32))
            })
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Poly<Complex64> {
    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.n);
        let pw = power_table(z, &max_exponents(self));
        let mut s = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            let mut t = *c;
            for (row, &e) in pw.iter().zip(&a.0) {
                t *= row[e as usize];
            }
            s += t;
        }
        s
    }

    pub fn modulus_bound(&self, z: &[Complex64]) -> f64 {
        let abs: Vec<f64> = z.iter().map(|v| v.norm()).collect();
        self.terms
            .iter()
            .map(|(a, c)| {
                a.0.iter()
                    .zip(&abs)
                    .fold(c.norm(), |acc, (&e, &r)| acc * r.powi(e as i32))
            })
            .sum()
    }

    pub fn real_part(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.re)
    }

    pub fn imag_part(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(terms: &[(&[u32], f64)]) -> Poly<f64> {
        Poly::from_terms(
            terms[0].0.len(),
            terms.iter().map(|(a, c)| (MultiIndex(a.to_vec()), *c)),
        )
    }

    #[test]
    fn cancellation_prunes_terms() {
        let p = p2(&[(&[1, 0], 1.0), (&[0, 1], 2.0)]);
        let q = p2(&[(&[1, 0], 1.0)]);
        let d = &p - &q;
        assert_eq!(d.len(), 1);
        assert_eq!(d.coeff(&MultiIndex(vec![0, 1])), 2.0);
    }

    #[test]
    fn laplacian_of_norm_square_power() {
        // Δ|x|^{2s} = 2s(2s + n − 2)|x|^{2s−2}
        let n = 3;
        let p: Poly<BigRational> = Poly::norm_sq_power(n, 3);
        let lap = p.laplacian();
        let expected = Poly::norm_sq_power(n, 2).scale(&BigRational::from_ratio(6 * 7, 1));
        assert_eq!(lap, expected);
    }

    #[test]
    fn all_of_degree_counts() {
        assert_eq!(MultiIndex::all_of_degree(3, 4).len(), 15);
        assert_eq!(MultiIndex::all_of_degree(1, 5), vec![MultiIndex(vec![5])]);
        let v = MultiIndex::all_of_degree(4, 3);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn complex_eval_matches_real_on_real_points() {
        let p = p2(&[(&[2, 1, 0], 1.5), (&[0, 0, 3], -0.25), (&[1, 1, 1], 3.0)]);
        let x = [0.3, -1.2, 0.7];
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let zc = p.eval_complex(&z);
        assert_eq!(zc.im, 0.0);
        assert!((zc.re - p.eval_real(&x)).abs() <= 4.0 * f64::EPSILON * p.modulus_bound(&z));
    }

    #[test]
    fn embed_shifts_variables() {
        let p = p2(&[(&[1, 2], 1.0)]);
        let q = p.embed(4, 1);
        assert_eq!(q.coeff(&MultiIndex(vec![0, 1, 2, 0])), 1.0);
    }

    #[test]
    fn partial_derivative() {
        let p = p2(&[(&[3, 1], 2.0)]);
        let d = p.partial(0);
        assert_eq!(d.coeff(&MultiIndex(vec![2, 1])), 6.0);
    }
}
