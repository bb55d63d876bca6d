//! Product quadrature on `S^{n−1}` and Laplace–Fourier coefficients
//! `f_{k,l}(r) = ∫ f(rθ) Y_{k,l}(θ) dθ`.
//!
//! A point of `S^{n−1}` is written `θ = (t, √(1−t²) θ')` with `θ' ∈ S^{n−2}`, so
//! `dθ = (1−t²)^{(n−3)/2} dt dθ'`. The `t` factor uses Gauss nodes for that weight
//! and the recursion bottoms out at the equispaced trapezoid rule on the circle.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LieError, Result};
use crate::harmonic_basis::{HarmonicBasis, HarmonicSystem};
use crate::poly::Poly;
use crate::special_functions::gamma_half;

/// Default ceiling on the number of rule nodes.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Nodes per parallel work unit; fixed so that reductions do not depend on the thread count.
pub(crate) const CHUNK: usize = 512;

/// Quadrature rule on the unit sphere, exact for polynomials of degree `≤ exact_degree`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    n: usize,
    exact_degree: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_j w_j f(θ_j)` in node order.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_poly(&self, p: &Poly<f64>) -> f64 {
        self.integrate(|x| p.eval_real(x))
    }
}

/// Number of nodes `build_rule(n, degree)` would produce.
pub fn rule_size(n: usize, degree: usize) -> u128 {
    let polar = (degree / 2 + 1) as u128;
    (degree as u128 + 1) * polar.pow(n.saturating_sub(2) as u32)
}

pub fn build_rule(n: usize, exact_degree: usize) -> Result<SphereRule> {
    build_rule_capped(n, exact_degree, DEFAULT_NODE_CAP)
}

pub fn build_rule_capped(n: usize, exact_degree: usize, node_cap: usize) -> Result<SphereRule> {
    if n < 2 {
        return Err(LieError::invalid("n", format!("dimension must be ≥ 2, got {n}")));
    }
    let size = rule_size(n, exact_degree);
    if size > node_cap as u128 {
        return Err(LieError::ResourceCap {
            cap: format!("quadrature nodes ≤ {node_cap}"),
            requested: format!("{size} nodes for n = {n}, degree {exact_degree}"),
        });
    }
    let (coords, weights) = product_rule(n, exact_degree);
    Ok(SphereRule {
        n,
        exact_degree,
        coords,
        weights,
    })
}

fn product_rule(n: usize, degree: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 2 {
        let m = degree + 1;
        let w = 2.0 * PI / m as f64;
        let mut coords = Vec::with_capacity(2 * m);
        for j in 0..m {
            let phi = 2.0 * PI * j as f64 / m as f64;
            coords.push(phi.cos());
            coords.push(phi.sin());
        }
        return (coords, vec![w; m]);
    }
    let (sub_coords, sub_weights) = product_rule(n - 1, degree);
    let (ts, tw) = gauss_gegenbauer(degree / 2 + 1, (n as f64 - 3.0) / 2.0);
    let mut coords = Vec::with_capacity(ts.len() * sub_coords.len() / (n - 1) * n);
    let mut weights = Vec::with_capacity(ts.len() * sub_weights.len());
    for (&t, &w) in ts.iter().zip(&tw) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (x, &v) in sub_coords.chunks_exact(n - 1).zip(&sub_weights) {
            coords.push(t);
            coords.extend(x.iter().map(|c| s * c));
            weights.push(w * v);
        }
    }
    (coords, weights)
}

/// Gauss nodes and weights on `[−1, 1]` for the weight `(1 − t²)^alpha`, `alpha > −1`,
/// exact for polynomials of degree `≤ 2·npts − 1`.
pub fn gauss_gegenbauer(npts: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(alpha > -1.0, "weight exponent must exceed −1");
    if npts == 0 {
        return (Vec::new(), Vec::new());
    }
    let lambda = alpha + 0.5;
    // monic three-term recurrence p_{k+1} = t p_k − b_k p_{k−1}
    let b = |k: usize| -> f64 {
        let k = k as f64;
        if k == 1.0 && lambda == 0.0 {
            return 0.5;
        }
        k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))
    };
    let mu0 = PI.sqrt() * gamma_ratio(alpha);
    let mut jac = DMatrix::<f64>::zeros(npts, npts);
    for k in 1..npts {
        let o = b(k).sqrt();
        jac[(k, k - 1)] = o;
        jac[(k - 1, k)] = o;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    // Newton polish on p_npts, then Christoffel weights from the orthonormal recurrence
    for t in nodes.iter_mut() {
        for _ in 0..3 {
            let (mut p0, mut p1, mut d0, mut d1) = (0.0, 1.0, 0.0, 0.0);
            for k in 0..npts {
                let bk = if k == 0 { 0.0 } else { b(k) };
                let p2 = *t * p1 - bk * p0;
                let d2 = p1 + *t * d1 - bk * d0;
                p0 = p1;
                p1 = p2;
                d0 = d1;
                d1 = d2;
            }
            if d1 != 0.0 {
                *t -= p1 / d1;
            }
        }
    }
    // exact symmetry of the weight
    for i in 0..npts / 2 {
        let j = npts - 1 - i;
        let a = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -a;
        nodes[j] = a;
    }
    if npts % 2 == 1 {
        nodes[npts / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&t| {
            let mut prev = 0.0;
            let mut cur = 1.0 / mu0.sqrt();
            let mut s = cur * cur;
            for k in 1..npts {
                let next = (t * cur - if k == 1 { 0.0 } else { b(k - 1).sqrt() * prev }) / b(k).sqrt();
                prev = cur;
                cur = next;
                s += cur * cur;
            }
            1.0 / s
        })
        .collect();
    for i in 0..npts / 2 {
        let j = npts - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    (nodes, weights)
}

/// `Γ(α+1)/Γ(α+3/2)`; exact for half-integer `α`, asymptotic series otherwise.
fn gamma_ratio(alpha: f64) -> f64 {
    let two = 2.0 * alpha + 2.0;
    if (two - two.round()).abs() < 1e-12 && two.round() >= 1.0 {
        let m = two.round() as u32;
        return gamma_half(m) / gamma_half(m + 1);
    }
    // Γ(x)/Γ(x+½) by upward recurrence into the asymptotic regime
    let mut x = alpha + 1.0;
    let mut f = 1.0;
    while x < 30.0 {
        f *= (x + 0.5) / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let asym = x.powf(-0.5)
        * (1.0 + inv / 8.0 + inv * inv / 128.0 - 5.0 * inv.powi(3) / 1024.0 - 21.0 * inv.powi(4) / 32768.0);
    f * asym
}

/// Scalar functions accepted by the coefficient integrals; errors carry a reason.
pub trait SphereFn: Fn(&[f64]) -> std::result::Result<Complex64, String> + Sync {}
impl<T: Fn(&[f64]) -> std::result::Result<Complex64, String> + Sync> SphereFn for T {}

/// `f_{k,l}(r) = Σ_j w_j f(r θ_j) Y_{k,l}(θ_j)` for one basis member (`l` is zero-based).
pub fn lf_coefficient<F: SphereFn>(
    f: &F,
    basis: &HarmonicBasis,
    l: usize,
    r: f64,
    rule: &SphereRule,
) -> Result<Complex64> {
    if basis.n() != rule.n() {
        return Err(LieError::DimensionMismatch {
            expected: basis.n(),
            got: rule.n(),
        });
    }
    if l >= basis.len() {
        return Err(LieError::invalid("l", format!("index {l} ≥ a_k = {}", basis.len())));
    }
    let partials: Vec<Result<Complex64>> = (0..rule.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut x = vec![0.0; rule.n()];
            for &j in chunk {
                let th = rule.node(j);
                x.iter_mut().zip(th).for_each(|(a, b)| *a = r * b);
                let v = f(&x).map_err(|reason| LieError::Evaluation { node: j, reason })?;
                let y = basis.eval_all_real(th)[l];
                acc += v * (rule.weights()[j] * y);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for p in partials {
        total += p?;
    }
    Ok(total)
}

/// All coefficients `f_{k,l}(r)` for `k ≤ system.kmax()`, indexed `[k][l]`.
pub fn lf_coefficients<F: SphereFn>(
    f: &F,
    system: &HarmonicSystem,
    r: f64,
    rule: &SphereRule,
) -> Result<Vec<Vec<Complex64>>> {
    if system.n() != rule.n() {
        return Err(LieError::DimensionMismatch {
            expected: system.n(),
            got: rule.n(),
        });
    }
    let dims = system.dims();
    let zero = || -> Vec<Vec<Complex64>> { dims.iter().map(|&d| vec![Complex64::new(0.0, 0.0); d]).collect() };
    let partials: Vec<Result<Vec<Vec<Complex64>>>> = (0..rule.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = zero();
            let mut x = vec![0.0; rule.n()];
            for &j in chunk {
                let th = rule.node(j);
                x.iter_mut().zip(th).for_each(|(a, b)| *a = r * b);
                let v = f(&x).map_err(|reason| LieError::Evaluation { node: j, reason })?;
                let wv = v * rule.weights()[j];
                for (row, ys) in acc.iter_mut().zip(system.eval_all(th)) {
                    row.iter_mut().zip(ys).for_each(|(a, y)| *a += wv * y);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = zero();
    for p in partials {
        for (row, part) in total.iter_mut().zip(p?) {
            row.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
    }
    Ok(total)
}

/// `∫_{S^{n−1}} |f(rθ)|² dθ` on the rule.
pub fn sphere_l2_sq<F: SphereFn>(f: &F, r: f64, rule: &SphereRule) -> Result<f64> {
    let mut s = 0.0;
    let mut x = vec![0.0; rule.n()];
    for (j, (th, w)) in rule.nodes().zip(rule.weights()).enumerate() {
        x.iter_mut().zip(th).for_each(|(a, b)| *a = r * b);
        let v = f(&x).map_err(|reason| LieError::Evaluation { node: j, reason })?;
        s += w * v.norm_sqr();
    }
    Ok(s)
}

/// Sum of the weights; equals `ω_{n−1}` for a valid rule.
pub fn weight_sum(rule: &SphereRule) -> f64 {
    rule.weights().iter().sum()
}
